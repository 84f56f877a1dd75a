// Acceptance gate: one line per criterion, nonzero exit on any failure.
// Criteria mix exhaustive property checks with desk-scale learning runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "glodismo/baselines.hpp"
#include "glodismo/config.hpp"
#include "glodismo/gumbel.hpp"
#include "glodismo/io.hpp"
#include "glodismo/operators.hpp"
#include "glodismo/solvers.hpp"
#include "glodismo/tape.hpp"
#include "glodismo/training.hpp"
#include "glodismo/transforms.hpp"
#include "helpers.hpp"

using namespace glodismo;
using namespace testutil;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("%s criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// ------------------------------------------------------------ criterion 1

void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    struct Family {
        std::shared_ptr<const Partition> part;
        std::vector<std::size_t> shape;
        int draws;
    };
    std::vector<Family> fams{
        {std::make_shared<const Partition>(Partition::rows(50, 784, 32)), {50, 784}, 3400},
        {std::make_shared<const Partition>(Partition::columns(40, 128, 4)), {40, 128}, 3300},
        {std::make_shared<const Partition>(Partition::whole(784, 32)), {784}, 3300},
    };
    long violations = 0, total = 0;
    for (auto& f : fams) {
        MaskLogits m{init_logits(f.shape, rng), 1.0, 1.0};
        for (int i = 0; i < f.draws; ++i) {
            ++total;
            if (!satisfies_partition(freeze_mask(m, f.part, rng), *f.part)) ++violations;
        }
    }
    double secs = seconds_since(t0);
    report(1, "structure invariance", violations == 0 && total == 10000 && secs < 60.0,
           std::to_string(total) + " masks, " + std::to_string(violations) +
               " violations, " + fmt(secs) + "s");
}

// ------------------------------------------------------------ criterion 2

double leaf_fd_err(const std::function<NodeId(Tape&, NodeId)>& graph, const Tensor& x0,
                   double eps = 1e-6) {
    auto value = [&](const Tensor& x) {
        Tape t;
        return t.value(graph(t, t.leaf(x)))[0];
    };
    Tape t;
    NodeId in = t.leaf(x0);
    NodeId loss = graph(t, in);
    t.backward(loss);
    return grad_rel_err(fd_gradient(value, x0, eps), t.grad(in));
}

void criterion_2() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(102);
    double worst_op = 0.0;
    std::string worst_name = "-";
    auto track = [&](const char* name, double err) {
        if (err > worst_op) {
            worst_op = err;
            worst_name = name;
        }
    };

    Tensor A = random_tensor({5, 7}, rng), B = random_tensor({7, 3}, rng);
    track("matmul_lhs", leaf_fd_err([&](Tape& t, NodeId a) {
        return t.sq_sum(t.matmul(a, t.leaf(B)));
    }, A));
    track("matmul_rhs", leaf_fd_err([&](Tape& t, NodeId b) {
        return t.sq_sum(t.matmul(t.leaf(A), b));
    }, B));
    Tensor X = random_tensor({6, 4}, rng);
    track("transpose", leaf_fd_err([](Tape& t, NodeId a) {
        return t.sq_sum(t.transpose(a));
    }, X));
    Tensor C = random_tensor({6, 4}, rng);
    track("add", leaf_fd_err([&](Tape& t, NodeId a) {
        return t.sq_sum(t.add(a, t.leaf(C)));
    }, X));
    track("sub", leaf_fd_err([&](Tape& t, NodeId a) {
        return t.sq_sum(t.sub(t.leaf(C), a));
    }, X));
    track("add_const", leaf_fd_err([&](Tape& t, NodeId a) {
        return t.sq_sum(t.add_const(a, C));
    }, X));
    track("scale", leaf_fd_err([](Tape& t, NodeId a) {
        return t.sq_sum(t.scale(a, -0.7));
    }, X));
    track("exp", leaf_fd_err([](Tape& t, NodeId a) {
        return t.sq_sum(t.exp(t.scale(a, 0.4)));
    }, X));
    track("sum", leaf_fd_err([](Tape& t, NodeId a) { return t.sum(a); }, X));
    track("sq_sum", leaf_fd_err([](Tape& t, NodeId a) { return t.sq_sum(a); }, X));
    track("mul_scalar_v", leaf_fd_err([&](Tape& t, NodeId a) {
        return t.sq_sum(t.mul_scalar(a, t.leaf(Tensor::scalar(0.8))));
    }, X));
    track("mul_scalar_s", leaf_fd_err([&](Tape& t, NodeId s) {
        return t.sq_sum(t.mul_scalar(t.leaf(X), s));
    }, Tensor::scalar(0.8)));

    Tensor shifted = X;
    for (std::size_t i = 0; i < shifted.size(); ++i)
        if (std::fabs(shifted[i]) < 0.05 ||
            std::fabs(std::fabs(shifted[i]) - 1.0) < 0.05 ||
            std::fabs(std::fabs(shifted[i]) - 0.5) < 0.05)
            shifted[i] += 0.17;
    track("relu", leaf_fd_err([](Tape& t, NodeId a) {
        return t.sq_sum(t.relu_nonneg(a));
    }, shifted));
    track("clamp_abs1", leaf_fd_err([](Tape& t, NodeId a) {
        return t.sq_sum(t.clamp_abs1(a));
    }, shifted));
    track("abs_sum", leaf_fd_err([](Tape& t, NodeId a) { return t.abs_sum(a); }, shifted));
    track("soft_threshold_v", leaf_fd_err([&](Tape& t, NodeId a) {
        return t.sq_sum(t.soft_threshold(a, t.leaf(Tensor::scalar(0.5))));
    }, shifted));
    track("soft_threshold_l", leaf_fd_err([&](Tape& t, NodeId l) {
        return t.sq_sum(t.soft_threshold(t.leaf(shifted), l));
    }, Tensor::scalar(0.5)));
    track("hard_threshold", leaf_fd_err([](Tape& t, NodeId a) {
        return t.sq_sum(t.hard_threshold(a, 2));
    }, X));
    Tensor v7 = random_tensor({7}, rng);
    track("softmax", leaf_fd_err([](Tape& t, NodeId a) {
        return t.sq_sum(t.softmax_tau(a, 0.6));
    }, v7));
    auto groups = std::make_shared<IndexGroups>(IndexGroups{{0, 2, 4}, {1, 3, 5}});
    track("median_select", leaf_fd_err([&](Tape& t, NodeId a) {
        return t.sq_sum(t.median_select(a, groups));
    }, random_tensor({6, 3}, rng)));
    auto part = std::make_shared<const Partition>(Partition::rows(3, 5, 2));
    track("topk_soft", leaf_fd_err([&](Tape& t, NodeId a) {
        return t.sq_sum(t.topk_straight_through(a, part, 0.9, true));
    }, random_tensor({3, 5}, rng)));
    auto L = std::make_shared<Tensor>(random_tensor({4, 4}, rng));
    auto R = std::make_shared<Tensor>(random_tensor({3, 3}, rng));
    track("sandwich", leaf_fd_err([&](Tape& t, NodeId a) {
        return t.sq_sum(t.sandwich(a, L, R));
    }, random_tensor({12, 2}, rng)));
    track("superpixel", leaf_fd_err([&](Tape& t, NodeId a) {
        return t.sq_sum(t.superpixel_expand(a, 5, 4, 3));
    }, random_tensor({2, 20}, rng, 0.1)));
    {
        std::size_t n = 16;
        Tensor gen = random_tensor({n}, rng);
        Tensor rm({n});
        for (std::size_t i = 0; i < n; ++i) rm[i] = i % 2 == 0 ? 1.0 : 0.0;
        Tensor Xc = random_tensor({n, 2}, rng);
        track("circulant_gen", leaf_fd_err([&](Tape& t, NodeId g) {
            return t.sq_sum(t.circulant_apply(g, t.leaf(rm), t.leaf(Xc), 0.8));
        }, gen));
        track("circulant_x", leaf_fd_err([&](Tape& t, NodeId x) {
            return t.sq_sum(t.circulant_apply(t.leaf(gen), t.leaf(rm), x, 0.8));
        }, Xc));
        Tensor Rr = random_tensor({n / 2, 2}, rng);
        track("circulant_adj_r", leaf_fd_err([&](Tape& t, NodeId r) {
            return t.sq_sum(t.circulant_adjoint(t.leaf(gen), t.leaf(rm), r, 0.8));
        }, Rr));
    }
    bool ops_ok = worst_op <= 1e-5;

    // end-to-end: T = 3, n = 16 graphs built on a smooth squared loss so
    // finite differences are meaningful (the training l1 loss has exact
    // kinks at perfectly recovered coordinates). Dense solvers are probed
    // w.r.t. the mask logits through the soft top-K surrogate; the median
    // and primal-dual solvers are probed w.r.t. the signal with a frozen
    // mask, since their selection structure is derived from hard 0/1 masks.
    double worst_e2e = 0.0;
    std::string worst_solver = "-";
    auto track_e2e = [&](const char* name, double err) {
        if (err > worst_e2e) {
            worst_e2e = err;
            worst_solver = name;
        }
    };
    {
        Rng setup(42);
        std::size_t m = 8, n = 16, d = 2, s = 3, B = 4;
        const int T = 3;
        auto part = std::make_shared<const Partition>(Partition::columns(m, n, d));
        MaskLogits logits{init_logits({m, n}, setup), 1.0, 1.0};
        Tensor X = random_tensor({n, B}, setup);
        Tensor noise = random_tensor({m, B}, setup, 0.01);
        Rng hard_rng(77);
        Tensor hard = freeze_mask(logits, part, hard_rng);

        auto run_solver = [&](Tape& t, SolverKind kind, const LinearMapNodes& op,
                              NodeId y) {
            SolverConfig cfg;
            cfg.kind = kind;
            cfg.iterations = T;
            cfg.sparsity = static_cast<int>(s);
            cfg.gamma = 0.8;
            ListaParamNodes lp;
            if (kind == SolverKind::ListaScalar || kind == SolverKind::EListaScalar)
                for (int i = 0; i < T; ++i) {
                    lp.gamma.push_back(t.leaf(Tensor::scalar(0.8)));
                    lp.rho.push_back(t.leaf(Tensor::scalar(-3.0)));
                }
            switch (kind) {
                case SolverKind::Iht: return iht_run(t, op, nullptr, y, cfg);
                case SolverKind::ListaScalar:
                    return lista_scalar_run(t, op, nullptr, y, cfg, lp);
                case SolverKind::EIht: return eiht_run(t, op, y, cfg);
                case SolverKind::EListaScalar:
                    return e_lista_scalar_run(t, op, y, cfg, lp);
                default:
                    cfg.sigma = 0.1;
                    cfg.tau_nnlad = 0.6;
                    return nnlad_run(t, op, y, cfg, operator_norm_estimate(hard, 1.0));
            }
        };
        for (SolverKind kind : {SolverKind::Iht, SolverKind::ListaScalar}) {
            auto build = [&](Tape& t, const Tensor& phi, NodeId& phi_leaf,
                             NodeId& x_leaf) {
                Rng mr(77);
                MaskLogits ml{phi, 1.0, 1.0};
                phi_leaf = t.leaf(phi);
                NodeId mask = sample_mask(t, phi_leaf, ml, part, mr, true);
                LinearMapNodes op = make_dense(mask, 0.4);
                x_leaf = t.leaf(X);
                NodeId y = t.add_const(op.apply(t, x_leaf), noise);
                IterateTrace tr = run_solver(t, kind, op, y);
                return t.sq_sum(t.sub(tr.iterates.back(), x_leaf));
            };
            auto value = [&](const Tensor& phi) {
                Tape t;
                NodeId pl, xl;
                return t.value(build(t, phi, pl, xl))[0];
            };
            Tape t;
            NodeId pl, xl;
            t.backward(build(t, logits.phi, pl, xl));
            track_e2e(kind == SolverKind::Iht ? "iht_phi" : "lista_phi",
                      grad_rel_err(fd_gradient(value, logits.phi, 1e-5), t.grad(pl)));
        }
        for (SolverKind kind :
             {SolverKind::EIht, SolverKind::EListaScalar, SolverKind::Nnlad}) {
            auto build = [&](Tape& t, const Tensor& xx, NodeId& x_leaf) {
                NodeId mn = t.leaf(hard);
                LinearMapNodes op = kind == SolverKind::Nnlad
                                        ? make_dense(mn, 1.0)
                                        : make_median_backed(mn, hard, 1.0);
                x_leaf = t.leaf(xx);
                NodeId y = t.add_const(op.apply(t, x_leaf), noise);
                IterateTrace tr = run_solver(t, kind, op, y);
                return t.sq_sum(t.sub(tr.iterates.back(), x_leaf));
            };
            auto value = [&](const Tensor& xx) {
                Tape t;
                NodeId xl;
                return t.value(build(t, xx, xl))[0];
            };
            Tape t;
            NodeId xl;
            t.backward(build(t, X, xl));
            const char* name = kind == SolverKind::EIht ? "e_iht_x"
                               : kind == SolverKind::EListaScalar ? "e_lista_x"
                                                                  : "nnlad_x";
            track_e2e(name, grad_rel_err(fd_gradient(value, X, 1e-5), t.grad(xl)));
        }
    }
    bool e2e_ok = worst_e2e <= 1e-4;
    double secs = seconds_since(t0);
    report(2, "gradient integrity", ops_ok && e2e_ok && secs < 120.0,
           "worst op " + worst_name + " " + fmt(worst_op) + ", worst end-to-end " +
               worst_solver + " " + fmt(worst_e2e) + ", " + fmt(secs) + "s");
}

// ------------------------------------------------------------ criterion 3

void criterion_3() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(103);
    double worst_circ = 0.0;
    for (std::size_t n : {std::size_t{8}, std::size_t{64}, std::size_t{256}}) {
        Tensor c({n});
        for (std::size_t k = 0; k < 3; ++k) c[rng.below(n)] = 1.0;
        Tensor rm({n});
        for (std::size_t i = 0; i < n; ++i) rm[i] = rng.below(2) ? 1.0 : 0.0;
        rm[0] = 1.0;
        Tensor X = random_tensor({n, 2}, rng);
        Tape t;
        const Tensor got = t.value(t.circulant_apply(t.leaf(c), t.leaf(rm), t.leaf(X), 1.0));
        Tensor want = dense_circulant_apply(c, rm, X, 1.0);
        for (std::size_t i = 0; i < want.size(); ++i)
            worst_circ = std::max(worst_circ, std::fabs(got[i] - want[i]));
    }

    bool median_exact = true;
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t m = 3 + rng.below(12);
        auto groups = std::make_shared<IndexGroups>(1);
        for (std::size_t i = 0; i < m; ++i)
            if (rng.below(3)) (*groups)[0].push_back(static_cast<std::uint32_t>(i));
        if ((*groups)[0].empty()) (*groups)[0].push_back(0);
        Tensor Y = random_tensor({m, 2}, rng);
        Tape t;
        const Tensor got = t.value(t.median_select(t.leaf(Y), groups));
        for (std::size_t b = 0; b < 2; ++b) {
            std::vector<double> vals;
            for (auto i : (*groups)[0]) vals.push_back(Y.at(i, b));
            if (got.at(0, b) != median_oracle(vals)) median_exact = false;
        }
    }

    double worst_wav = 0.0;
    for (auto kind : {TransformKind::Haar1, TransformKind::Bior22}) {
        Transform psi(kind, 28, 28);
        Tensor img = random_tensor({784}, rng);
        Tensor back = psi.synthesis(psi.analysis(img));
        for (std::size_t i = 0; i < 784; ++i)
            worst_wav = std::max(worst_wav, std::fabs(back[i] - img[i]));
    }

    double worst_iht = 0.0;
    bool support_match = true;
    // the s-th and (s+1)-th pre-threshold magnitudes must be separated, or
    // the selected support depends on summation order (last-ulp effects);
    // such draws are redrawn because exact comparison is ill-posed on them
    auto rank_gap = [](const Tensor& mask, const Tensor& y, std::size_t s,
                       double gamma, double scale, int T) {
        std::size_t m = mask.rows(), n = mask.cols();
        Tensor x({n, 1});
        double gap = 1e300;
        for (int t = 0; t < T; ++t) {
            std::vector<double> r(m), mag(n);
            Tensor pre({n, 1});
            for (std::size_t i = 0; i < m; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    acc += scale * mask.at(i, j) * x.at(j, 0);
                r[i] = y.at(i, 0) - acc;
            }
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t i = 0; i < m; ++i)
                    acc += scale * mask.at(i, j) * r[i];
                pre.at(j, 0) = x.at(j, 0) + gamma * acc;
                mag[j] = std::fabs(pre.at(j, 0));
            }
            std::vector<double> sorted = mag;
            std::sort(sorted.begin(), sorted.end(), std::greater<>());
            gap = std::min(gap, sorted[s - 1] - sorted[s]);
            x = hard_threshold_oracle(pre, s);
        }
        return gap;
    };
    int checked = 0;
    while (checked < 50) {
        std::size_t m = 12, n = 20, s = 3;
        Tensor mask = random_row_mask(m, n, 4, rng);
        Tensor x({n, 1});
        for (std::size_t k = 0; k < s; ++k)
            x.at(rng.below(n), 0) = rng.gaussian() + 2.0;
        Tensor y({m, 1});
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += 0.3 * mask.at(i, j) * x.at(j, 0);
            y.at(i, 0) = acc;
        }
        if (rank_gap(mask, y, s, 0.9, 0.3, 6) < 1e-8) continue;
        ++checked;
        Tape t;
        LinearMapNodes phi = make_dense(t.leaf(mask), 0.3);
        SolverConfig cfg;
        cfg.kind = SolverKind::Iht;
        cfg.iterations = 6;
        cfg.sparsity = static_cast<int>(s);
        cfg.gamma = 0.9;
        IterateTrace trace = iht_run(t, phi, nullptr, t.leaf(y), cfg);
        auto want = reference_iht(mask, 0.3, y, s, 0.9, 6);
        for (std::size_t k = 0; k < want.size(); ++k) {
            const Tensor& got = t.value(trace.iterates[k]);
            for (std::size_t i = 0; i < got.size(); ++i) {
                if ((got[i] == 0.0) != (want[k][i] == 0.0)) support_match = false;
                worst_iht = std::max(worst_iht, std::fabs(got[i] - want[k][i]));
            }
        }
    }
    double secs = seconds_since(t0);
    bool pass = worst_circ <= 1e-10 && median_exact && worst_wav <= 1e-10 &&
                support_match && worst_iht <= 1e-10 && secs < 120.0;
    report(3, "oracle equivalence", pass,
           "circulant " + fmt(worst_circ) + ", median " +
               (median_exact ? "exact" : "MISMATCH") + ", wavelet " + fmt(worst_wav) +
               ", iht " + fmt(worst_iht) +
               (support_match ? "" : " SUPPORT MISMATCH") + ", " + fmt(secs) + "s");
}

// ------------------------------------------------------------ criteria 4/9

ExperimentConfig expander_desk_cfg() {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::Expander;
    cfg.solver = SolverKind::EIht;
    cfg.m = 40;
    cfg.n = 128;
    cfg.d = 4;
    cfg.s = 8;
    cfg.iterations = 20;
    cfg.epochs = 20;
    cfg.batch_size = 128;  // desk scale: more optimizer steps per sample
    cfg.train_samples = 5000;
    cfg.test_samples = 2000;
    cfg.noise_family = NoiseFamily::StudentT1;
    cfg.snr_db = 40.0;
    cfg.seed = 1;
    cfg.noise_scale = 0.001;  // reference Gumbel rescale, keeps the hard
                              // straight-through backward unbiased
    cfg.lr = 0.003;
    cfg.average_loss = true;  // convergence speed is the learnable margin
    return cfg;
}

struct ExpanderRun {
    TrainResult result;
    double learned_nmae = 0.0, random_nmae = 0.0;
    bool done = false;
};
ExpanderRun g_expander;

double eval_nmae(Pipeline& pipe, const Params& p, const Tensor& mask, double scale) {
    Rng er(pipe.cfg().seed ^ 0xE7A1ULL);
    return pipe.evaluate(p, mask, nullptr, pipe.test_set(), er, scale).nmae;
}

void criterion_4() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = expander_desk_cfg();
    TrainResult r = train(cfg);
    Pipeline pipe(cfg);
    double learned = eval_nmae(pipe, r.params, r.frozen_mask, r.scale);
    double random = eval_nmae(pipe, r.params, r.initial_mask, r.scale);

    // equal budget: the baselines get as many optimization steps as training
    std::size_t steps = (cfg.train_samples / cfg.batch_size) * cfg.epochs;
    ExperimentConfig bg = cfg;
    bg.baseline = BaselineKind::Greedy;
    bg.baseline_steps = static_cast<int>(steps);
    bg.scale = r.scale;  // share the grid-searched scale
    BaselineResult greedy = run_baseline(bg);
    ExperimentConfig bs = bg;
    bs.baseline = BaselineKind::SimAn;
    bs.siman_t0 = 0.003;      // left-d-regular temperature settings
    bs.siman_decay = 0.9998;
    BaselineResult siman = run_baseline(bs);
    double greedy_nmae = eval_nmae(pipe, r.params, greedy.mask, r.scale);
    double siman_nmae = eval_nmae(pipe, r.params, siman.mask, r.scale);

    g_expander = {std::move(r), learned, random, true};
    double secs = seconds_since(t0);
    bool pass = learned <= random - 2.0 && learned <= greedy_nmae &&
                learned <= siman_nmae && secs < 900.0;
    report(4, "expander desk-scale learning", pass,
           "nmae learned " + fmt(learned) + " vs random " + fmt(random) +
               " (gap " + fmt(random - learned) + " dB), greedy " + fmt(greedy_nmae) +
               ", siman " + fmt(siman_nmae) + ", " + fmt(secs) + "s");
}

void criterion_9() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = expander_desk_cfg();
    if (!g_expander.done) {
        report(9, "determinism", false, "criterion 4 run unavailable");
        return;
    }
    TrainResult again = train(cfg);
    auto csv_of = [](const std::vector<MetricRow>& rows) {
        std::ostringstream ss;
        char buf[32];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%.12g", r.value);
            ss << r.epoch << ',' << r.split << ',' << r.metric << ',' << buf << ','
               << r.seed << '\n';
        }
        return ss.str();
    };
    bool same = csv_of(g_expander.result.history) == csv_of(again.history);
    bool bits = true;
    for (std::size_t i = 0; i < again.history.size(); ++i)
        if (again.history[i].value != g_expander.result.history[i].value) bits = false;
    double secs = seconds_since(t0);
    report(9, "determinism", same && bits,
           same ? "metric csv bit-identical across reruns, " + fmt(secs) + "s"
                : "csv differs between identical runs");
}

// ------------------------------------------------------------ criteria 5/7

ExperimentConfig single_pixel_desk_cfg() {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::SinglePixel;
    cfg.solver = SolverKind::Iht;
    cfg.m = 50;
    cfg.n = 784;
    cfg.d = 32;
    cfg.s = 50;
    cfg.iterations = 20;
    cfg.transform = TransformKind::Bior22;
    cfg.epochs = 5;
    cfg.batch_size = 128;  // desk scale: more optimizer steps per sample
    cfg.noise_scale = 0.001;
    cfg.train_samples = 20000;
    cfg.test_samples = 2000;
    cfg.noise_family = NoiseFamily::Gaussian;
    cfg.snr_db = 40.0;
    cfg.seed = 1;
    return cfg;
}

void criterion_5() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = single_pixel_desk_cfg();
    TrainResult r = train(cfg);
    Pipeline pipe(cfg);
    Rng e1(cfg.seed ^ 0xE7A1ULL), e2(cfg.seed ^ 0xE7A1ULL);
    double learned =
        pipe.evaluate(r.params, r.frozen_mask, nullptr, pipe.test_set(), e1, r.scale).nmse;
    double random =
        pipe.evaluate(r.params, r.initial_mask, nullptr, pipe.test_set(), e2, r.scale).nmse;
    double secs = seconds_since(t0);
    bool pass = learned <= random - 3.0 && secs < 1800.0;
    report(5, "single-pixel desk-scale learning", pass,
           "nmse learned " + fmt(learned) + " vs random " + fmt(random) + " (gap " +
               fmt(random - learned) + " dB), " + fmt(secs) + "s");
}

void criterion_7() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = single_pixel_desk_cfg();
    cfg.baseline = BaselineKind::SimAn;
    cfg.siman_t0 = 0.0012;
    cfg.siman_decay = 0.9997;
    cfg.baseline_steps = static_cast<int>(cfg.train_samples / cfg.batch_size);  // 1 epoch
    cfg.test_samples = 64;  // epoch-end metrics are irrelevant here
    BaselineResult r = run_baseline(cfg);
    double secs = seconds_since(t0);
    bool pass = r.first_epoch_acceptance >= 0.60 && r.first_epoch_acceptance <= 0.95;
    report(7, "simulated-annealing calibration", pass,
           "first-epoch acceptance " + fmt(r.first_epoch_acceptance) + " over " +
               std::to_string(r.proposed) + " proposals, " + fmt(secs) + "s");
}

// ------------------------------------------------------------ criterion 6

void criterion_6() {
    auto t0 = std::chrono::steady_clock::now();
    if (!g_expander.done) {
        report(6, "cross-solver transfer", false, "criterion 4 run unavailable");
        return;
    }
    ExperimentConfig cfg = expander_desk_cfg();
    cfg.solver = SolverKind::EListaScalar;
    cfg.noise_scale = 0.001;  // scalar co-training convention
    Pipeline pipe(cfg);
    Rng prng(cfg.seed);
    Params base = init_params(pipe, prng);

    // identical scalar-training protocol for both masks: theta-only updates
    // with the mask frozen
    auto scalar_train_and_eval = [&](const Tensor& mask) {
        Params p = base;
        AdamState adam;
        adam.lr = cfg.lr;
        Rng drng = Rng(cfg.seed).split(4);
        for (int step = 0; step < 120; ++step) {
            Tensor X = pipe.sample_signals(cfg.batch_size, drng);
            Tape t;
            auto b = pipe.build(t, p, &mask, nullptr, X, drng, g_expander.result.scale);
            t.backward(b.loss);
            Tensor gg({p.gamma.size()}), gr({p.rho.size()});
            for (std::size_t k = 0; k < b.gamma.size(); ++k) {
                gg[k] = t.grad(b.gamma[k])[0];
                gr[k] = t.grad(b.rho[k])[0];
            }
            adam_step(adam, {&p.gamma, &p.rho}, {&gg, &gr});
        }
        Rng er(cfg.seed ^ 0xE7A1ULL);
        return pipe
            .evaluate(p, mask, nullptr, pipe.test_set(), er, g_expander.result.scale)
            .nmae;
    };
    double learned = scalar_train_and_eval(g_expander.result.frozen_mask);
    double random = scalar_train_and_eval(g_expander.result.initial_mask);
    double secs = seconds_since(t0);
    bool pass = learned <= random;
    report(6, "cross-solver transfer", pass,
           "e_lista nmae with e_iht-learned mask " + fmt(learned) + " vs random " +
               fmt(random) + ", " + fmt(secs) + "s");
}

// ------------------------------------------------------------ criterion 8

// Least-l1-residual support of size <= 2 by enumeration with nonnegative
// least-squares fits on each candidate support.
std::vector<std::size_t> brute_force_support(const Tensor& mask, const Tensor& y,
                                             double threshold) {
    std::size_t m = mask.rows(), n = mask.cols();
    auto residual_l1 = [&](const std::vector<std::size_t>& sup,
                           const std::vector<double>& coef) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double yi = 0.0;
            for (std::size_t k = 0; k < sup.size(); ++k)
                yi += mask.at(i, sup[k]) * coef[k];
            acc += std::fabs(yi - y.at(i, 0));
        }
        return acc;
    };
    double best = residual_l1({}, {});
    std::vector<std::size_t> best_sup;
    std::vector<double> best_coef;
    for (std::size_t j = 0; j < n; ++j) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            num += mask.at(i, j) * y.at(i, 0);
            den += mask.at(i, j) * mask.at(i, j);
        }
        if (den == 0.0) continue;
        double a = std::max(0.0, num / den);
        double r = residual_l1({j}, {a});
        if (r < best - 1e-12) {
            best = r;
            best_sup = {j};
            best_coef = {a};
        }
    }
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) {
            double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                a11 += mask.at(i, j) * mask.at(i, j);
                a12 += mask.at(i, j) * mask.at(i, k);
                a22 += mask.at(i, k) * mask.at(i, k);
                b1 += mask.at(i, j) * y.at(i, 0);
                b2 += mask.at(i, k) * y.at(i, 0);
            }
            double det = a11 * a22 - a12 * a12;
            if (std::fabs(det) < 1e-12) continue;
            double c1 = (a22 * b1 - a12 * b2) / det;
            double c2 = (a11 * b2 - a12 * b1) / det;
            if (c1 < 0.0 || c2 < 0.0) continue;
            double r = residual_l1({j, k}, {c1, c2});
            if (r < best - 1e-12) {
                best = r;
                best_sup = {j, k};
                best_coef = {c1, c2};
            }
        }
    std::vector<std::size_t> sup;
    for (std::size_t k = 0; k < best_sup.size(); ++k)
        if (best_coef[k] > threshold) sup.push_back(best_sup[k]);
    return sup;
}

void criterion_8() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(108);
    std::size_t m = 12, n = 24, d = 3, s = 2;
    const double threshold = 0.01;

    bool nonneg = true;
    bool optimum_zero = true;
    int matches = 0;
    const int instances = 200;
    for (int inst = 0; inst < instances; ++inst) {
        Tensor mask = random_row_mask(m, n, d, rng);
        // exact-s support with beta(2,8) amplitudes, noiseless measurements
        Tensor x({n, 1});
        std::size_t j1 = rng.below(n), j2 = rng.below(n);
        while (j2 == j1) j2 = rng.below(n);
        x.at(j1, 0) = rng.beta_int(2, 8);
        x.at(j2, 0) = rng.beta_int(2, 8);
        Tensor y({m, 1});
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += mask.at(i, j) * x.at(j, 0);
            y.at(i, 0) = acc;
        }
        if (inst < 10) {
            // the objective at the constructed optimum, evaluated through the
            // same operator path the solver uses, must vanish
            Tape t;
            LinearMapNodes op = make_dense(t.leaf(mask), 1.0);
            NodeId obj = t.abs_sum(t.sub(op.apply(t, t.leaf(x)), t.leaf(y)));
            if (t.value(obj)[0] > 1e-12) optimum_zero = false;
        }

        Tape t;
        LinearMapNodes phi = make_dense(t.leaf(mask), 1.0);
        SolverConfig scfg;
        scfg.kind = SolverKind::Nnlad;
        scfg.iterations = 1200;
        scfg.sigma = 0.1;
        scfg.tau_nnlad = 0.6;
        IterateTrace trace =
            nnlad_run(t, phi, t.leaf(y), scfg, operator_norm_estimate(mask, 1.0));
        for (NodeId it : trace.iterates) {
            const Tensor& v = t.value(it);
            for (std::size_t i = 0; i < v.size(); ++i)
                if (v[i] < 0.0) nonneg = false;
        }
        const Tensor& xh = t.value(trace.iterates.back());
        std::vector<std::size_t> got;
        for (std::size_t j = 0; j < n; ++j)
            if (xh.at(j, 0) > threshold) got.push_back(j);
        if (got == brute_force_support(mask, y, threshold)) ++matches;
    }
    double secs = seconds_since(t0);
    double rate = static_cast<double>(matches) / instances;
    bool pass = nonneg && optimum_zero && rate >= 0.95 && secs < 300.0;
    report(8, "group-testing properties", pass,
           std::string("iterates ") + (nonneg ? "nonnegative" : "NEGATIVE") +
               ", optimum objective " + (optimum_zero ? "zero" : "NONZERO") +
               ", oracle match " + fmt(rate * 100.0) + "% (" +
               std::to_string(matches) + "/200), " + fmt(secs) + "s");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
