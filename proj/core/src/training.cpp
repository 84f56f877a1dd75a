#include "glodismo/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace glodismo {

// ---------------------------------------------------------------- optimizer

void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads) {
    if (params.size() != grads.size())
        throw std::invalid_argument("adam_step: params/grads size mismatch");
    if (state.m.empty()) {
        for (auto* p : params) {
            state.m.emplace_back(Tensor(p->shape()));
            state.v.emplace_back(Tensor(p->shape()));
        }
    }
    ++state.step_count;
    double c1 = 1.0 - std::pow(state.beta1, state.step_count);
    double c2 = 1.0 - std::pow(state.beta2, state.step_count);
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = *grads[k];
        if (!g.same_shape(p))
            throw std::invalid_argument("adam_step: gradient shape mismatch");
        if (!g.all_finite())
            throw std::runtime_error("adam_step: non-finite gradient");
        Tensor& m = state.m[k];
        Tensor& v = state.v[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            p[i] -= state.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + state.eps);
        }
    }
}

// ---------------------------------------------------------------- noise

void add_noise(Tensor& y, const NoiseModel& model, Rng& rng) {
    if (model.family == NoiseFamily::None) return;
    std::size_t m = y.rows(), B = y.cols();
    double att = std::pow(10.0, -model.snr_db / 10.0);
    for (std::size_t b = 0; b < B; ++b) {
        double power = 0.0;
        for (std::size_t i = 0; i < m; ++i) power += y.at(i, b) * y.at(i, b);
        power /= static_cast<double>(m);
        double s = std::sqrt(power * att);
        for (std::size_t i = 0; i < m; ++i) {
            double draw = model.family == NoiseFamily::Gaussian ? rng.gaussian()
                                                                : rng.cauchy();
            y.at(i, b) += s * draw;
        }
    }
}

// ---------------------------------------------------------------- metrics

namespace {

double ratio_db(double num, double den) {
    if (den <= 0.0) return 0.0;  // degenerate reference batch
    double r = num / den;
    constexpr double floor = 1e-15;  // -150 dB
    return 10.0 * std::log10(std::max(r, floor));
}

}  // namespace

double nmse_db(const Tensor& x_true, const Tensor& x_hat) {
    if (!x_true.same_shape(x_hat))
        throw std::invalid_argument("nmse_db: shape mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x_true.size(); ++i) {
        double d = x_hat[i] - x_true[i];
        num += d * d;
        den += x_true[i] * x_true[i];
    }
    return ratio_db(num, den);
}

double nmae_db(const Tensor& x_true, const Tensor& x_hat) {
    if (!x_true.same_shape(x_hat))
        throw std::invalid_argument("nmae_db: shape mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x_true.size(); ++i) {
        num += std::fabs(x_hat[i] - x_true[i]);
        den += std::fabs(x_true[i]);
    }
    return ratio_db(num, den);
}

// ---------------------------------------------------------------- pipeline

namespace {

std::vector<std::size_t> logit_shape(const Partition& p) {
    if (p.grid_cols() == 1) return {p.grid_rows()};
    return {p.grid_rows(), p.grid_cols()};
}

Tensor take_columns(const Tensor& src, std::size_t count) {
    std::size_t n = src.rows(), have = src.cols();
    count = std::min(count, have);
    Tensor out({n, count});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t b = 0; b < count; ++b) out.at(i, b) = src.at(i, b);
    return out;
}

}  // namespace

Pipeline::Pipeline(const ExperimentConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const std::size_t m = cfg_.m, n = cfg_.n, d = cfg_.d;
    switch (cfg_.experiment) {
        case ExperimentKind::SinglePixel:
        case ExperimentKind::GroupTesting:
            part_ = std::make_shared<const Partition>(Partition::rows(m, n, d));
            break;
        case ExperimentKind::SinglePixelSuperpixel:
            if (n != cfg_.image_h * cfg_.image_w)
                throw std::invalid_argument("superpixel: n must equal image_h*image_w");
            part_ = std::make_shared<const Partition>(Partition::rows(m, n, d));
            break;
        case ExperimentKind::SinglePixelCirculant:
            // generator logits over n taps; row logits select m of n rows
            part_ = std::make_shared<const Partition>(Partition::whole(n, d));
            row_part_ = std::make_shared<const Partition>(Partition::whole(n, m));
            break;
        case ExperimentKind::Expander:
            part_ = std::make_shared<const Partition>(Partition::columns(m, n, d));
            break;
    }

    if (cfg_.is_image_experiment() && cfg_.transform != TransformKind::Identity)
        psi_ = std::make_unique<Transform>(cfg_.transform, cfg_.image_h, cfg_.image_w);

    loss_.l1 = cfg_.experiment == ExperimentKind::Expander ||
               cfg_.experiment == ExperimentKind::GroupTesting;
    loss_.average_over_iterations = cfg_.average_loss;

    if (cfg_.is_image_experiment()) {
        namespace fs = std::filesystem;
        std::string dir = cfg_.data_path;
        if (dir.empty() && fs::exists("data/mnist/train-images-idx3-ubyte"))
            dir = "data/mnist";
        if (!dir.empty()) {
            train_images_ = load_idx_images(dir + "/train-images-idx3-ubyte");
            test_set_ = take_columns(load_idx_images(dir + "/t10k-images-idx3-ubyte"),
                                     cfg_.test_samples);
        } else {
            Rng corpus(cfg_.seed ^ 0xC0A9005ULL);
            train_images_ = gen_strokes(std::min<std::size_t>(cfg_.train_samples, 20000),
                                        corpus);
            test_set_ = gen_strokes(cfg_.test_samples, corpus);
        }
        if (train_images_.rows() != n)
            throw std::invalid_argument("image corpus dimension does not match n");
    } else {
        synth_.n = n;
        synth_.s = cfg_.s;
        if (cfg_.experiment == ExperimentKind::GroupTesting) {
            synth_.mode = SupportMode::ExactWithoutReplacement;
            synth_.law = AmplitudeLaw::Beta28;
        } else {
            synth_.mode = SupportMode::BernoulliExpected;
            synth_.law = AmplitudeLaw::Gaussian;
        }
        Rng test_rng(cfg_.seed ^ 0x7E57ULL);
        test_set_ = gen_sparse(synth_, cfg_.test_samples, test_rng);
    }
}

Tensor Pipeline::sample_signals(std::size_t count, Rng& rng) const {
    if (!cfg_.is_image_experiment()) return gen_sparse(synth_, count, rng);
    std::size_t n = train_images_.rows(), have = train_images_.cols();
    Tensor out({n, count});
    for (std::size_t b = 0; b < count; ++b) {
        std::size_t pick = rng.below(have);
        for (std::size_t i = 0; i < n; ++i) out.at(i, b) = train_images_.at(i, pick);
    }
    return out;
}

Tensor Pipeline::freeze_mask_main(const Params& p, Rng& rng) const {
    MaskLogits m{p.phi, cfg_.noise_scale, cfg_.tau};
    return freeze_mask(m, part_, rng);
}

Tensor Pipeline::freeze_mask_row(const Params& p, Rng& rng) const {
    if (!row_part_) throw std::logic_error("freeze_mask_row: no row partition");
    MaskLogits m{p.phi_row, cfg_.noise_scale, cfg_.tau};
    return freeze_mask(m, row_part_, rng);
}

Pipeline::Built Pipeline::build(Tape& tape, const Params& p, const Tensor* fixed_mask,
                                const Tensor* fixed_row, const Tensor& X,
                                Rng& noise_rng, double scale, bool soft_mask,
                                int iterations_override) const {
    Built out;
    const bool circulant = cfg_.experiment == ExperimentKind::SinglePixelCirculant;

    NodeId mask_node, row_node = -1;
    if (fixed_mask) {
        mask_node = tape.leaf(*fixed_mask);
        if (circulant) {
            if (!fixed_row)
                throw std::invalid_argument("build: circulant needs a fixed row mask");
            row_node = tape.leaf(*fixed_row);
        }
    } else {
        out.phi = tape.leaf(p.phi);
        MaskLogits m{p.phi, cfg_.noise_scale, cfg_.tau};
        mask_node = sample_mask(tape, out.phi, m, part_, noise_rng, soft_mask);
        if (circulant) {
            out.phi_row = tape.leaf(p.phi_row);
            MaskLogits mr{p.phi_row, cfg_.noise_scale, cfg_.tau};
            row_node = sample_mask(tape, out.phi_row, mr, row_part_, noise_rng, soft_mask);
        }
    }
    // copy: the tape's value store reallocates as further nodes are pushed
    Tensor mask_value = tape.value(mask_node);

    LinearMapNodes phi;
    switch (cfg_.experiment) {
        case ExperimentKind::SinglePixel:
        case ExperimentKind::GroupTesting:
            phi = (cfg_.solver == SolverKind::EIht ||
                   cfg_.solver == SolverKind::EListaScalar)
                      ? make_median_backed(mask_node, mask_value, scale)
                      : make_dense(mask_node, scale);
            break;
        case ExperimentKind::Expander:
            phi = (cfg_.solver == SolverKind::EIht ||
                   cfg_.solver == SolverKind::EListaScalar)
                      ? make_median_backed(mask_node, mask_value, scale)
                      : make_dense(mask_node, scale);
            break;
        case ExperimentKind::SinglePixelCirculant:
            phi = make_circulant(mask_node, row_node, scale);
            break;
        case ExperimentKind::SinglePixelSuperpixel:
            phi = make_superpixel(mask_node, cfg_.image_h, cfg_.image_w, cfg_.delta,
                                  scale);
            break;
    }

    NodeId x_node = tape.leaf(X);
    out.x = x_node;
    NodeId y = phi.apply(tape, x_node);
    if (cfg_.noise_family != NoiseFamily::None) {
        Tensor noisy = tape.value(y);
        add_noise(noisy, NoiseModel{cfg_.noise_family, cfg_.snr_db}, noise_rng);
        const Tensor& clean = tape.value(y);
        for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] -= clean[i];
        y = tape.add_const(y, noisy);
    }

    SolverConfig sc;
    sc.kind = cfg_.solver;
    sc.iterations = iterations_override > 0 ? iterations_override : cfg_.iterations;
    sc.sparsity = static_cast<int>(cfg_.s);
    sc.gamma = cfg_.gamma;
    sc.sigma = cfg_.sigma;
    sc.tau_nnlad = cfg_.tau_nnlad;
    sc.average_loss = cfg_.average_loss;

    ListaParamNodes lp;
    if (cfg_.solver_has_params()) {
        // the unrolled depth is pinned to the learned parameter count
        sc.iterations = static_cast<int>(p.gamma.size());
        for (std::size_t t = 0; t < p.gamma.size(); ++t) {
            lp.gamma.push_back(tape.leaf(Tensor::scalar(p.gamma[t])));
            lp.rho.push_back(tape.leaf(Tensor::scalar(p.rho[t])));
        }
        out.gamma = lp.gamma;
        out.rho = lp.rho;
    }

    IterateTrace trace;
    switch (cfg_.solver) {
        case SolverKind::Iht:
            trace = iht_run(tape, phi, psi_.get(), y, sc);
            break;
        case SolverKind::ListaScalar:
            trace = lista_scalar_run(tape, phi, psi_.get(), y, sc, lp);
            break;
        case SolverKind::EIht:
            trace = eiht_run(tape, phi, y, sc);
            break;
        case SolverKind::EListaScalar:
            trace = e_lista_scalar_run(tape, phi, y, sc, lp);
            break;
        case SolverKind::Nnlad: {
            double norm = operator_norm_estimate(mask_value, scale);
            trace = nnlad_run(tape, phi, y, sc, norm);
            break;
        }
    }
    out.trace = trace.iterates;
    out.xhat = trace.iterates.back();

    // Per-sample normalized reconstruction error: each column of the
    // residual is weighted by the inverse norm of its target, so the batch
    // loss is a mean relative error. This keeps the loss scale-free across
    // sample draws and makes the annealing temperatures of the discrete
    // baselines transfer across problem sizes. Near-zero targets are
    // floored at 1e-3 of the batch-mean norm to keep weights finite.
    const std::size_t B = X.cols();
    Tensor weights({B, B});
    {
        std::vector<double> norms(B, 0.0);
        double mean_norm = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < X.rows(); ++i) {
                double v = X[i * B + b];
                acc += loss_.l1 ? std::abs(v) : v * v;
            }
            norms[b] = loss_.l1 ? acc : std::sqrt(acc);
            mean_norm += norms[b];
        }
        mean_norm /= static_cast<double>(B);
        double floor = mean_norm > 0.0 ? 1e-3 * mean_norm : 1.0;
        for (std::size_t b = 0; b < B; ++b)
            weights[b * B + b] = 1.0 / std::max(norms[b], floor);
    }
    NodeId w_node = tape.leaf(weights);
    auto term = [&](NodeId xh) {
        NodeId diff = tape.matmul(tape.sub(xh, x_node), w_node);
        return loss_.l1 ? tape.abs_sum(diff) : tape.sq_sum(diff);
    };
    NodeId loss;
    std::size_t denom = X.cols();
    if (loss_.average_over_iterations) {
        loss = term(out.trace[0]);
        for (std::size_t t = 1; t < out.trace.size(); ++t)
            loss = tape.add(loss, term(out.trace[t]));
        denom *= out.trace.size();
    } else {
        loss = term(out.xhat);
    }
    out.loss = tape.scale(loss, 1.0 / static_cast<double>(denom));
    return out;
}

double Pipeline::batch_loss(const Params& p, const Tensor& mask, const Tensor* row_mask,
                            const Tensor& X, Rng& noise_rng, double scale) const {
    Tape tape;
    Built b = build(tape, p, &mask, row_mask, X, noise_rng, scale);
    return tape.value(b.loss)[0];
}

EvalMetrics Pipeline::evaluate(const Params& p, const Tensor& mask,
                               const Tensor* row_mask, const Tensor& X,
                               Rng& noise_rng, double scale,
                               int iterations_override) const {
    constexpr std::size_t chunk = 256;  // bounds tape memory at long unroll depths
    std::size_t n = X.rows(), total = X.cols();
    double se = 0.0, e2 = 0.0, ae = 0.0, a1 = 0.0;
    double fp = 0.0, fn = 0.0;
    for (std::size_t at = 0; at < total; at += chunk) {
        std::size_t b = std::min(chunk, total - at);
        Tensor Xc({n, b});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < b; ++j) Xc.at(i, j) = X.at(i, at + j);
        Tape tape;
        Built built = build(tape, p, &mask, row_mask, Xc, noise_rng, scale, false,
                            iterations_override);
        const Tensor& xh = tape.value(built.xhat);
        for (std::size_t i = 0; i < xh.size(); ++i) {
            double d = xh[i] - Xc[i];
            se += d * d;
            ae += std::fabs(d);
            e2 += Xc[i] * Xc[i];
            a1 += std::fabs(Xc[i]);
            bool truth = std::fabs(Xc[i]) > 1e-12;
            bool pred = std::fabs(xh[i]) > cfg_.positive_threshold;
            if (pred && !truth) fp += 1.0;
            if (!pred && truth) fn += 1.0;
        }
    }
    EvalMetrics m;
    m.nmse = ratio_db(se, e2);
    m.nmae = ratio_db(ae, a1);
    m.false_positives = fp / static_cast<double>(total);
    m.false_negatives = fn / static_cast<double>(total);
    return m;
}

double Pipeline::find_scale(const Params& p, Rng& rng) const {
    Tensor mask = freeze_mask_main(p, rng);
    Tensor row;
    const Tensor* rowp = nullptr;
    if (row_part_) {
        row = freeze_mask_row(p, rng);
        rowp = &row;
    }
    Tensor X = sample_signals(cfg_.batch_size, rng);
    Rng noise0 = rng.split(7);
    auto probe = [&](double s) {
        Rng nr = noise0;  // identical noise draws at every grid point
        try {
            return batch_loss(p, mask, rowp, X, nr, s);
        } catch (const std::runtime_error&) {
            return static_cast<double>(INFINITY);  // diverged at this scale
        }
    };
    return grid_search_scale(probe, default_scale_grid(), cfg_.is_image_experiment());
}

Params init_params(const Pipeline& pipe, Rng& rng) {
    const ExperimentConfig& cfg = pipe.cfg();
    Params p;
    p.phi = init_logits(logit_shape(*pipe.phi_partition()), rng, cfg.noise_scale);
    if (pipe.row_partition())
        p.phi_row = init_logits(logit_shape(*pipe.row_partition()), rng, cfg.noise_scale);
    if (cfg.solver_has_params()) {
        std::size_t T = static_cast<std::size_t>(cfg.iterations);
        p.gamma = Tensor({T});
        p.rho = Tensor({T});
        for (std::size_t t = 0; t < T; ++t) {
            p.gamma[t] = cfg.gamma;
            p.rho[t] = std::log(0.01);  // small initial soft threshold
        }
    }
    return p;
}

// ---------------------------------------------------------------- train loop

TrainResult train(const ExperimentConfig& cfg) {
    Pipeline pipe(cfg);
    Rng init_rng(cfg.seed);
    Params p = init_params(pipe, init_rng);
    const bool circulant = cfg.experiment == ExperimentKind::SinglePixelCirculant;

    TrainResult res;
    // one fixed freeze stream: the same Gumbel draws realize every frozen
    // mask, so per-epoch test metrics differ only through phi
    auto freeze = [&](const Params& q, Tensor& mask, Tensor& row) {
        Rng fr(cfg.seed ^ 0xF00DULL);
        mask = pipe.freeze_mask_main(q, fr);
        if (circulant) row = pipe.freeze_mask_row(q, fr);
    };
    freeze(p, res.initial_mask, res.initial_row_mask);

    if (cfg.scale > 0.0) {
        res.scale = cfg.scale;
    } else {
        Rng scale_rng(cfg.seed ^ 0x5CA1EULL);
        res.scale = pipe.find_scale(p, scale_rng);
    }

    AdamState adam;
    adam.lr = cfg.lr;
    adam.beta1 = cfg.beta1;
    adam.beta2 = cfg.beta2;
    adam.eps = cfg.adam_eps;

    auto eval_to_history = [&](int epoch, const Params& q) {
        Tensor mask, row;
        freeze(q, mask, row);
        Rng er(cfg.seed ^ 0xE7A1ULL);
        EvalMetrics m = pipe.evaluate(q, mask, circulant ? &row : nullptr,
                                      pipe.test_set(), er, res.scale,
                                      cfg.eval_iterations);
        res.history.push_back({epoch, "test", "nmse_db", m.nmse, cfg.seed});
        res.history.push_back({epoch, "test", "nmae_db", m.nmae, cfg.seed});
        if (cfg.experiment == ExperimentKind::GroupTesting) {
            res.history.push_back({epoch, "test", "false_pos", m.false_positives, cfg.seed});
            res.history.push_back({epoch, "test", "false_neg", m.false_negatives, cfg.seed});
        }
    };
    eval_to_history(0, p);

    std::size_t batches = std::max<std::size_t>(1, cfg.train_samples / cfg.batch_size);
    Rng data_rng = Rng(cfg.seed).split(1);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (std::size_t bi = 0; bi < batches; ++bi) {
            Tensor X = pipe.sample_signals(cfg.batch_size, data_rng);
            Tape tape;
            Pipeline::Built b = pipe.build(tape, p, nullptr, nullptr, X, data_rng,
                                           res.scale);
            epoch_loss += tape.value(b.loss)[0];
            tape.backward(b.loss);

            std::vector<Tensor*> params{&p.phi};
            std::vector<Tensor> grad_store;
            grad_store.reserve(4);
            grad_store.push_back(tape.grad(b.phi));
            if (circulant) {
                params.push_back(&p.phi_row);
                grad_store.push_back(tape.grad(b.phi_row));
            }
            if (cfg.solver_has_params()) {
                Tensor gg({p.gamma.size()}), gr({p.rho.size()});
                for (std::size_t t = 0; t < b.gamma.size(); ++t) {
                    gg[t] = tape.grad(b.gamma[t])[0];
                    gr[t] = tape.grad(b.rho[t])[0];
                }
                params.push_back(&p.gamma);
                params.push_back(&p.rho);
                grad_store.push_back(std::move(gg));
                grad_store.push_back(std::move(gr));
            }
            std::vector<const Tensor*> grads;
            for (const auto& g : grad_store) grads.push_back(&g);
            adam_step(adam, params, grads);
        }
        res.history.push_back({epoch, "train", "loss",
                               epoch_loss / static_cast<double>(batches), cfg.seed});
        eval_to_history(epoch, p);
    }

    freeze(p, res.frozen_mask, res.frozen_row_mask);
    res.params = std::move(p);
    return res;
}

}  // namespace glodismo
