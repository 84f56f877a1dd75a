#include <doctest.h>

#include <cmath>

#include "glodismo/solvers.hpp"
#include "helpers.hpp"

using namespace glodismo;
using namespace testutil;

namespace {

Tensor matvec(const Tensor& mask, double scale, const Tensor& x) {
    Tensor y({mask.rows(), x.cols()});
    for (std::size_t i = 0; i < mask.rows(); ++i)
        for (std::size_t b = 0; b < x.cols(); ++b) {
            double acc = 0.0;
            for (std::size_t j = 0; j < mask.cols(); ++j)
                acc += scale * mask.at(i, j) * x.at(j, b);
            y.at(i, b) = acc;
        }
    return y;
}

Tensor sparse_batch(std::size_t n, std::size_t s, std::size_t B, Rng& rng) {
    Tensor x({n, B});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t k = 0; k < s; ++k)
            x.at(rng.below(n), b) = rng.gaussian() + (rng.below(2) ? 2.0 : -2.0);
    return x;
}

}  // namespace

TEST_CASE("solvers: IHT iterates match the plain-loop reference") {
    Rng rng(51);
    for (int inst = 0; inst < 50; ++inst) {
        std::size_t m = 12, n = 20, s = 3, B = 2;
        Tensor mask = random_row_mask(m, n, 4, rng);
        double scale = 0.3, gamma = 0.9;
        Tensor x = sparse_batch(n, s, B, rng);
        Tensor y = matvec(mask, scale, x);  // noiseless

        Tape t;
        LinearMapNodes phi = make_dense(t.leaf(mask), scale);
        SolverConfig cfg;
        cfg.kind = SolverKind::Iht;
        cfg.iterations = 6;
        cfg.sparsity = static_cast<int>(s);
        cfg.gamma = gamma;
        IterateTrace trace = iht_run(t, phi, nullptr, t.leaf(y), cfg);

        auto want = reference_iht(mask, scale, y, s, gamma, 6);
        REQUIRE(trace.iterates.size() == want.size());
        for (std::size_t k = 0; k < want.size(); ++k) {
            const Tensor& got = t.value(trace.iterates[k]);
            for (std::size_t i = 0; i < got.size(); ++i) {
                // identical support selection, values to fp-accumulation order
                CHECK((got[i] == 0.0) == (want[k][i] == 0.0));
                CHECK(std::fabs(got[i] - want[k][i]) <= 1e-10);
            }
        }
    }
}

TEST_CASE("solvers: lista with zero thresholds and unit steps mimics a gradient pass") {
    Rng rng(52);
    std::size_t m = 8, n = 12, B = 2;
    Tensor mask = random_row_mask(m, n, 3, rng);
    Tensor x = sparse_batch(n, 2, B, rng);
    Tensor y = matvec(mask, 0.4, x);
    Tape t;
    LinearMapNodes phi = make_dense(t.leaf(mask), 0.4);
    SolverConfig cfg;
    cfg.kind = SolverKind::ListaScalar;
    cfg.iterations = 1;
    ListaParamNodes p;
    p.gamma.push_back(t.leaf(Tensor::scalar(1.0)));
    p.rho.push_back(t.leaf(Tensor::scalar(-40.0)));  // threshold exp(-40) ~ 0
    IterateTrace trace = lista_scalar_run(t, phi, nullptr, t.leaf(y), cfg, p);
    const Tensor& got = t.value(trace.iterates[0]);
    // first iterate = soft_0(Phi^T y) = Phi^T y
    Tensor maskT({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) maskT.at(j, i) = mask.at(i, j);
    Tensor want = matvec(maskT, 0.4, y);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
}

TEST_CASE("solvers: expander IHT recovers sparse signals through the median map") {
    Rng rng(53);
    // sizes chosen so random left-d-regular graphs expand well; at small m
    // column supports collide and the median copies amplitudes onto wrong
    // coordinates, which is a property of the graph, not of the solver
    std::size_t m = 96, n = 128, d = 9, s = 3;
    int recovered = 0, trials = 10;
    for (int inst = 0; inst < trials; ++inst) {
        // left-d-regular: d ones per column
        Tensor maskT = random_row_mask(n, m, d, rng);
        Tensor mask({m, n});
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < m; ++i) mask.at(i, j) = maskT.at(j, i);
        Tensor x = sparse_batch(n, s, 1, rng);
        Tensor y = matvec(mask, 1.0, x);
        Tape t;
        NodeId mn = t.leaf(mask);
        LinearMapNodes phi = make_median_backed(mn, mask, 1.0);
        SolverConfig cfg;
        cfg.kind = SolverKind::EIht;
        cfg.iterations = 60;
        cfg.sparsity = static_cast<int>(s);
        IterateTrace trace = eiht_run(t, phi, t.leaf(y), cfg);
        const Tensor& xh = t.value(trace.iterates.back());
        double err = 0.0, ref = 0.0;
        for (std::size_t i = 0; i < xh.size(); ++i) {
            err += (xh[i] - x[i]) * (xh[i] - x[i]);
            ref += x[i] * x[i];
        }
        if (err <= 1e-12 * std::max(ref, 1.0)) ++recovered;
    }
    // random expanders at these sizes decode most instances exactly
    CHECK(recovered >= trials * 8 / 10);
}

TEST_CASE("solvers: nnlad iterates stay nonnegative and fit noiseless data") {
    Rng rng(54);
    std::size_t m = 12, n = 24, d = 3, s = 2;
    Tensor mask = random_row_mask(m, n, d, rng);
    Tensor x({n, 1});
    x.at(3, 0) = 0.7;
    x.at(17, 0) = 0.2;
    Tensor y = matvec(mask, 1.0, x);

    Tape t;
    LinearMapNodes phi = make_dense(t.leaf(mask), 1.0);
    SolverConfig cfg;
    cfg.kind = SolverKind::Nnlad;
    cfg.iterations = 1500;  // the primal-dual scheme converges at O(1/T)
    cfg.sigma = 0.1;
    cfg.tau_nnlad = 0.6;
    double norm = operator_norm_estimate(mask, 1.0);
    IterateTrace trace = nnlad_run(t, phi, t.leaf(y), cfg, norm);
    for (NodeId it : trace.iterates) {
        const Tensor& v = t.value(it);
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] >= 0.0);
    }
    const Tensor& xh = t.value(trace.iterates.back());
    Tensor yh = matvec(mask, 1.0, xh);
    double obj = 0.0, ynorm = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        obj += std::fabs(yh[i] - y[i]);
        ynorm += std::fabs(y[i]);
    }
    CHECK(obj <= 1e-3 * ynorm);
}

TEST_CASE("solvers: operator norm estimate matches a long power iteration") {
    Rng rng(55);
    Tensor mask = random_row_mask(9, 15, 4, rng);
    double est = operator_norm_estimate(mask, 0.5, 200);
    // reference: power iteration on M^T M with plain loops, many rounds
    std::vector<double> v(15, 1.0);
    double lam = 0.0;
    for (int it = 0; it < 500; ++it) {
        std::vector<double> u(9, 0.0), w(15, 0.0);
        for (std::size_t i = 0; i < 9; ++i)
            for (std::size_t j = 0; j < 15; ++j) u[i] += mask.at(i, j) * v[j];
        for (std::size_t j = 0; j < 15; ++j)
            for (std::size_t i = 0; i < 9; ++i) w[j] += mask.at(i, j) * u[i];
        lam = 0.0;
        for (double z : w) lam += z * z;
        lam = std::sqrt(lam);
        for (std::size_t j = 0; j < 15; ++j) v[j] = w[j] / lam;
    }
    CHECK(est == doctest::Approx(0.5 * std::sqrt(lam)).epsilon(1e-6));
}

TEST_CASE("solvers: non-finite iterates raise instead of propagating") {
    Rng rng(56);
    Tensor mask = random_row_mask(6, 10, 5, rng);
    Tensor x = sparse_batch(10, 2, 1, rng);
    Tensor y = matvec(mask, 1e8, x);  // absurd scale: iterates blow up
    Tape t;
    LinearMapNodes phi = make_dense(t.leaf(mask), 1e8);
    SolverConfig cfg;
    cfg.kind = SolverKind::Iht;
    cfg.iterations = 40;
    cfg.sparsity = 2;
    CHECK_THROWS_AS(iht_run(t, phi, nullptr, t.leaf(y), cfg), std::runtime_error);
}
