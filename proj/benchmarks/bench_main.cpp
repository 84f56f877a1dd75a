// Microbenchmarks for the hot paths of training: the measurement operators,
// mask sampling, and one unrolled solver forward pass.

#include <benchmark/benchmark.h>

#include <memory>

#include "glodismo/gumbel.hpp"
#include "glodismo/operators.hpp"
#include "glodismo/rng.hpp"
#include "glodismo/solvers.hpp"
#include "glodismo/tape.hpp"

using namespace glodismo;

namespace {

Tensor random_mask(std::size_t m, std::size_t n, std::size_t d, Rng& rng) {
    MaskLogits logits{init_logits({m, n}, rng), 1.0, 1.0};
    auto part = std::make_shared<const Partition>(Partition::rows(m, n, d));
    return freeze_mask(logits, part, rng);
}

Tensor random_batch(std::size_t n, std::size_t b, Rng& rng) {
    Tensor x({n, b});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.gaussian();
    return x;
}

void bm_dense_apply(benchmark::State& state) {
    std::size_t m = static_cast<std::size_t>(state.range(0));
    std::size_t n = 784, batch = 512;
    Rng rng(1);
    Tensor mask = random_mask(m, n, 32, rng);
    Tensor x = random_batch(n, batch, rng);
    for (auto _ : state) {
        Tape t;
        LinearMapNodes phi = make_dense(t.leaf(mask), 0.1);
        benchmark::DoNotOptimize(t.value(phi.apply(t, t.leaf(x))));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(m * n * batch));
}
BENCHMARK(bm_dense_apply)->Arg(50)->Arg(250);

void bm_circulant_apply(benchmark::State& state) {
    std::size_t n = static_cast<std::size_t>(state.range(0));
    std::size_t batch = 512;
    Rng rng(2);
    Tensor gen({n}), rows({n});
    for (std::size_t i = 0; i < 32; ++i) gen[rng.below(n)] = 1.0;
    for (std::size_t i = 0; i < n / 4; ++i) rows[rng.below(n)] = 1.0;
    rows[0] = 1.0;
    Tensor x = random_batch(n, batch, rng);
    for (auto _ : state) {
        Tape t;
        benchmark::DoNotOptimize(
            t.value(t.circulant_apply(t.leaf(gen), t.leaf(rows), t.leaf(x), 0.1)));
    }
}
BENCHMARK(bm_circulant_apply)->Arg(256)->Arg(784)->Arg(4096);

void bm_mask_sampling(benchmark::State& state) {
    std::size_t m = 250, n = 784, d = 7;
    Rng rng(3);
    MaskLogits logits{init_logits({m, n}, rng), 1.0, 1.0};
    auto part = std::make_shared<const Partition>(Partition::rows(m, n, d));
    for (auto _ : state) {
        Tape t;
        NodeId phi = t.leaf(logits.phi);
        benchmark::DoNotOptimize(t.value(sample_mask(t, phi, logits, part, rng)));
    }
}
BENCHMARK(bm_mask_sampling);

void bm_eiht_forward(benchmark::State& state) {
    std::size_t m = 40, n = 128, d = 4, batch = 512;
    Rng rng(4);
    MaskLogits logits{init_logits({m, n}, rng), 1.0, 1.0};
    auto part = std::make_shared<const Partition>(Partition::columns(m, n, d));
    Tensor mask = freeze_mask(logits, part, rng);
    Tensor x = random_batch(n, batch, rng);
    for (auto _ : state) {
        Tape t;
        NodeId mn = t.leaf(mask);
        LinearMapNodes phi = make_median_backed(mn, mask, 1.0);
        NodeId y = phi.apply(t, t.leaf(x));
        SolverConfig cfg;
        cfg.kind = SolverKind::EIht;
        cfg.iterations = static_cast<int>(state.range(0));
        cfg.sparsity = 8;
        IterateTrace trace = eiht_run(t, phi, y, cfg);
        benchmark::DoNotOptimize(t.value(trace.iterates.back()));
    }
}
BENCHMARK(bm_eiht_forward)->Arg(5)->Arg(20);

void bm_iht_train_step(benchmark::State& state) {
    // one full differentiable step: sample mask, measure, unroll, backward
    std::size_t m = 50, n = 784, d = 32, batch = 128;
    Rng rng(5);
    MaskLogits logits{init_logits({m, n}, rng), 1.0, 1.0};
    auto part = std::make_shared<const Partition>(Partition::rows(m, n, d));
    Tensor x = random_batch(n, batch, rng);
    for (auto _ : state) {
        Tape t;
        NodeId phi_leaf = t.leaf(logits.phi);
        NodeId mask = sample_mask(t, phi_leaf, logits, part, rng);
        LinearMapNodes phi = make_dense(mask, 0.1);
        NodeId xn = t.leaf(x);
        NodeId y = phi.apply(t, xn);
        SolverConfig cfg;
        cfg.kind = SolverKind::Iht;
        cfg.iterations = static_cast<int>(state.range(0));
        cfg.sparsity = 50;
        IterateTrace trace = iht_run(t, phi, nullptr, y, cfg);
        NodeId loss = t.sq_sum(t.sub(trace.iterates.back(), xn));
        t.backward(loss);
        benchmark::DoNotOptimize(t.grad(phi_leaf));
    }
}
BENCHMARK(bm_iht_train_step)->Arg(5)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
