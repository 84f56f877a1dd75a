#ifndef GLODISMO_BASELINES_HPP
#define GLODISMO_BASELINES_HPP

#include <vector>

#include "glodismo/config.hpp"
#include "glodismo/io.hpp"
#include "glodismo/partition.hpp"
#include "glodismo/rng.hpp"
#include "glodismo/tensor.hpp"
#include "glodismo/training.hpp"

namespace glodismo {

/// Smallest constraint-preserving move: in one random subset of the
/// partition, swap a random one with a random zero. Throws if no subset
/// admits a swap (all-ones or all-zeros everywhere).
Tensor propose_neighbor(const Tensor& mask, const Partition& p, Rng& rng);

/// Greedy: accept strict decreases only. SimAn (metropolis): additionally
/// accept increases with probability exp(-(prop - cur)/temp).
/// SimAnRule::Paper keeps the literal published comparison, which inverts
/// that probability; it is kept for reproduction purposes.
bool baseline_accept(BaselineKind kind, SimAnRule rule, double cur_loss,
                     double prop_loss, double temp, Rng& rng);

struct BaselineResult {
    Tensor mask;                         // best-effort final mask
    Tensor row_mask;                     // circulant runs only
    double scale = 1.0;
    double final_loss = 0.0;
    double first_epoch_acceptance = 0.0; // accepted / proposed in epoch 1
    long accepted = 0, proposed = 0;
    std::vector<MetricRow> history;
};

/// Discrete-optimization baseline over hard masks: start from the frozen
/// initial mask (same seed convention as training), and per step compare
/// the current and proposed masks on the same fresh mini-batch.
BaselineResult run_baseline(const ExperimentConfig& cfg);

}  // namespace glodismo

#endif
