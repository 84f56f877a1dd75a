#ifndef GLODISMO_TRAINING_HPP
#define GLODISMO_TRAINING_HPP

#include <memory>
#include <vector>

#include "glodismo/config.hpp"
#include "glodismo/data.hpp"
#include "glodismo/gumbel.hpp"
#include "glodismo/io.hpp"
#include "glodismo/operators.hpp"
#include "glodismo/rng.hpp"
#include "glodismo/solvers.hpp"
#include "glodismo/transforms.hpp"

namespace glodismo {

// ---------------------------------------------------------------- optimizer

struct AdamState {
    double lr = 0.0002, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step_count = 0;
    std::vector<Tensor> m, v;
};

/// Standard Adam with bias correction. Throws on non-finite gradients.
void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads);

// ---------------------------------------------------------------- noise

struct NoiseModel {
    NoiseFamily family = NoiseFamily::Gaussian;
    double snr_db = 40.0;
};

/// Additive noise scaled per column so that noise power matches the
/// column's signal power times 10^(-snr/10). Student-t(1) draws use the
/// same Gaussian-equivalent scale (its own variance is undefined).
void add_noise(Tensor& y, const NoiseModel& model, Rng& rng);

// ---------------------------------------------------------------- metrics

/// 10 log10(E||xhat - x||^2 / E||x||^2) over the batch; floored at -150 dB.
double nmse_db(const Tensor& x_true, const Tensor& x_hat);
/// Same with l1 norms.
double nmae_db(const Tensor& x_true, const Tensor& x_hat);

// ---------------------------------------------------------------- pipeline

/// Learnable state of one experiment: mask logits (plus circulant row
/// logits) and per-iteration solver scalars where applicable.
struct Params {
    Tensor phi;      // main logits over the partition grid
    Tensor phi_row;  // circulant row-selection logits (empty otherwise)
    Tensor gamma;    // per-iteration raw step sizes (lista kinds)
    Tensor rho;      // per-iteration raw log-thresholds (lista kinds)
};

struct LossSpec {
    bool l1 = false;            // squared l2 otherwise
    bool average_over_iterations = false;
};

struct EvalMetrics {
    double nmse = 0.0, nmae = 0.0;
    double false_positives = 0.0, false_negatives = 0.0;  // mean per sample
};

/// Everything needed to run one experiment family: partitions, transform,
/// data generation, graph building, frozen-mask evaluation.
class Pipeline {
public:
    explicit Pipeline(const ExperimentConfig& cfg);

    const ExperimentConfig& cfg() const { return cfg_; }
    std::shared_ptr<const Partition> phi_partition() const { return part_; }
    std::shared_ptr<const Partition> row_partition() const { return row_part_; }
    const Transform* transform() const { return psi_.get(); }
    LossSpec loss_spec() const { return loss_; }

    /// Fresh batch of signals (n x count). Synthetic tasks draw new
    /// samples; image tasks cycle deterministically through the corpus.
    Tensor sample_signals(std::size_t count, Rng& rng) const;
    /// The fixed held-out set.
    const Tensor& test_set() const { return test_set_; }

    Tensor freeze_mask_main(const Params& p, Rng& rng) const;
    Tensor freeze_mask_row(const Params& p, Rng& rng) const;

    struct Built {
        NodeId loss = -1;
        NodeId x = -1;  // the signal leaf (regression target)
        NodeId phi = -1, phi_row = -1;
        std::vector<NodeId> gamma, rho;
        NodeId xhat = -1;
        std::vector<NodeId> trace;
    };

    /// Lower one batch onto a tape: sample (or fix) masks, measure, add
    /// noise, run the unrolled solver, build the loss.
    /// fixed_mask == nullptr: masks are sampled from p's logits and the
    /// graph is differentiable w.r.t. phi (training path).
    Built build(Tape& tape, const Params& p, const Tensor* fixed_mask,
                const Tensor* fixed_row, const Tensor& X, Rng& noise_rng,
                double scale, bool soft_mask = false,
                int iterations_override = 0) const;

    /// Mini-batch loss of a fixed hard mask (baseline evaluation).
    double batch_loss(const Params& p, const Tensor& mask, const Tensor* row_mask,
                      const Tensor& X, Rng& noise_rng, double scale) const;

    /// Frozen-mask metrics on a signal batch.
    EvalMetrics evaluate(const Params& p, const Tensor& mask, const Tensor* row_mask,
                         const Tensor& X, Rng& noise_rng, double scale,
                         int iterations_override = 0) const;

    /// Grid-searched operator scale using the frozen initial mask.
    double find_scale(const Params& p, Rng& rng) const;

private:
    ExperimentConfig cfg_;
    std::shared_ptr<const Partition> part_, row_part_;
    std::unique_ptr<Transform> psi_;
    LossSpec loss_;
    SyntheticSpec synth_;
    Tensor train_images_;  // image experiments only
    Tensor test_set_;
};

/// Logits drawn from Gumbel(0,1) (rescaled by noise_scale) plus solver
/// scalars where the solver kind has them.
Params init_params(const Pipeline& pipe, Rng& rng);

struct TrainResult {
    Params params;
    Tensor frozen_mask;       // mask frozen from the trained logits
    Tensor frozen_row_mask;   // circulant only
    Tensor initial_mask;      // the random-but-fixed baseline mask
    Tensor initial_row_mask;
    double scale = 1.0;
    std::vector<MetricRow> history;
};

/// End-to-end training loop: per batch sample mask, measure, solve,
/// backpropagate, Adam-step; per epoch evaluate frozen-mask metrics on
/// the held-out set.
TrainResult train(const ExperimentConfig& cfg);

}  // namespace glodismo

#endif
