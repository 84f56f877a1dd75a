#ifndef GLODISMO_GUMBEL_HPP
#define GLODISMO_GUMBEL_HPP

#include "glodismo/partition.hpp"
#include "glodismo/rng.hpp"
#include "glodismo/tape.hpp"
#include "glodismo/tensor.hpp"

namespace glodismo {

/// Learnable logits parametrizing the mask distribution over a partition
/// grid, together with the sampling hyperparameters.
struct MaskLogits {
    Tensor phi;          // real matrix matching the partition grid
    double noise_scale = 1.0;
    double temperature = 1.0;
};

/// i.i.d. Gumbel(0,1) samples, -log(-log(u)).
Tensor gumbel_noise(const std::vector<std::size_t>& shape, Rng& rng);

/// Logits initialized with standard Gumbel draws, optionally rescaled
/// (the rescale is applied when solver parameters are co-trained).
Tensor init_logits(const std::vector<std::size_t>& shape, Rng& rng,
                   double rescale = 1.0);

/// Straight-through Gumbel top-d over a flat logits vector: forward is the
/// 0/1 top-d indicator, backward the softmax-with-temperature Jacobian.
NodeId straight_through_topk(Tape& tape, NodeId logits, std::size_t d, double tau);

/// Alg.-style mask sample: adds fresh scaled Gumbel noise to phi and applies
/// the straight-through top-K independently per partition subset. The
/// returned node participates in backward, so dL/dphi is defined.
/// `phi_node` must be a node holding m.phi (a leaf for training).
NodeId sample_mask(Tape& tape, NodeId phi_node, const MaskLogits& m,
                   std::shared_ptr<const Partition> p, Rng& rng,
                   bool soft_forward = false);

/// Same forward computation as sample_mask but detached from any tape;
/// used at test time (the mask is then reused bit-identically).
Tensor freeze_mask(const MaskLogits& m, std::shared_ptr<const Partition> p, Rng& rng);

/// Exact per-subset ones counts.
bool satisfies_partition(const Tensor& mask, const Partition& p);

}  // namespace glodismo

#endif
