#include "glodismo/gumbel.hpp"

#include <cmath>

namespace glodismo {

Tensor gumbel_noise(const std::vector<std::size_t>& shape, Rng& rng) {
    Tensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.gumbel();
    return t;
}

Tensor init_logits(const std::vector<std::size_t>& shape, Rng& rng, double rescale) {
    Tensor t = gumbel_noise(shape, rng);
    if (rescale != 1.0)
        for (std::size_t i = 0; i < t.size(); ++i) t[i] *= rescale;
    return t;
}

NodeId straight_through_topk(Tape& tape, NodeId logits, std::size_t d, double tau) {
    std::size_t n = tape.value(logits).size();
    auto whole = std::make_shared<Partition>(Partition::whole(n, d));
    return tape.topk_straight_through(logits, whole, tau);
}

NodeId sample_mask(Tape& tape, NodeId phi_node, const MaskLogits& m,
                   std::shared_ptr<const Partition> p, Rng& rng, bool soft_forward) {
    Tensor noise = gumbel_noise(tape.value(phi_node).shape(), rng);
    if (m.noise_scale != 1.0)
        for (std::size_t i = 0; i < noise.size(); ++i) noise[i] *= m.noise_scale;
    NodeId noisy = tape.add_const(phi_node, noise);
    return tape.topk_straight_through(noisy, std::move(p), m.temperature, soft_forward);
}

Tensor freeze_mask(const MaskLogits& m, std::shared_ptr<const Partition> p, Rng& rng) {
    Tape tape;
    NodeId phi = tape.leaf(m.phi);
    NodeId mask = sample_mask(tape, phi, m, std::move(p), rng);
    return tape.value(mask);
}

bool satisfies_partition(const Tensor& mask, const Partition& p) {
    if (mask.size() != p.grid_size()) return false;
    for (std::size_t i = 0; i < p.num_subsets(); ++i) {
        std::size_t ones = 0;
        for (auto idx : p.subset(i)) {
            double v = mask[idx];
            if (v != 0.0 && v != 1.0) return false;
            if (v == 1.0) ++ones;
        }
        if (ones != p.keep(i)) return false;
    }
    return true;
}

}  // namespace glodismo
