#ifndef GLODISMO_TAPE_HPP
#define GLODISMO_TAPE_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "glodismo/partition.hpp"
#include "glodismo/tensor.hpp"

namespace glodismo {

using NodeId = std::int32_t;
using IndexGroups = std::vector<std::vector<std::uint32_t>>;

/// Reverse-mode differentiation record over a fixed operation set.
/// Define-by-run: every op computes its forward value immediately and
/// appends one entry; backward() replays the entries once in reverse.
/// A Tape is confined to one thread; independent Tapes may run concurrently.
class Tape {
public:
    NodeId leaf(Tensor value);

    const Tensor& value(NodeId id) const { return values_[id]; }
    std::size_t num_nodes() const { return values_.size(); }

    // --- linear algebra ---
    NodeId matmul(NodeId a, NodeId b);
    NodeId transpose(NodeId a);

    // --- elementwise / scalar ---
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId add_const(NodeId a, const Tensor& c);
    NodeId scale(NodeId a, double s);
    NodeId mul_scalar(NodeId a, NodeId s);  // s is a scalar node
    NodeId exp(NodeId a);
    NodeId relu_nonneg(NodeId a);
    NodeId clamp_abs1(NodeId a);  // projection onto the l-inf unit ball

    // --- thresholding / selection ---
    NodeId soft_threshold(NodeId v, NodeId lambda);  // lambda scalar node >= 0
    NodeId hard_threshold(NodeId v, std::size_t s);  // top-s magnitudes per column
    NodeId softmax_tau(NodeId v, double tau);        // 1-D
    NodeId median_select(NodeId y, std::shared_ptr<const IndexGroups> groups);

    // --- reductions ---
    NodeId abs_sum(NodeId v);
    NodeId sq_sum(NodeId v);
    NodeId sum(NodeId v);

    /// Straight-through Gumbel top-K over a partition. Forward is the 0/1
    /// indicator of the top-d_i noisy logits per subset (ties: lowest flat
    /// index); backward is the softmax-with-temperature Jacobian. With
    /// soft_forward the forward value is the softmax surrogate itself,
    /// which makes the whole downstream graph differentiable end to end
    /// (used by gradient checks).
    NodeId topk_straight_through(NodeId logits, std::shared_ptr<const Partition> part,
                                 double tau, bool soft_forward = false);

    /// y = scale * P_rows (c (*) x) where (*) is circular convolution and
    /// P_rows gathers the rows flagged by row_mask (FFT-backed).
    NodeId circulant_apply(NodeId gen, NodeId row_mask, NodeId x, double s);
    /// Adjoint map of circulant_apply as a forward op (scatter + correlate).
    NodeId circulant_adjoint(NodeId gen, NodeId row_mask, NodeId r, double s);

    /// Per row of `centers` (m x h*w): reshape to h x w, dilate by the
    /// delta x delta all-ones kernel with zero padding, clip at 1.
    NodeId superpixel_expand(NodeId centers, std::size_t h, std::size_t w,
                             std::size_t delta);

    /// Per column of x (a flattened h x w image): vec(L * X * R^T).
    /// Backward applies the transposed sandwich. Used for wavelet
    /// analysis/synthesis and their adjoints.
    NodeId sandwich(NodeId x, std::shared_ptr<const Tensor> left,
                    std::shared_ptr<const Tensor> right);

    /// Accumulate adjoints from a scalar loss node.
    void backward(NodeId loss);

    /// Adjoint of a node after backward(); zero tensor if never reached.
    const Tensor& grad(NodeId id) const;

private:
    enum class Op : std::uint8_t {
        Leaf, MatMul, Transpose, Add, Sub, AddConst, Scale, MulScalar, Exp,
        Relu, ClampAbs1, SoftThreshold, HardThreshold, Softmax, MedianSelect,
        AbsSum, SqSum, Sum, TopKST, CirculantApply, CirculantAdjoint,
        SuperpixelExpand, Sandwich
    };

    struct Entry {
        Op op;
        std::array<NodeId, 3> in{-1, -1, -1};
        NodeId out = -1;
        double a = 0.0;                       // scalar parameter (scale, tau)
        std::size_t k = 0, k2 = 0, k3 = 0;    // count parameters
        std::vector<double> saved;            // forward values for backward
        std::vector<std::uint32_t> idx;       // saved index data
        std::shared_ptr<const Partition> part;
        std::shared_ptr<const IndexGroups> groups;
        std::shared_ptr<const Tensor> mat_l, mat_r;
    };

    NodeId push(Entry e, Tensor out_value);
    Tensor& grad_acc(NodeId id);
    void backward_entry(const Entry& e);

    std::vector<Tensor> values_;
    std::vector<Entry> entries_;
    std::vector<Tensor> grads_;
    Tensor zero_grad_;  // returned for untouched nodes
};

}  // namespace glodismo

#endif
