#ifndef GLODISMO_TRANSFORMS_HPP
#define GLODISMO_TRANSFORMS_HPP

#include <memory>
#include <string>

#include "glodismo/tape.hpp"
#include "glodismo/tensor.hpp"

namespace glodismo {

enum class TransformKind { Identity, Haar1, Bior22 };

TransformKind transform_kind_from_string(const std::string& s);

/// Single-level separable 2-D sparsifying transform with exact perfect
/// reconstruction. The 1-D analysis/synthesis maps are materialized as
/// small matrices (built from lifting steps), so adjoints are transposes
/// and the tape can run the maps in any direction.
class Transform {
public:
    Transform(TransformKind kind, std::size_t h, std::size_t w);

    TransformKind kind() const { return kind_; }
    std::size_t height() const { return h_; }
    std::size_t width() const { return w_; }

    // value-level maps (column vector of length h*w)
    Tensor analysis(const Tensor& image) const;
    Tensor synthesis(const Tensor& coeffs) const;

    // tape-level maps; each column of x is one flattened image
    NodeId analysis_node(Tape& tape, NodeId x) const;
    NodeId synthesis_node(Tape& tape, NodeId x) const;
    /// The adjoint of synthesis as a forward op; this is the "transpose"
    /// half of (Phi Psi*)^T in coefficient-domain iterations.
    NodeId synthesis_adjoint_node(Tape& tape, NodeId x) const;

private:
    TransformKind kind_;
    std::size_t h_, w_;
    // 1-D maps: analysis rows/cols, synthesis rows/cols, and transposes
    std::shared_ptr<const Tensor> ah_, aw_, sh_, sw_, sht_, swt_;
};

}  // namespace glodismo

#endif
