#ifndef GLODISMO_OPERATORS_HPP
#define GLODISMO_OPERATORS_HPP

#include <functional>
#include <memory>
#include <vector>

#include "glodismo/tape.hpp"
#include "glodismo/tensor.hpp"

namespace glodismo {

/// A measurement operator lowered onto a tape: a forward map apply and the
/// companion backward map used inside unrolled iterations (the adjoint, or
/// the median operator for expander decoding).
struct LinearMapNodes {
    std::function<NodeId(Tape&, NodeId)> apply;  // signal -> measurements
    std::function<NodeId(Tape&, NodeId)> back;   // measurements -> signal
};

/// Dense binary operator: apply = scale * mask * x, back = scale * mask^T * r.
/// `mask` may be a sampled (differentiable) node or a constant leaf.
LinearMapNodes make_dense(NodeId mask, double scale);

/// Dense forward with the median operator as the backward map. Groups list,
/// per signal coordinate j, the measurement rows connected to j; they are
/// derived from the realized 0/1 mask values.
LinearMapNodes make_median_backed(NodeId mask, const Tensor& mask_value, double scale);

/// Row-masked circulant operator, FFT-backed in both directions.
LinearMapNodes make_circulant(NodeId gen, NodeId row_mask, double scale);

/// Super-pixel operator: centers dilated by a delta x delta ones kernel
/// (clipped at 1), then applied densely.
LinearMapNodes make_superpixel(NodeId centers, std::size_t h, std::size_t w,
                               std::size_t delta, double scale);

/// Rows with a one in column j, for each j (median operator structure).
std::shared_ptr<IndexGroups> column_groups(const Tensor& mask);

/// Grid-search for the operator scale: returns the grid point minimizing
/// the probe loss of the untrained solver; in image mode the winner is
/// multiplied by 0.9. Throws if no grid point produces a finite loss.
double grid_search_scale(const std::function<double(double)>& probe_loss,
                         const std::vector<double>& grid, bool image_mode);

/// Default grid: 16 log-spaced points in [1e-3, 1e1].
std::vector<double> default_scale_grid();

}  // namespace glodismo

#endif
