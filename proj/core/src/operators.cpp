#include "glodismo/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace glodismo {

LinearMapNodes make_dense(NodeId mask, double scale) {
    LinearMapNodes op;
    op.apply = [mask, scale](Tape& t, NodeId x) {
        return t.scale(t.matmul(mask, x), scale);
    };
    op.back = [mask, scale](Tape& t, NodeId r) {
        return t.scale(t.matmul(t.transpose(mask), r), scale);
    };
    return op;
}

LinearMapNodes make_median_backed(NodeId mask, const Tensor& mask_value, double scale) {
    LinearMapNodes op;
    op.apply = [mask, scale](Tape& t, NodeId x) {
        return t.scale(t.matmul(mask, x), scale);
    };
    auto groups = column_groups(mask_value);
    op.back = [groups](Tape& t, NodeId r) { return t.median_select(r, groups); };
    return op;
}

LinearMapNodes make_circulant(NodeId gen, NodeId row_mask, double scale) {
    LinearMapNodes op;
    op.apply = [gen, row_mask, scale](Tape& t, NodeId x) {
        return t.circulant_apply(gen, row_mask, x, scale);
    };
    op.back = [gen, row_mask, scale](Tape& t, NodeId r) {
        return t.circulant_adjoint(gen, row_mask, r, scale);
    };
    return op;
}

LinearMapNodes make_superpixel(NodeId centers, std::size_t h, std::size_t w,
                               std::size_t delta, double scale) {
    LinearMapNodes op;
    // the expanded matrix node is shared by apply and back within one tape;
    // memoize per tape via a small capture
    auto cache = std::make_shared<std::pair<Tape*, NodeId>>(nullptr, -1);
    auto expanded = [centers, h, w, delta, cache](Tape& t) {
        if (cache->first != &t) {
            cache->first = &t;
            cache->second = t.superpixel_expand(centers, h, w, delta);
        }
        return cache->second;
    };
    op.apply = [expanded, scale](Tape& t, NodeId x) {
        return t.scale(t.matmul(expanded(t), x), scale);
    };
    op.back = [expanded, scale](Tape& t, NodeId r) {
        return t.scale(t.matmul(t.transpose(expanded(t)), r), scale);
    };
    return op;
}

std::shared_ptr<IndexGroups> column_groups(const Tensor& mask) {
    std::size_t m = mask.rows(), n = mask.cols();
    auto groups = std::make_shared<IndexGroups>(n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (mask.at(i, j) > 0.5)
                (*groups)[j].push_back(static_cast<std::uint32_t>(i));
    return groups;
}

double grid_search_scale(const std::function<double(double)>& probe_loss,
                         const std::vector<double>& grid, bool image_mode) {
    if (grid.empty()) throw std::invalid_argument("grid_search_scale: empty grid");
    double best = 0.0, best_loss = INFINITY;
    for (double s : grid) {
        double loss = probe_loss(s);
        if (std::isfinite(loss) && loss < best_loss) {
            best_loss = loss;
            best = s;
        }
    }
    if (!std::isfinite(best_loss))
        throw std::runtime_error("grid_search_scale: no grid point gave a finite loss");
    return image_mode ? best * 0.9 : best;
}

std::vector<double> default_scale_grid() {
    std::vector<double> g;
    double lo = std::log10(1e-3), hi = std::log10(1e1);
    for (int i = 0; i < 16; ++i)
        g.push_back(std::pow(10.0, lo + (hi - lo) * i / 15.0));
    return g;
}

}  // namespace glodismo
