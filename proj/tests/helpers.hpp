#ifndef TEST_HELPERS_HPP
#define TEST_HELPERS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "glodismo/rng.hpp"
#include "glodismo/tensor.hpp"

namespace testutil {

using glodismo::Rng;
using glodismo::Tensor;

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng,
                            double scale = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.gaussian();
    return t;
}

/// Central finite differences of a scalar-valued function at x.
inline Tensor fd_gradient(const std::function<double(const Tensor&)>& f,
                          const Tensor& x, double eps = 1e-6) {
    Tensor g(x.shape());
    Tensor p = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double keep = p[i];
        p[i] = keep + eps;
        double hi = f(p);
        p[i] = keep - eps;
        double lo = f(p);
        p[i] = keep;
        g[i] = (hi - lo) / (2.0 * eps);
    }
    return g;
}

/// Relative l2 error between a finite-difference and an analytic gradient.
inline double grad_rel_err(const Tensor& fd, const Tensor& an) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
        double d = fd[i] - an[i];
        num += d * d;
        den += an[i] * an[i];
    }
    return std::sqrt(num) / std::max(1.0, std::sqrt(den));
}

// ---------------------------------------------------------------- oracles
// Plain-loop references, deliberately free of Eigen/FFT/tape machinery.

/// Dense circulant times matrix: C[i][j] = c[(i - j) mod n], rows kept
/// where row_mask is one, scaled.
inline Tensor dense_circulant_apply(const Tensor& c, const Tensor& row_mask,
                                    const Tensor& x, double scale) {
    std::size_t n = c.size(), B = x.cols();
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
        if (row_mask[i] > 0.5) rows.push_back(i);
    Tensor y({rows.size(), B});
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::size_t i = rows[r];
        for (std::size_t b = 0; b < B; ++b) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                acc += c[(i + n - j) % n] * x.at(j, b);
            y.at(r, b) = scale * acc;
        }
    }
    return y;
}

/// Adjoint of dense_circulant_apply (scatter kept rows, multiply by C^T).
inline Tensor dense_circulant_adjoint(const Tensor& c, const Tensor& row_mask,
                                      const Tensor& r, double scale) {
    std::size_t n = c.size(), B = r.cols();
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
        if (row_mask[i] > 0.5) rows.push_back(i);
    Tensor out({n, B});
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t b = 0; b < B; ++b) {
            double acc = 0.0;
            for (std::size_t k = 0; k < rows.size(); ++k) {
                std::size_t i = rows[k];
                acc += c[(i + n - j) % n] * r.at(k, b);
            }
            out.at(j, b) = scale * acc;
        }
    return out;
}

/// Lower-middle order statistic via full sort.
inline double median_oracle(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
}

/// Per-column top-s magnitude hard threshold, ties resolved toward the
/// lowest row index (stable sort on (-|v|, index)).
inline Tensor hard_threshold_oracle(const Tensor& v, std::size_t s) {
    std::size_t n = v.rows(), B = v.cols();
    Tensor out({n, B});
    std::vector<std::size_t> order(n);
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
            return std::fabs(v.at(a, b)) > std::fabs(v.at(c, b));
        });
        for (std::size_t k = 0; k < std::min(s, n); ++k)
            out.at(order[k], b) = v.at(order[k], b);
    }
    return out;
}

/// Plain-loop IHT in the signal domain: x_{t+1} = H_s(x_t + g A^T(y - A x_t))
/// with A = scale * mask. One column per signal.
inline std::vector<Tensor> reference_iht(const Tensor& mask, double scale,
                                         const Tensor& y, std::size_t s,
                                         double gamma, int T) {
    std::size_t m = mask.rows(), n = mask.cols(), B = y.cols();
    std::vector<Tensor> iterates;
    Tensor x({n, B});
    for (int t = 0; t < T; ++t) {
        Tensor pre({n, B});
        for (std::size_t b = 0; b < B; ++b) {
            std::vector<double> r(m);
            for (std::size_t i = 0; i < m; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    acc += scale * mask.at(i, j) * x.at(j, b);
                r[i] = y.at(i, b) - acc;
            }
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t i = 0; i < m; ++i)
                    acc += scale * mask.at(i, j) * r[i];
                pre.at(j, b) = x.at(j, b) + gamma * acc;
            }
        }
        x = hard_threshold_oracle(pre, s);
        iterates.push_back(x);
    }
    return iterates;
}

/// Random binary mask with exactly d ones per row (plain sampling, no
/// Gumbel machinery).
inline Tensor random_row_mask(std::size_t m, std::size_t n, std::size_t d, Rng& rng) {
    Tensor mask({m, n});
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) idx[j] = j;
        for (std::size_t k = 0; k < d; ++k) {
            std::size_t pick = k + rng.below(n - k);
            std::swap(idx[k], idx[pick]);
            mask.at(i, idx[k]) = 1.0;
        }
    }
    return mask;
}

}  // namespace testutil

#endif
