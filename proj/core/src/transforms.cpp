#include "glodismo/transforms.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace glodismo {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// 1-D single-level lifting steps; input length L even, output
// [approx(0..L/2-1); detail(L/2..L-1)].
void haar_forward(std::vector<double>& x) {
    std::size_t half = x.size() / 2;
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < half; ++k) {
        out[k] = (x[2 * k] + x[2 * k + 1]) / kSqrt2;
        out[half + k] = (x[2 * k] - x[2 * k + 1]) / kSqrt2;
    }
    x = std::move(out);
}

void haar_inverse(std::vector<double>& c) {
    std::size_t half = c.size() / 2;
    std::vector<double> out(c.size());
    for (std::size_t k = 0; k < half; ++k) {
        out[2 * k] = (c[k] + c[half + k]) / kSqrt2;
        out[2 * k + 1] = (c[k] - c[half + k]) / kSqrt2;
    }
    c = std::move(out);
}

// 5/3 lifting with whole-point symmetric reflection at the borders.
void bior22_forward(std::vector<double>& x) {
    std::size_t L = x.size(), half = L / 2;
    std::vector<double> a(half), d(half);
    auto at = [&](long i) {
        if (i >= static_cast<long>(L)) i = 2 * static_cast<long>(L) - 2 - i;
        return x[i];
    };
    for (std::size_t k = 0; k < half; ++k)
        d[k] = x[2 * k + 1] - 0.5 * (x[2 * k] + at(2 * static_cast<long>(k) + 2));
    for (std::size_t k = 0; k < half; ++k)
        a[k] = x[2 * k] + 0.25 * (d[k == 0 ? 0 : k - 1] + d[k]);
    for (std::size_t k = 0; k < half; ++k) {
        x[k] = a[k] * kSqrt2;
        x[half + k] = d[k] / kSqrt2;
    }
}

void bior22_inverse(std::vector<double>& c) {
    std::size_t L = c.size(), half = L / 2;
    std::vector<double> a(half), d(half), x(L);
    for (std::size_t k = 0; k < half; ++k) {
        a[k] = c[k] / kSqrt2;
        d[k] = c[half + k] * kSqrt2;
    }
    for (std::size_t k = 0; k < half; ++k)
        x[2 * k] = a[k] - 0.25 * (d[k == 0 ? 0 : k - 1] + d[k]);
    auto at = [&](long i) {
        if (i >= static_cast<long>(L)) i = 2 * static_cast<long>(L) - 2 - i;
        return x[i];
    };
    for (std::size_t k = 0; k < half; ++k)
        x[2 * k + 1] = d[k] + 0.5 * (x[2 * k] + at(2 * static_cast<long>(k) + 2));
    c = std::move(x);
}

using Lift = void (*)(std::vector<double>&);

// Materialize the linear map as an L x L matrix by pushing unit vectors.
Tensor materialize(Lift f, std::size_t L) {
    Tensor M({L, L});
    std::vector<double> e(L);
    for (std::size_t j = 0; j < L; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        f(e);
        for (std::size_t i = 0; i < L; ++i) M.at(i, j) = e[i];
    }
    return M;
}

Tensor transpose_of(const Tensor& M) {
    Tensor T({M.cols(), M.rows()});
    for (std::size_t i = 0; i < M.rows(); ++i)
        for (std::size_t j = 0; j < M.cols(); ++j) T.at(j, i) = M.at(i, j);
    return T;
}

// out = L * X * R^T for a flattened h x w image.
Tensor apply_sandwich(const Tensor& x, const Tensor& L, const Tensor& R,
                      std::size_t h, std::size_t w) {
    Tensor tmp({h, w});
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < h; ++k) acc += L.at(i, k) * x[k * w + j];
            tmp.at(i, j) = acc;
        }
    Tensor out({h * w});
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < w; ++k) acc += tmp.at(i, k) * R.at(j, k);
            out[i * w + j] = acc;
        }
    return out;
}

}  // namespace

TransformKind transform_kind_from_string(const std::string& s) {
    if (s == "identity") return TransformKind::Identity;
    if (s == "haar1") return TransformKind::Haar1;
    if (s == "bior2.2" || s == "bior22") return TransformKind::Bior22;
    throw std::invalid_argument("unknown transform kind: " + s);
}

Transform::Transform(TransformKind kind, std::size_t h, std::size_t w)
    : kind_(kind), h_(h), w_(w) {
    if (kind == TransformKind::Identity) return;
    if (h % 2 != 0 || w % 2 != 0)
        throw std::invalid_argument("Transform: wavelet kinds need even dimensions");
    Lift fwd = kind == TransformKind::Haar1 ? haar_forward : bior22_forward;
    Lift inv = kind == TransformKind::Haar1 ? haar_inverse : bior22_inverse;
    ah_ = std::make_shared<Tensor>(materialize(fwd, h));
    aw_ = h == w ? ah_ : std::make_shared<Tensor>(materialize(fwd, w));
    sh_ = std::make_shared<Tensor>(materialize(inv, h));
    sw_ = h == w ? sh_ : std::make_shared<Tensor>(materialize(inv, w));
    sht_ = std::make_shared<Tensor>(transpose_of(*sh_));
    swt_ = h == w ? sht_ : std::make_shared<Tensor>(transpose_of(*sw_));
}

Tensor Transform::analysis(const Tensor& image) const {
    if (image.size() != h_ * w_)
        throw std::invalid_argument("analysis: image size mismatch");
    if (kind_ == TransformKind::Identity) return image;
    return apply_sandwich(image, *ah_, *aw_, h_, w_);
}

Tensor Transform::synthesis(const Tensor& coeffs) const {
    if (coeffs.size() != h_ * w_)
        throw std::invalid_argument("synthesis: coefficient size mismatch");
    if (kind_ == TransformKind::Identity) return coeffs;
    return apply_sandwich(coeffs, *sh_, *sw_, h_, w_);
}

NodeId Transform::analysis_node(Tape& tape, NodeId x) const {
    if (kind_ == TransformKind::Identity) return x;
    return tape.sandwich(x, ah_, aw_);
}

NodeId Transform::synthesis_node(Tape& tape, NodeId x) const {
    if (kind_ == TransformKind::Identity) return x;
    return tape.sandwich(x, sh_, sw_);
}

NodeId Transform::synthesis_adjoint_node(Tape& tape, NodeId x) const {
    if (kind_ == TransformKind::Identity) return x;
    return tape.sandwich(x, sht_, swt_);
}

}  // namespace glodismo
