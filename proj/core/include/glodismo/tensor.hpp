#ifndef GLODISMO_TENSOR_HPP
#define GLODISMO_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace glodismo {

/// Dense row-major tensor of 64-bit floats. Rank 0 (scalar), 1 or 2.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)),
          v_(std::accumulate(shape_.begin(), shape_.end(), std::size_t{1},
                             std::multiplies<>()),
             0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> values)
        : shape_(std::move(shape)), v_(std::move(values)) {
        std::size_t want = std::accumulate(shape_.begin(), shape_.end(),
                                           std::size_t{1}, std::multiplies<>());
        if (want != v_.size())
            throw std::invalid_argument("Tensor: values length does not match shape");
    }

    static Tensor scalar(double v) { return Tensor({}, {v}); }
    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return v_.size(); }

    // 2-D accessors; rank-1 tensors are treated as column vectors.
    std::size_t rows() const { return shape_.empty() ? 1 : shape_[0]; }
    std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }

    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }

    double& at(std::size_t r, std::size_t c) { return v_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return v_[r * cols() + c]; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> v_;
};

}  // namespace glodismo

#endif
