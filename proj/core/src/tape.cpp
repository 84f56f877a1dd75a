#include "glodismo/tape.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include "glodismo/fft.hpp"

namespace glodismo {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const EMat>;
using MMap = Eigen::Map<EMat>;

CMap as_mat(const Tensor& t) { return CMap(t.data(), t.rows(), t.cols()); }
MMap as_mat(Tensor& t) { return MMap(t.data(), t.rows(), t.cols()); }

// Indices of the top-k magnitudes (|.| descending, ties to lowest index).
void topk_abs_indices(const double* v, std::size_t n, std::size_t k,
                      std::vector<std::uint32_t>& out) {
    out.resize(n);
    std::iota(out.begin(), out.end(), 0u);
    std::partial_sort(out.begin(), out.begin() + k, out.end(),
                      [v](std::uint32_t a, std::uint32_t b) {
                          double fa = std::fabs(v[a]), fb = std::fabs(v[b]);
                          return fa > fb || (fa == fb && a < b);
                      });
    out.resize(k);
}

// Indices of the top-k values (descending, ties to lowest index).
void topk_indices(const double* v, const std::uint32_t* pos, std::size_t n,
                  std::size_t k, std::vector<std::uint32_t>& out) {
    out.resize(n);
    std::iota(out.begin(), out.end(), 0u);
    std::partial_sort(out.begin(), out.begin() + k, out.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          double fa = v[a], fb = v[b];
                          return fa > fb || (fa == fb && pos[a] < pos[b]);
                      });
    out.resize(k);
}

std::size_t half_spec(std::size_t n) { return n / 2 + 1; }

void spectrum(std::size_t n, const double* x, std::vector<std::complex<double>>& out) {
    out.resize(half_spec(n));
    fft_r2c(n, x, out.data());
}

}  // namespace

NodeId Tape::push(Entry e, Tensor out_value) {
    e.out = static_cast<NodeId>(values_.size());
    values_.push_back(std::move(out_value));
    entries_.push_back(std::move(e));
    return entries_.back().out;
}

NodeId Tape::leaf(Tensor value) {
    Entry e;
    e.op = Op::Leaf;
    return push(std::move(e), std::move(value));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    const Tensor& A = values_[a];
    const Tensor& B = values_[b];
    if (A.rank() != 2 || A.cols() != B.rows())
        throw std::invalid_argument("matmul: inner dimensions do not match");
    Tensor out = B.rank() == 1 ? Tensor({A.rows()}) : Tensor({A.rows(), B.cols()});
    as_mat(out) = as_mat(A) * as_mat(B);
    Entry e;
    e.op = Op::MatMul;
    e.in = {a, b, -1};
    return push(std::move(e), std::move(out));
}

NodeId Tape::transpose(NodeId a) {
    const Tensor& A = values_[a];
    if (A.rank() != 2) throw std::invalid_argument("transpose: rank-2 input required");
    Tensor out({A.cols(), A.rows()});
    as_mat(out) = as_mat(A).transpose();
    Entry e;
    e.op = Op::Transpose;
    e.in = {a, -1, -1};
    return push(std::move(e), std::move(out));
}

NodeId Tape::add(NodeId a, NodeId b) {
    const Tensor& A = values_[a];
    const Tensor& B = values_[b];
    if (!A.same_shape(B)) throw std::invalid_argument("add: shape mismatch");
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
    Entry e;
    e.op = Op::Add;
    e.in = {a, b, -1};
    return push(std::move(e), std::move(out));
}

NodeId Tape::sub(NodeId a, NodeId b) {
    const Tensor& A = values_[a];
    const Tensor& B = values_[b];
    if (!A.same_shape(B)) throw std::invalid_argument("sub: shape mismatch");
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= B[i];
    Entry e;
    e.op = Op::Sub;
    e.in = {a, b, -1};
    return push(std::move(e), std::move(out));
}

NodeId Tape::add_const(NodeId a, const Tensor& c) {
    const Tensor& A = values_[a];
    if (!A.same_shape(c)) throw std::invalid_argument("add_const: shape mismatch");
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i];
    Entry e;
    e.op = Op::AddConst;
    e.in = {a, -1, -1};
    return push(std::move(e), std::move(out));
}

NodeId Tape::scale(NodeId a, double s) {
    Tensor out = values_[a];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
    Entry e;
    e.op = Op::Scale;
    e.in = {a, -1, -1};
    e.a = s;
    return push(std::move(e), std::move(out));
}

NodeId Tape::mul_scalar(NodeId a, NodeId s) {
    if (values_[s].size() != 1)
        throw std::invalid_argument("mul_scalar: scalar node required");
    double sv = values_[s][0];
    Tensor out = values_[a];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= sv;
    Entry e;
    e.op = Op::MulScalar;
    e.in = {a, s, -1};
    return push(std::move(e), std::move(out));
}

NodeId Tape::exp(NodeId a) {
    Tensor out = values_[a];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
    Entry e;
    e.op = Op::Exp;
    e.in = {a, -1, -1};
    return push(std::move(e), std::move(out));
}

NodeId Tape::relu_nonneg(NodeId a) {
    Tensor out = values_[a];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], 0.0);
    Entry e;
    e.op = Op::Relu;
    e.in = {a, -1, -1};
    return push(std::move(e), std::move(out));
}

NodeId Tape::clamp_abs1(NodeId a) {
    Tensor out = values_[a];
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(out[i], -1.0, 1.0);
    Entry e;
    e.op = Op::ClampAbs1;
    e.in = {a, -1, -1};
    return push(std::move(e), std::move(out));
}

NodeId Tape::soft_threshold(NodeId v, NodeId lambda) {
    if (values_[lambda].size() != 1)
        throw std::invalid_argument("soft_threshold: scalar threshold required");
    double lam = values_[lambda][0];
    if (lam < 0.0) throw std::invalid_argument("soft_threshold: negative threshold");
    Tensor out = values_[v];
    for (std::size_t i = 0; i < out.size(); ++i) {
        double x = out[i];
        double mag = std::fabs(x) - lam;
        out[i] = mag > 0.0 ? (x > 0.0 ? mag : -mag) : 0.0;
    }
    Entry e;
    e.op = Op::SoftThreshold;
    e.in = {v, lambda, -1};
    return push(std::move(e), std::move(out));
}

NodeId Tape::hard_threshold(NodeId v, std::size_t s) {
    const Tensor& V = values_[v];
    std::size_t n = V.rows(), B = V.cols();
    if (s < 1 || s > n) throw std::invalid_argument("hard_threshold: s out of range");
    Tensor out(V.shape());
    Entry e;
    e.op = Op::HardThreshold;
    e.in = {v, -1, -1};
    e.k = s;
    std::vector<double> col(n);
    std::vector<std::uint32_t> kept;
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t i = 0; i < n; ++i) col[i] = V[i * B + b];
        topk_abs_indices(col.data(), n, s, kept);
        for (auto i : kept) {
            out[i * B + b] = col[i];
            e.idx.push_back(static_cast<std::uint32_t>(i * B + b));
        }
    }
    return push(std::move(e), std::move(out));
}

NodeId Tape::softmax_tau(NodeId v, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("softmax_tau: temperature must be positive");
    const Tensor& V = values_[v];
    Tensor out(V.shape());
    double mx = -INFINITY;
    for (std::size_t i = 0; i < V.size(); ++i) mx = std::max(mx, V[i] / tau);
    double z = 0.0;
    for (std::size_t i = 0; i < V.size(); ++i) {
        out[i] = std::exp(V[i] / tau - mx);
        z += out[i];
    }
    for (std::size_t i = 0; i < V.size(); ++i) out[i] /= z;
    Entry e;
    e.op = Op::Softmax;
    e.in = {v, -1, -1};
    e.a = tau;
    e.saved.assign(out.data(), out.data() + out.size());
    return push(std::move(e), std::move(out));
}

NodeId Tape::median_select(NodeId y, std::shared_ptr<const IndexGroups> groups) {
    const Tensor& Y = values_[y];
    std::size_t B = Y.cols();
    std::size_t n = groups->size();
    for (const auto& g : *groups)
        if (g.empty()) throw std::invalid_argument("median_select: empty group");
    Tensor out = B == 1 && Y.rank() == 1 ? Tensor({n}) : Tensor({n, B});
    Entry e;
    e.op = Op::MedianSelect;
    e.in = {y, -1, -1};
    e.groups = groups;
    e.idx.resize(n * B);
    std::vector<std::pair<double, std::uint32_t>> vals;
    for (std::size_t j = 0; j < n; ++j) {
        const auto& g = (*groups)[j];
        for (std::size_t b = 0; b < B; ++b) {
            vals.clear();
            for (auto i : g) vals.emplace_back(Y[i * B + b], i);
            // Lower middle order statistic; equal values resolve to the
            // lowest source index.
            std::sort(vals.begin(), vals.end());
            auto [val, src] = vals[(vals.size() - 1) / 2];
            out[j * B + b] = val;
            e.idx[j * B + b] = src;
        }
    }
    return push(std::move(e), std::move(out));
}

NodeId Tape::abs_sum(NodeId v) {
    const Tensor& V = values_[v];
    double s = 0.0;
    for (std::size_t i = 0; i < V.size(); ++i) s += std::fabs(V[i]);
    Entry e;
    e.op = Op::AbsSum;
    e.in = {v, -1, -1};
    return push(std::move(e), Tensor::scalar(s));
}

NodeId Tape::sq_sum(NodeId v) {
    const Tensor& V = values_[v];
    double s = 0.0;
    for (std::size_t i = 0; i < V.size(); ++i) s += V[i] * V[i];
    Entry e;
    e.op = Op::SqSum;
    e.in = {v, -1, -1};
    return push(std::move(e), Tensor::scalar(s));
}

NodeId Tape::sum(NodeId v) {
    const Tensor& V = values_[v];
    double s = 0.0;
    for (std::size_t i = 0; i < V.size(); ++i) s += V[i];
    Entry e;
    e.op = Op::Sum;
    e.in = {v, -1, -1};
    return push(std::move(e), Tensor::scalar(s));
}

NodeId Tape::topk_straight_through(NodeId logits, std::shared_ptr<const Partition> part,
                                   double tau, bool soft_forward) {
    if (tau <= 0.0)
        throw std::invalid_argument("topk_straight_through: temperature must be positive");
    const Tensor& L = values_[logits];
    if (L.size() != part->grid_size())
        throw std::invalid_argument("topk_straight_through: logits do not match partition grid");
    Tensor out(L.shape());
    Entry e;
    e.op = Op::TopKST;
    e.in = {logits, -1, -1};
    e.a = tau;
    e.part = part;
    e.saved.reserve(L.size());
    std::vector<double> z;
    std::vector<std::uint32_t> kept;
    for (std::size_t i = 0; i < part->num_subsets(); ++i) {
        const auto& sub = part->subset(i);
        z.resize(sub.size());
        double mx = -INFINITY;
        for (std::size_t j = 0; j < sub.size(); ++j) {
            z[j] = L[sub[j]] / tau;
            mx = std::max(mx, z[j]);
        }
        double total = 0.0;
        for (auto& p : z) {
            p = std::exp(p - mx);
            total += p;
        }
        for (auto& p : z) p /= total;
        // probs are saved in subset order; backward walks subsets the same way
        e.saved.insert(e.saved.end(), z.begin(), z.end());
        if (soft_forward) {
            for (std::size_t j = 0; j < sub.size(); ++j) out[sub[j]] = z[j];
        } else {
            topk_indices(z.data(), sub.data(), sub.size(), part->keep(i), kept);
            for (auto j : kept) out[sub[j]] = 1.0;
        }
    }
    return push(std::move(e), std::move(out));
}

NodeId Tape::circulant_apply(NodeId gen, NodeId row_mask, NodeId x, double s) {
    const Tensor& C = values_[gen];
    const Tensor& R = values_[row_mask];
    const Tensor& X = values_[x];
    std::size_t n = C.size();
    if (R.size() != n || X.rows() != n)
        throw std::invalid_argument("circulant_apply: shape mismatch");
    std::size_t B = X.cols();

    Entry e;
    e.op = Op::CirculantApply;
    e.in = {gen, row_mask, x};
    e.a = s;
    for (std::size_t i = 0; i < n; ++i)
        if (R[i] > 0.5) e.idx.push_back(static_cast<std::uint32_t>(i));
    std::size_t m = e.idx.size();

    std::vector<std::complex<double>> Fc, Fx;
    spectrum(n, C.data(), Fc);
    // full convolution result is kept for the row-mask gradient
    e.saved.resize(n * B);
    std::vector<double> xcol(n), conv(n);
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t i = 0; i < n; ++i) xcol[i] = X[i * B + b];
        spectrum(n, xcol.data(), Fx);
        for (std::size_t f = 0; f < Fx.size(); ++f) Fx[f] *= Fc[f];
        fft_c2r(n, Fx.data(), conv.data());
        for (std::size_t i = 0; i < n; ++i) e.saved[i * B + b] = conv[i];
    }
    Tensor out = X.rank() == 1 ? Tensor({m}) : Tensor({m, B});
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t b = 0; b < B; ++b)
            out[j * B + b] = s * e.saved[e.idx[j] * B + b];
    return push(std::move(e), std::move(out));
}

NodeId Tape::circulant_adjoint(NodeId gen, NodeId row_mask, NodeId r, double s) {
    const Tensor& C = values_[gen];
    const Tensor& R = values_[row_mask];
    const Tensor& Rv = values_[r];
    std::size_t n = C.size();
    if (R.size() != n) throw std::invalid_argument("circulant_adjoint: shape mismatch");
    std::size_t B = Rv.cols();

    Entry e;
    e.op = Op::CirculantAdjoint;
    e.in = {gen, row_mask, r};
    e.a = s;
    for (std::size_t i = 0; i < n; ++i)
        if (R[i] > 0.5) e.idx.push_back(static_cast<std::uint32_t>(i));
    if (Rv.rows() != e.idx.size())
        throw std::invalid_argument("circulant_adjoint: input rows do not match mask");

    // scattered input u is kept for the generator gradient
    e.saved.assign(n * B, 0.0);
    for (std::size_t j = 0; j < e.idx.size(); ++j)
        for (std::size_t b = 0; b < B; ++b)
            e.saved[e.idx[j] * B + b] = Rv[j * B + b];

    std::vector<std::complex<double>> Fc, Fu;
    spectrum(n, C.data(), Fc);
    Tensor out = Rv.rank() == 1 ? Tensor({n}) : Tensor({n, B});
    std::vector<double> ucol(n), corr(n);
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t i = 0; i < n; ++i) ucol[i] = e.saved[i * B + b];
        spectrum(n, ucol.data(), Fu);
        for (std::size_t f = 0; f < Fu.size(); ++f) Fu[f] *= std::conj(Fc[f]);
        fft_c2r(n, Fu.data(), corr.data());
        for (std::size_t i = 0; i < n; ++i) out[i * B + b] = s * corr[i];
    }
    return push(std::move(e), std::move(out));
}

NodeId Tape::superpixel_expand(NodeId centers, std::size_t h, std::size_t w,
                               std::size_t delta) {
    if (delta < 1 || delta % 2 == 0)
        throw std::invalid_argument("superpixel_expand: kernel side must be odd");
    const Tensor& Cn = values_[centers];
    if (Cn.cols() != h * w)
        throw std::invalid_argument("superpixel_expand: row length != h*w");
    std::size_t m = Cn.rows(), n = h * w;
    long r = static_cast<long>(delta / 2);
    Entry e;
    e.op = Op::SuperpixelExpand;
    e.in = {centers, -1, -1};
    e.k = h;
    e.k2 = w;
    e.k3 = delta;
    e.saved.assign(m * n, 0.0);  // pre-clip dilation counts
    Tensor out({m, n});
    for (std::size_t row = 0; row < m; ++row) {
        const double* src = Cn.data() + row * n;
        double* pre = e.saved.data() + row * n;
        for (long i = 0; i < static_cast<long>(h); ++i)
            for (long j = 0; j < static_cast<long>(w); ++j) {
                double acc = 0.0;
                for (long di = -r; di <= r; ++di)
                    for (long dj = -r; dj <= r; ++dj) {
                        long ii = i + di, jj = j + dj;
                        if (ii < 0 || jj < 0 || ii >= static_cast<long>(h) ||
                            jj >= static_cast<long>(w))
                            continue;
                        acc += src[ii * w + jj];
                    }
                pre[i * w + j] = acc;
                out[row * n + i * w + j] = std::min(acc, 1.0);
            }
    }
    return push(std::move(e), std::move(out));
}

NodeId Tape::sandwich(NodeId x, std::shared_ptr<const Tensor> left,
                      std::shared_ptr<const Tensor> right) {
    const Tensor& X = values_[x];
    const Tensor& L = *left;
    const Tensor& R = *right;
    std::size_t h = L.cols(), w = R.cols();
    if (X.rows() != h * w)
        throw std::invalid_argument("sandwich: column length != h*w");
    std::size_t B = X.cols();
    std::size_t p = L.rows(), q = R.rows();
    Tensor out = X.rank() == 1 ? Tensor({p * q}) : Tensor({p * q, B});
    EMat img(h, w), res(p, q);
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j) img(i, j) = X[(i * w + j) * B + b];
        res.noalias() = as_mat(L) * img * as_mat(R).transpose();
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < q; ++j) out[(i * q + j) * B + b] = res(i, j);
    }
    Entry e;
    e.op = Op::Sandwich;
    e.in = {x, -1, -1};
    e.mat_l = std::move(left);
    e.mat_r = std::move(right);
    return push(std::move(e), std::move(out));
}

void Tape::backward(NodeId loss) {
    if (values_[loss].size() != 1)
        throw std::invalid_argument("backward: loss must be a scalar node");
    grads_.assign(values_.size(), Tensor());
    grads_[loss] = Tensor(values_[loss].shape());
    grads_[loss][0] = 1.0;
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        if (grads_[it->out].size() == 0) continue;
        backward_entry(*it);
    }
}

Tensor& Tape::grad_acc(NodeId id) {
    if (grads_[id].size() == 0) grads_[id] = Tensor(values_[id].shape());
    return grads_[id];
}

const Tensor& Tape::grad(NodeId id) const {
    if (grads_.empty())
        throw std::runtime_error("grad: backward() has not been run");
    if (grads_[id].size() == 0) {
        const_cast<Tape*>(this)->grads_[id] = Tensor(values_[id].shape());
    }
    return grads_[id];
}

void Tape::backward_entry(const Entry& e) {
    const Tensor& G = grads_[e.out];
    switch (e.op) {
        case Op::Leaf:
            break;
        case Op::MatMul: {
            const Tensor& A = values_[e.in[0]];
            const Tensor& B = values_[e.in[1]];
            as_mat(grad_acc(e.in[0])) += as_mat(G) * as_mat(B).transpose();
            as_mat(grad_acc(e.in[1])) += as_mat(A).transpose() * as_mat(G);
            break;
        }
        case Op::Transpose:
            as_mat(grad_acc(e.in[0])) += as_mat(G).transpose();
            break;
        case Op::Add: {
            Tensor& ga = grad_acc(e.in[0]);
            for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i];
            Tensor& gb = grad_acc(e.in[1]);
            for (std::size_t i = 0; i < G.size(); ++i) gb[i] += G[i];
            break;
        }
        case Op::Sub: {
            Tensor& ga = grad_acc(e.in[0]);
            for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i];
            Tensor& gb = grad_acc(e.in[1]);
            for (std::size_t i = 0; i < G.size(); ++i) gb[i] -= G[i];
            break;
        }
        case Op::AddConst: {
            Tensor& ga = grad_acc(e.in[0]);
            for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i];
            break;
        }
        case Op::Scale: {
            Tensor& ga = grad_acc(e.in[0]);
            for (std::size_t i = 0; i < G.size(); ++i) ga[i] += e.a * G[i];
            break;
        }
        case Op::MulScalar: {
            const Tensor& A = values_[e.in[0]];
            double sv = values_[e.in[1]][0];
            Tensor& ga = grad_acc(e.in[0]);
            double gs = 0.0;
            for (std::size_t i = 0; i < G.size(); ++i) {
                ga[i] += sv * G[i];
                gs += G[i] * A[i];
            }
            grad_acc(e.in[1])[0] += gs;
            break;
        }
        case Op::Exp: {
            const Tensor& out = values_[e.out];
            Tensor& ga = grad_acc(e.in[0]);
            for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i] * out[i];
            break;
        }
        case Op::Relu: {
            const Tensor& A = values_[e.in[0]];
            Tensor& ga = grad_acc(e.in[0]);
            for (std::size_t i = 0; i < G.size(); ++i)
                if (A[i] > 0.0) ga[i] += G[i];
            break;
        }
        case Op::ClampAbs1: {
            const Tensor& A = values_[e.in[0]];
            Tensor& ga = grad_acc(e.in[0]);
            for (std::size_t i = 0; i < G.size(); ++i)
                if (std::fabs(A[i]) < 1.0) ga[i] += G[i];
            break;
        }
        case Op::SoftThreshold: {
            const Tensor& V = values_[e.in[0]];
            double lam = values_[e.in[1]][0];
            Tensor& gv = grad_acc(e.in[0]);
            double gl = 0.0;
            for (std::size_t i = 0; i < G.size(); ++i) {
                // strict inequality: adjoint vanishes at the kink |v| = lambda
                if (std::fabs(V[i]) > lam) {
                    gv[i] += G[i];
                    gl -= (V[i] > 0.0 ? 1.0 : -1.0) * G[i];
                }
            }
            grad_acc(e.in[1])[0] += gl;
            break;
        }
        case Op::HardThreshold: {
            Tensor& gv = grad_acc(e.in[0]);
            for (auto i : e.idx) gv[i] += G[i];
            break;
        }
        case Op::Softmax: {
            Tensor& gv = grad_acc(e.in[0]);
            double dot = 0.0;
            for (std::size_t i = 0; i < G.size(); ++i) dot += e.saved[i] * G[i];
            for (std::size_t i = 0; i < G.size(); ++i)
                gv[i] += e.saved[i] * (G[i] - dot) / e.a;
            break;
        }
        case Op::MedianSelect: {
            const Tensor& Y = values_[e.in[0]];
            std::size_t B = Y.cols();
            Tensor& gy = grad_acc(e.in[0]);
            for (std::size_t jb = 0; jb < e.idx.size(); ++jb)
                gy[e.idx[jb] * B + (jb % B)] += G[jb];
            break;
        }
        case Op::AbsSum: {
            const Tensor& V = values_[e.in[0]];
            Tensor& gv = grad_acc(e.in[0]);
            double g = G[0];
            for (std::size_t i = 0; i < V.size(); ++i)
                gv[i] += g * (V[i] > 0.0 ? 1.0 : (V[i] < 0.0 ? -1.0 : 0.0));
            break;
        }
        case Op::SqSum: {
            const Tensor& V = values_[e.in[0]];
            Tensor& gv = grad_acc(e.in[0]);
            double g = G[0];
            for (std::size_t i = 0; i < V.size(); ++i) gv[i] += 2.0 * g * V[i];
            break;
        }
        case Op::Sum: {
            Tensor& gv = grad_acc(e.in[0]);
            double g = G[0];
            for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += g;
            break;
        }
        case Op::TopKST: {
            Tensor& gv = grad_acc(e.in[0]);
            std::size_t off = 0;
            for (std::size_t i = 0; i < e.part->num_subsets(); ++i) {
                const auto& sub = e.part->subset(i);
                const double* p = e.saved.data() + off;
                double dot = 0.0;
                for (std::size_t j = 0; j < sub.size(); ++j) dot += p[j] * G[sub[j]];
                for (std::size_t j = 0; j < sub.size(); ++j)
                    gv[sub[j]] += p[j] * (G[sub[j]] - dot) / e.a;
                off += sub.size();
            }
            break;
        }
        case Op::CirculantApply: {
            const Tensor& C = values_[e.in[0]];
            const Tensor& X = values_[e.in[2]];
            std::size_t n = C.size(), B = X.cols(), m = e.idx.size();
            // scatter upstream adjoint back onto the full row grid
            std::vector<double> gfull(n * B, 0.0);
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t b = 0; b < B; ++b)
                    gfull[e.idx[j] * B + b] = e.a * G[j * B + b];
            std::vector<std::complex<double>> Fc, Fg, Fx;
            spectrum(n, C.data(), Fc);
            Tensor& gx = grad_acc(e.in[2]);
            Tensor& gc = grad_acc(e.in[0]);
            Tensor& gr = grad_acc(e.in[1]);
            std::vector<double> gcol(n), xcol(n), tmp(n);
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t i = 0; i < n; ++i) {
                    gcol[i] = gfull[i * B + b];
                    xcol[i] = X[i * B + b];
                }
                spectrum(n, gcol.data(), Fg);
                // dL/dx = C^T g  (circular correlation with the generator)
                Fx.resize(Fg.size());
                for (std::size_t f = 0; f < Fg.size(); ++f)
                    Fx[f] = Fg[f] * std::conj(Fc[f]);
                fft_c2r(n, Fx.data(), tmp.data());
                for (std::size_t i = 0; i < n; ++i) gx[i * B + b] += tmp[i];
                // dL/dc_k = sum_i g_i x_{(i-k) mod n}
                spectrum(n, xcol.data(), Fx);
                for (std::size_t f = 0; f < Fg.size(); ++f)
                    Fx[f] = Fg[f] * std::conj(Fx[f]);
                fft_c2r(n, Fx.data(), tmp.data());
                for (std::size_t i = 0; i < n; ++i) gc[i] += tmp[i];
            }
            // selected rows: dL/dmask_i = <g_row, conv_row>
            for (std::size_t j = 0; j < m; ++j) {
                double acc = 0.0;
                for (std::size_t b = 0; b < B; ++b)
                    acc += e.a * G[j * B + b] * e.saved[e.idx[j] * B + b];
                gr[e.idx[j]] += acc;
            }
            break;
        }
        case Op::CirculantAdjoint: {
            const Tensor& C = values_[e.in[0]];
            const Tensor& Rv = values_[e.in[2]];
            std::size_t n = C.size(), B = Rv.cols(), m = e.idx.size();
            std::vector<std::complex<double>> Fc, Fg, Ft;
            spectrum(n, C.data(), Fc);
            Tensor& gc = grad_acc(e.in[0]);
            Tensor& gr = grad_acc(e.in[1]);
            Tensor& gin = grad_acc(e.in[2]);
            std::vector<double> gcol(n), ucol(n), v(n), tmp(n);
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t i = 0; i < n; ++i) {
                    gcol[i] = G[i * B + b];
                    ucol[i] = e.saved[i * B + b];
                }
                spectrum(n, gcol.data(), Fg);
                // v = C * G_col (convolution); gather gives dL/dr
                Ft.resize(Fg.size());
                for (std::size_t f = 0; f < Fg.size(); ++f) Ft[f] = Fg[f] * Fc[f];
                fft_c2r(n, Ft.data(), v.data());
                for (std::size_t j = 0; j < m; ++j)
                    gin[j * B + b] += e.a * v[e.idx[j]];
                // row-mask: dL/dmask_i = r_i * v_i at selected rows
                for (std::size_t j = 0; j < m; ++j)
                    gr[e.idx[j]] += e.a * Rv[j * B + b] * v[e.idx[j]];
                // dL/dc_j = sum_k G_k u_{(k+j) mod n}
                spectrum(n, ucol.data(), Ft);
                for (std::size_t f = 0; f < Fg.size(); ++f)
                    Ft[f] = std::conj(Fg[f]) * Ft[f];
                fft_c2r(n, Ft.data(), tmp.data());
                for (std::size_t i = 0; i < n; ++i) gc[i] += e.a * tmp[i];
            }
            break;
        }
        case Op::SuperpixelExpand: {
            const Tensor& Cn = values_[e.in[0]];
            std::size_t h = e.k, w = e.k2, n = h * w, m = Cn.rows();
            long r = static_cast<long>(e.k3 / 2);
            Tensor& gc = grad_acc(e.in[0]);
            for (std::size_t row = 0; row < m; ++row) {
                const double* pre = e.saved.data() + row * n;
                for (long i = 0; i < static_cast<long>(h); ++i)
                    for (long j = 0; j < static_cast<long>(w); ++j) {
                        // clip kink rule: adjoint passes only where pre < 1
                        if (pre[i * w + j] >= 1.0) continue;
                        double g = G[row * n + i * w + j];
                        if (g == 0.0) continue;
                        for (long di = -r; di <= r; ++di)
                            for (long dj = -r; dj <= r; ++dj) {
                                long ii = i + di, jj = j + dj;
                                if (ii < 0 || jj < 0 || ii >= static_cast<long>(h) ||
                                    jj >= static_cast<long>(w))
                                    continue;
                                gc[row * n + ii * w + jj] += g;
                            }
                    }
            }
            break;
        }
        case Op::Sandwich: {
            const Tensor& L = *e.mat_l;
            const Tensor& R = *e.mat_r;
            std::size_t h = L.cols(), w = R.cols(), p = L.rows(), q = R.rows();
            std::size_t B = values_[e.in[0]].cols();
            Tensor& gx = grad_acc(e.in[0]);
            EMat gimg(p, q), gres(h, w);
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t i = 0; i < p; ++i)
                    for (std::size_t j = 0; j < q; ++j)
                        gimg(i, j) = G[(i * q + j) * B + b];
                gres.noalias() = as_mat(L).transpose() * gimg * as_mat(R);
                for (std::size_t i = 0; i < h; ++i)
                    for (std::size_t j = 0; j < w; ++j)
                        gx[(i * w + j) * B + b] += gres(i, j);
            }
            break;
        }
    }
}

}  // namespace glodismo
