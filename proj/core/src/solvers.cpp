#include "glodismo/solvers.hpp"

#include <cmath>
#include <stdexcept>

namespace glodismo {

namespace {

void check_finite(const Tape& tape, NodeId node, const char* who) {
    if (!tape.value(node).all_finite())
        throw std::runtime_error(std::string(who) +
                                 ": non-finite iterate (operator scale too large?)");
}

// c_{t+1} = threshold(c_t + step * back(y - apply(c_t))), in the
// coefficient domain of psi when psi is given.
struct Unroller {
    Tape& tape;
    const LinearMapNodes& phi;
    const Transform* psi;
    NodeId y;

    NodeId forward(NodeId c) {
        NodeId x = psi ? psi->synthesis_node(tape, c) : c;
        return phi.apply(tape, x);
    }
    NodeId backward_map(NodeId r) {
        NodeId g = phi.back(tape, r);
        return psi ? psi->synthesis_adjoint_node(tape, g) : g;
    }
    NodeId to_signal(NodeId c) { return psi ? psi->synthesis_node(tape, c) : c; }
};

}  // namespace

SolverKind solver_kind_from_string(const std::string& s) {
    if (s == "iht") return SolverKind::Iht;
    if (s == "lista_scalar") return SolverKind::ListaScalar;
    if (s == "e_iht") return SolverKind::EIht;
    if (s == "e_lista_scalar") return SolverKind::EListaScalar;
    if (s == "nnlad") return SolverKind::Nnlad;
    throw std::invalid_argument("unknown solver kind: " + s);
}

IterateTrace iht_run(Tape& tape, const LinearMapNodes& phi, const Transform* psi,
                     NodeId y, const SolverConfig& cfg) {
    if (cfg.iterations < 1) throw std::invalid_argument("iht_run: T >= 1 required");
    if (cfg.sparsity < 1) throw std::invalid_argument("iht_run: s >= 1 required");
    Unroller u{tape, phi, psi, y};
    NodeId c = -1;
    IterateTrace trace;
    for (int t = 0; t < cfg.iterations; ++t) {
        NodeId residual;
        if (c < 0) {
            residual = y;  // c_0 = 0 so y - apply(0) = y
        } else {
            residual = tape.sub(y, u.forward(c));
        }
        NodeId g = u.backward_map(residual);
        NodeId step = cfg.gamma == 1.0 ? g : tape.scale(g, cfg.gamma);
        NodeId pre = c < 0 ? step : tape.add(c, step);
        c = tape.hard_threshold(pre, static_cast<std::size_t>(cfg.sparsity));
        check_finite(tape, c, "iht_run");
        trace.iterates.push_back(u.to_signal(c));
    }
    return trace;
}

IterateTrace lista_scalar_run(Tape& tape, const LinearMapNodes& phi,
                              const Transform* psi, NodeId y,
                              const SolverConfig& cfg, const ListaParamNodes& p) {
    if (cfg.iterations < 1)
        throw std::invalid_argument("lista_scalar_run: T >= 1 required");
    if (p.gamma.size() != static_cast<std::size_t>(cfg.iterations) ||
        p.rho.size() != static_cast<std::size_t>(cfg.iterations))
        throw std::invalid_argument("lista_scalar_run: need T (gamma, rho) pairs");
    Unroller u{tape, phi, psi, y};
    NodeId c = -1;
    IterateTrace trace;
    for (int t = 0; t < cfg.iterations; ++t) {
        NodeId residual = c < 0 ? y : tape.sub(y, u.forward(c));
        NodeId g = tape.mul_scalar(u.backward_map(residual), p.gamma[t]);
        NodeId pre = c < 0 ? g : tape.add(c, g);
        NodeId lambda = tape.exp(p.rho[t]);  // threshold constrained positive
        c = tape.soft_threshold(pre, lambda);
        check_finite(tape, c, "lista_scalar_run");
        trace.iterates.push_back(u.to_signal(c));
    }
    return trace;
}

IterateTrace eiht_run(Tape& tape, const LinearMapNodes& phi, NodeId y,
                      const SolverConfig& cfg) {
    return iht_run(tape, phi, nullptr, y, cfg);
}

IterateTrace e_lista_scalar_run(Tape& tape, const LinearMapNodes& phi, NodeId y,
                                const SolverConfig& cfg, const ListaParamNodes& p) {
    return lista_scalar_run(tape, phi, nullptr, y, cfg, p);
}

IterateTrace nnlad_run(Tape& tape, const LinearMapNodes& phi, NodeId y,
                       const SolverConfig& cfg, double op_norm) {
    if (cfg.iterations < 1) throw std::invalid_argument("nnlad_run: T >= 1 required");
    if (cfg.sigma <= 0.0 || cfg.tau_nnlad <= 0.0)
        throw std::invalid_argument("nnlad_run: sigma, tau must be positive");
    if (!(op_norm > 0.0)) throw std::invalid_argument("nnlad_run: operator norm must be positive");
    double sigma = cfg.sigma / op_norm;
    double tau = cfg.tau_nnlad / op_norm;

    // Chambolle-Pock for min_{x>=0} ||Phi x - y||_1:
    //   z <- proj_{|.|<=1}(z + sigma (Phi xbar - y))
    //   x <- relu(x - tau Phi^T z)
    //   xbar <- 2 x - x_prev
    NodeId x = -1, xbar = -1, z = -1;
    IterateTrace trace;
    for (int t = 0; t < cfg.iterations; ++t) {
        NodeId ax = xbar < 0 ? tape.scale(y, 0.0) : phi.apply(tape, xbar);
        NodeId zstep = tape.scale(tape.sub(ax, y), sigma);
        z = tape.clamp_abs1(z < 0 ? zstep : tape.add(z, zstep));
        NodeId grad = tape.scale(phi.back(tape, z), -tau);
        NodeId xnew = tape.relu_nonneg(x < 0 ? grad : tape.add(x, grad));
        xbar = x < 0 ? tape.scale(xnew, 2.0)
                     : tape.sub(tape.scale(xnew, 2.0), x);
        x = xnew;
        check_finite(tape, x, "nnlad_run");
        trace.iterates.push_back(x);
    }
    return trace;
}

double operator_norm_estimate(const Tensor& mask, double scale, int iters) {
    std::size_t m = mask.rows(), n = mask.cols();
    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n))), u(m);
    double norm = 0.0;
    for (int it = 0; it < iters; ++it) {
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += mask.at(i, j) * v[j];
            u[i] = acc;
        }
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) acc += mask.at(i, j) * u[i];
            v[j] = acc;
        }
        norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) return scale;  // zero operator
        for (auto& x : v) x /= norm;
    }
    return scale * std::sqrt(norm);
}

}  // namespace glodismo
