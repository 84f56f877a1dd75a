#ifndef GLODISMO_SOLVERS_HPP
#define GLODISMO_SOLVERS_HPP

#include <string>
#include <vector>

#include "glodismo/operators.hpp"
#include "glodismo/tape.hpp"
#include "glodismo/transforms.hpp"

namespace glodismo {

enum class SolverKind { Iht, ListaScalar, EIht, EListaScalar, Nnlad };

SolverKind solver_kind_from_string(const std::string& s);

struct SolverConfig {
    SolverKind kind = SolverKind::Iht;
    int iterations = 20;       // T
    int sparsity = 0;          // s, thresholding kinds
    double gamma = 1.0;        // fixed step size (iht kinds)
    double sigma = 0.1;        // nnlad dual step
    double tau_nnlad = 0.6;    // nnlad primal step
    bool average_loss = false; // average the loss over the iterate trace
};

/// Learnable per-iteration scalars for the lista kinds: gamma_t raw and
/// rho_t raw (the threshold is exp(rho_t) to stay positive).
struct ListaParamNodes {
    std::vector<NodeId> gamma;  // T scalar nodes
    std::vector<NodeId> rho;    // T scalar nodes
};

/// Iterate trace in the signal domain; back() is the solver output.
struct IterateTrace {
    std::vector<NodeId> iterates;
};

/// Iterative hard thresholding unrolled on a tape. Iterations run in the
/// coefficient domain of psi (pass nullptr for the identity transform);
/// the trace stores synthesis(c_t). Throws on non-finite iterates.
IterateTrace iht_run(Tape& tape, const LinearMapNodes& phi, const Transform* psi,
                     NodeId y, const SolverConfig& cfg);

/// Soft-thresholding iterations with learnable per-iteration step sizes
/// and thresholds (the scalar stand-in for the neurally adapted variant).
IterateTrace lista_scalar_run(Tape& tape, const LinearMapNodes& phi,
                              const Transform* psi, NodeId y,
                              const SolverConfig& cfg, const ListaParamNodes& p);

/// Expander IHT: identical scheme with the median operator as phi.back.
IterateTrace eiht_run(Tape& tape, const LinearMapNodes& phi, NodeId y,
                      const SolverConfig& cfg);

/// Expander variant of the scalar lista scheme.
IterateTrace e_lista_scalar_run(Tape& tape, const LinearMapNodes& phi, NodeId y,
                                const SolverConfig& cfg, const ListaParamNodes& p);

/// Nonnegative least absolute deviations via an unrolled primal-dual
/// scheme with nonnegativity projection after each primal step. Both step
/// sizes are divided by `op_norm`, a spectral-norm estimate of the scaled
/// operator, so that sigma*tau/op_norm^2 * ||Phi||^2 < 1.
IterateTrace nnlad_run(Tape& tape, const LinearMapNodes& phi, NodeId y,
                       const SolverConfig& cfg, double op_norm);

/// Power-iteration estimate of ||scale * mask||_2 (value level).
double operator_norm_estimate(const Tensor& mask, double scale, int iters = 30);

}  // namespace glodismo

#endif
