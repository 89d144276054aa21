#pragma once

#include "pmclstd/inclusion.hpp"
#include "pmclstd/linalg.hpp"
#include "pmclstd/prox.hpp"

#include <optional>
#include <string>

namespace pmclstd {

/// Sampled LSTD system: rows of `phi` are phi(s_i, a_i), rows of `phi_next`
/// are phi(s'_i, pi(s'_i)), `g` holds the one-step costs.
struct LstdData {
    Matrix phi;
    Matrix phi_next;
    Vector g;
    double gamma = 0.9;

    /// Throws std::invalid_argument on inconsistent shapes or gamma outside (0, 1).
    void validate() const;
};

/// A = Phi^T (Phi - gamma Phi'), b = Phi^T g and the spectral data of Phi^T Phi.
struct LstdOperatorData {
    Matrix a_tilde;
    Vector b_tilde;
    /// All n eigenvalues of Phi^T Phi, descending; values at or below the rank
    /// tolerance n * 1e-12 * l_1 are stored as exactly zero.
    Vector gram_eigvals;
    /// Leading eigenvectors of Phi^T Phi (n x s with s >= rank). Eigenvectors
    /// of the zero eigenvalue may be omitted; basis() completes them on demand.
    Matrix gram_eigvecs;
    Eigen::Index rank = 0;
    double lambda_min_pp = 0.0;
    double spectral_norm_a = 0.0;

    Eigen::Index dim() const { return b_tilde.size(); }
    /// l_q for 1 <= q <= n.
    double eigenvalue(Eigen::Index q) const;
    /// span(V_1..q) as an orthonormal basis; q = 0 gives the trivial subspace.
    SubspaceBasis basis(Eigen::Index q) const;
};

LstdOperatorData assemble_operator(const LstdData& data);

struct PmcSolverConfig {
    double mu = 0.0;
    double tau = 1.0;
    /// Dimension of M = span(V_1..q); 0 selects plain l1 regularization.
    Eigen::Index q = 0;
    double alpha = 1.0;
    StepSchedule schedule = StepSchedule::largest(2.0);
    StopCriteria stop;

    /// mu / tau, or 0 when the concave part is inactive (mu = 0 or q = 0).
    double concavity() const { return (mu == 0.0 || q == 0) ? 0.0 : mu / tau; }
};

/// beta = alpha (||A||_2 + mu/tau) + 1, the Lipschitz bound of alpha T + Id.
double lipschitz_beta(const PmcSolverConfig& config, const LstdOperatorData& op);

/// Empty when conditions (C-1)-(C-3) hold; otherwise the first violated inequality.
std::optional<std::string> check_convexity_condition(const PmcSolverConfig& config, const LstdOperatorData& op);

/// Largest admissible mu/tau for a given q: max{l_q, lambda_min^{++}}.
double max_concavity(const LstdOperatorData& op, Eigen::Index q);

/// Step sizes at their largest admissible values: alpha = 1/(||A|| + mu/tau),
/// beta = 2, epsilon = eta = 1/6. Throws std::invalid_argument when mu/tau
/// violates (C-1), naming the maximal admissible ratio.
PmcSolverConfig default_config(const LstdOperatorData& op, double mu, double tau, Eigen::Index q);

/// T(w) = A w - b - (mu/tau) P_M (Id - Soft_tau)(P_M w).
///
/// Evaluation exploits sparsity of w, which is what the solver iterates look like.
class PmcOperator {
public:
    PmcOperator(const LstdOperatorData& op, double mu, double tau, SubspaceBasis basis);

    Vector operator()(const Vector& w) const;
    const SubspaceBasis& basis() const { return basis_; }

private:
    const LstdOperatorData* op_;
    double ratio_;
    double tau_;
    SubspaceBasis basis_;
};

Vector pmc_operator_t(const Vector& w, const LstdOperatorData& op, const PmcSolverConfig& config,
                      const SubspaceBasis& basis);

/// Solves 0 in T(w) + mu d||w||_1 by FRBS on the recast pair
/// B = alpha T + Id (monotone, beta-Lipschitz) and A = alpha mu d||.||_1 - Id (rho = -1).
SolveReport pmc_lstd_solve(const LstdOperatorData& op, const PmcSolverConfig& config, const Vector& w_init_prev,
                           const Vector& w_init);
SolveReport pmc_lstd_solve(const LstdData& data, const PmcSolverConfig& config, const Vector& w_init_prev,
                           const Vector& w_init);

/// Solves (A + ridge I) w = b; the minimum-norm least-squares solution when ridge = 0.
Vector lstd_closed_form(const LstdOperatorData& op, double ridge);

}  // namespace pmclstd
