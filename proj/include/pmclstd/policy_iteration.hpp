#pragma once

#include "pmclstd/features.hpp"
#include "pmclstd/lstd.hpp"
#include "pmclstd/mdp.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pmclstd {

/// Policy-evaluation estimators. `exact` bypasses sampling and uses Q^pi.
enum class Method { pmc, l1, lstd, ridge, exact };

std::string_view method_name(Method m);
/// Throws std::invalid_argument naming the label when unknown.
Method parse_method(std::string_view name);

/// Hyperparameters of one estimator fit. Unset `tau` picks the smallest
/// admissible value mu / max{l_q, lambda_min^{++}}; unset `q` uses the
/// numerical rank of Phi^T Phi.
struct EstimatorSettings {
    Method method = Method::pmc;
    double mu = 0.0;
    std::optional<double> tau;
    std::optional<Eigen::Index> q;
    double ridge = 0.0;
    StopCriteria stop;

    /// "mu=...;tau=...;q=..." with shortest round-trip numbers; the
    /// resolved tau and q are reported when given.
    std::string describe(std::optional<double> resolved_tau = {},
                         std::optional<Eigen::Index> resolved_q = {}) const;
};

struct EstimatorFit {
    Vector weights;
    std::size_t iterations = 0;
    bool converged = true;
    double tau = 0.0;
    Eigen::Index q = 0;
};

/// Solver configuration for the pmc / l1 estimators on this operator data.
PmcSolverConfig resolve_config(const LstdOperatorData& op, const EstimatorSettings& settings);

/// Fits weights with the chosen estimator. `warm_start` seeds both FRBS
/// initial points when it has the right dimension.
EstimatorFit fit_weights(const LstdOperatorData& op, const EstimatorSettings& settings,
                         const Vector* warm_start = nullptr);

struct PiDiagnostics {
    std::vector<double> delta1;   // ||Qhat^{pi_k} - Q^{pi_k}||_inf
    std::vector<double> delta2;   // ||T_{pi_{k+1}} Qhat^{pi_k} - T_* Qhat^{pi_k}||_inf
    std::vector<double> sup_gap;  // ||Qhat^{pi_k} - Q^*||_inf
};

struct ApiConfig {
    EstimatorSettings estimator;
    std::size_t samples = 1000;
    std::size_t iterations = 10;
    std::uint64_t seed = 0;
    /// Defaults to all-left when empty.
    Policy initial_policy;
};

struct ApiResult {
    std::vector<Policy> policies;  // pi_0 .. pi_K
    std::vector<Vector> weights;   // w_0 .. w_{K-1}; empty for exact evaluation
    std::vector<QTable> q_estimates;
    std::vector<bool> converged;
    std::vector<std::size_t> solver_iterations;
    PiDiagnostics diagnostics;
};

/// Approximate policy iteration: per iteration, fresh samples, LSTD-type
/// evaluation of pi_k, greedy improvement. Solver non-convergence is recorded,
/// not raised.
ApiResult approximate_policy_iteration(const ChainMdpModel& model, const FeatureMapSpec& spec,
                                       const ApiConfig& config);

struct BoundCheck {
    double measured_limsup = 0.0;
    double bound = 0.0;
    bool holds = false;
};

/// Compares max sup_gap over the last quarter of iterations with
/// (2 gamma delta1 + delta2) / (1 - gamma)^2 using window maxima of delta1, delta2.
BoundCheck pi_bound_check(const PiDiagnostics& diag, double gamma, double tolerance = 1e-9);

}  // namespace pmclstd
