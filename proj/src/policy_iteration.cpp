#include "pmclstd/policy_iteration.hpp"

#include "pmclstd/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace pmclstd {
namespace {

std::string shortest(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double sup_norm(const QTable& a, const QTable& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::pmc: return "pmc";
        case Method::l1: return "l1";
        case Method::lstd: return "lstd";
        case Method::ridge: return "ridge";
        case Method::exact: return "exact";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    for (const auto m : {Method::pmc, Method::l1, Method::lstd, Method::ridge, Method::exact}) {
        if (name == method_name(m)) return m;
    }
    throw std::invalid_argument("unknown method label '" + std::string(name) + "'");
}

std::string EstimatorSettings::describe(std::optional<double> resolved_tau,
                                        std::optional<Eigen::Index> resolved_q) const {
    switch (method) {
        case Method::pmc: {
            std::string out = "mu=" + shortest(mu);
            if (tau) {
                out += ";tau=" + shortest(*tau);
            } else {
                out += ";tau=auto";
                if (resolved_tau) out += "(" + shortest(*resolved_tau) + ")";
            }
            if (q) {
                out += ";q=" + std::to_string(*q);
            } else {
                out += ";q=auto";
                if (resolved_q) out += "(" + std::to_string(*resolved_q) + ")";
            }
            return out;
        }
        case Method::l1: return "mu=" + shortest(mu);
        case Method::ridge: return "ridge=" + shortest(ridge);
        case Method::lstd:
        case Method::exact: return "";
    }
    return "";
}

PmcSolverConfig resolve_config(const LstdOperatorData& op, const EstimatorSettings& settings) {
    Eigen::Index q = 0;
    double tau = 1.0;
    if (settings.method == Method::pmc) {
        q = settings.q.value_or(op.rank);
        if (settings.tau) {
            tau = *settings.tau;
        } else if (settings.mu > 0.0 && q > 0) {
            tau = settings.mu / max_concavity(op, q);
        }
    } else if (settings.method != Method::l1) {
        throw std::invalid_argument("resolve_config: method has no iterative solver");
    }
    PmcSolverConfig config = default_config(op, settings.mu, tau, q);
    config.stop = settings.stop;
    return config;
}

EstimatorFit fit_weights(const LstdOperatorData& op, const EstimatorSettings& settings, const Vector* warm_start) {
    EstimatorFit fit;
    switch (settings.method) {
        case Method::pmc:
        case Method::l1: {
            const PmcSolverConfig config = resolve_config(op, settings);
            const bool warm = warm_start != nullptr && warm_start->size() == op.dim();
            const Vector init = warm ? *warm_start : Vector::Zero(op.dim());
            SolveReport report = pmc_lstd_solve(op, config, init, init);
            fit.weights = std::move(report.solution);
            fit.iterations = report.iterations;
            fit.converged = report.converged;
            fit.tau = config.tau;
            fit.q = config.q;
            return fit;
        }
        case Method::lstd:
            fit.weights = lstd_closed_form(op, 0.0);
            return fit;
        case Method::ridge:
            fit.weights = lstd_closed_form(op, settings.ridge);
            return fit;
        case Method::exact: break;
    }
    throw std::invalid_argument("fit_weights: exact evaluation needs the model, not sampled data");
}

ApiResult approximate_policy_iteration(const ChainMdpModel& model, const FeatureMapSpec& spec,
                                       const ApiConfig& config) {
    model.validate();
    if (config.iterations < 1) throw std::invalid_argument("approximate_policy_iteration: K must be at least 1");
    if (config.estimator.method != Method::exact && config.samples == 0) {
        throw std::invalid_argument("approximate_policy_iteration: m must be at least 1");
    }
    Policy policy = config.initial_policy.empty()
                        ? Policy(static_cast<std::size_t>(model.n_states), Action::left)
                        : config.initial_policy;
    if (static_cast<int>(policy.size()) != model.n_states) {
        throw std::invalid_argument("approximate_policy_iteration: initial policy must cover every state");
    }

    const ExactSolution optimal = exact_optimal(model);
    ApiResult result;
    result.policies.push_back(policy);
    for (std::size_t k = 0; k < config.iterations; ++k) {
        const ExactSolution truth = exact_q_policy(model, policy);
        QTable estimate;
        if (config.estimator.method == Method::exact) {
            estimate = truth.q;
            result.converged.push_back(true);
            result.solver_iterations.push_back(0);
        } else {
            const SampleBatch batch = sample_batch(model, config.samples, derive_seed(config.seed, 2 * k));
            FeatureMapSpec iteration_spec = spec;
            iteration_spec.seed = derive_seed(config.seed, 2 * k + 1);
            const LstdData data = build_lstd_data(iteration_spec, batch, policy, model.gamma, model.n_states);
            const LstdOperatorData op = assemble_operator(data);
            EstimatorFit fit = fit_weights(op, config.estimator);
            estimate = q_table(spec, fit.weights, model.n_states);
            result.weights.push_back(std::move(fit.weights));
            result.converged.push_back(fit.converged);
            result.solver_iterations.push_back(fit.iterations);
        }
        if (!estimate.allFinite()) throw std::runtime_error("approximate_policy_iteration: non-finite Q estimate");

        const Policy next = greedy_policy(estimate);
        result.diagnostics.delta1.push_back(sup_norm(estimate, truth.q));
        result.diagnostics.delta2.push_back(
            sup_norm(bellman_policy(model, estimate, next), bellman_optimal(model, estimate)));
        result.diagnostics.sup_gap.push_back(sup_norm(estimate, optimal.q));
        result.q_estimates.push_back(std::move(estimate));
        result.policies.push_back(next);
        policy = next;
    }
    return result;
}

BoundCheck pi_bound_check(const PiDiagnostics& diag, double gamma, double tolerance) {
    const std::size_t k = diag.sup_gap.size();
    if (k == 0 || diag.delta1.size() != k || diag.delta2.size() != k) {
        throw std::invalid_argument("pi_bound_check: diagnostics are empty or ragged");
    }
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("pi_bound_check: gamma must lie in [0, 1)");
    const double d1 = *std::max_element(diag.delta1.begin(), diag.delta1.end());
    const double d2 = *std::max_element(diag.delta2.begin(), diag.delta2.end());
    const std::size_t window = std::max<std::size_t>(1, (k + 3) / 4);
    BoundCheck out;
    out.measured_limsup = *std::max_element(diag.sup_gap.end() - static_cast<std::ptrdiff_t>(window), diag.sup_gap.end());
    out.bound = (2.0 * gamma * d1 + d2) / ((1.0 - gamma) * (1.0 - gamma));
    out.holds = out.measured_limsup <= out.bound + tolerance;
    return out;
}

}  // namespace pmclstd
