#pragma once

#include "pmclstd/linalg.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmclstd {

/// A maximally rho-monotone operator A, accessed through its resolvent
/// (step, point) -> J_{step A}(point). `modulus` is rho; negative values
/// are allowed (hypomonotone A).
struct ResolventOperator {
    std::function<Vector(double, const Vector&)> resolvent;
    double modulus = 0.0;
};

/// A single-valued monotone map B with Lipschitz bound L_B.
struct LipschitzMonotoneMap {
    std::function<Vector(const Vector&)> evaluate;
    double lipschitz_bound = 1.0;
};

/// Step sizes eta_0, eta_1, ...; the last listed value repeats forever.
struct StepSchedule {
    double epsilon = 0.0;
    std::vector<double> etas;

    static StepSchedule constant(double epsilon, double eta) { return {epsilon, {eta}}; }
    /// Largest admissible constant step: epsilon = 1/(2(L+1)), eta = (1-2 epsilon)/(2L).
    static StepSchedule largest(double lipschitz_bound);

    double at(std::size_t k) const { return etas.empty() ? 0.0 : etas[std::min(k, etas.size() - 1)]; }
};

struct StopCriteria {
    double tolerance = 1e-8;
    std::size_t max_iterations = 100000;
};

struct SolveReport {
    Vector solution;
    std::size_t iterations = 0;
    std::vector<double> residual_history;
    bool converged = false;
};

/// Raised when an iterate stops being finite.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Empty when the schedule is admissible; otherwise names the first failed condition.
std::optional<std::string> validate_step_schedule(double modulus, double lipschitz_bound,
                                                  const StepSchedule& schedule);

/// ||next - prev||_2 / max(1, ||prev||_2).
double fixed_point_residual(const Vector& prev, const Vector& next);

/// Forward-reflected-backward splitting for 0 in (A + B)(x):
///
///   x_{k+1} = J_{eta_k A}[x_k - eta_k B(x_k) - eta_{k-1}(B(x_k) - B(x_{k-1}))]
///
/// with eta_{-1} := eta_0. Stops once fixed_point_residual(x_k, x_{k+1})
/// drops below the tolerance. Throws std::invalid_argument on a dimension
/// mismatch or an inadmissible schedule and DivergenceError on non-finite
/// iterates.
SolveReport frbs_solve(const ResolventOperator& a, const LipschitzMonotoneMap& b, const Vector& x_init_prev,
                       const Vector& x_init, const StepSchedule& schedule, const StopCriteria& stop = {});

}  // namespace pmclstd
