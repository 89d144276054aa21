#include "pmclstd/inclusion.hpp"

#include <cmath>
#include <sstream>

namespace pmclstd {

StepSchedule StepSchedule::largest(double lipschitz_bound) {
    const double epsilon = 1.0 / (2.0 * (lipschitz_bound + 1.0));
    return constant(epsilon, (1.0 - 2.0 * epsilon) / (2.0 * lipschitz_bound));
}

std::optional<std::string> validate_step_schedule(double modulus, double lipschitz_bound,
                                                  const StepSchedule& schedule) {
    std::ostringstream why;
    why.precision(17);
    if (!(lipschitz_bound > 0.0)) {
        why << "Lipschitz bound L_B=" << lipschitz_bound << " is not positive";
        return why.str();
    }
    const double eps_max = 1.0 / (2.0 * (lipschitz_bound + 1.0));
    if (!(schedule.epsilon > 0.0)) {
        why << "epsilon=" << schedule.epsilon << " is not positive";
        return why.str();
    }
    // Relative slack so that the closed-form defaults pass their own check.
    const double slack = 1e-12;
    if (schedule.epsilon > eps_max * (1.0 + slack)) {
        why << "epsilon=" << schedule.epsilon << " exceeds 1/(2(L_B+1))=" << eps_max;
        return why.str();
    }
    if (schedule.etas.empty()) return std::string("step schedule is empty");
    const double upper = (1.0 - 2.0 * schedule.epsilon) / (2.0 * lipschitz_bound);
    for (std::size_t k = 0; k < schedule.etas.size(); ++k) {
        const double eta = schedule.etas[k];
        if (!(eta >= schedule.epsilon * (1.0 - slack))) {
            why << "eta_" << k << "=" << eta << " is below epsilon=" << schedule.epsilon;
            return why.str();
        }
        if (eta > upper * (1.0 + slack)) {
            why << "eta_" << k << "=" << eta << " exceeds (1-2 epsilon)/(2 L_B)=" << upper;
            return why.str();
        }
        if (!(1.0 + eta * modulus > 0.0)) {
            why << "eta_" << k << "=" << eta << " violates 1 + eta rho > 0 with rho=" << modulus;
            return why.str();
        }
    }
    return std::nullopt;
}

double fixed_point_residual(const Vector& prev, const Vector& next) {
    if (prev.size() != next.size()) throw std::invalid_argument("fixed_point_residual: dimension mismatch");
    return (next - prev).norm() / std::max(1.0, prev.norm());
}

SolveReport frbs_solve(const ResolventOperator& a, const LipschitzMonotoneMap& b, const Vector& x_init_prev,
                       const Vector& x_init, const StepSchedule& schedule, const StopCriteria& stop) {
    if (x_init_prev.size() != x_init.size()) {
        throw std::invalid_argument("frbs_solve: initial points have different dimensions");
    }
    if (auto violation = validate_step_schedule(a.modulus, b.lipschitz_bound, schedule)) {
        throw std::invalid_argument("frbs_solve: inadmissible step schedule: " + *violation);
    }

    SolveReport report;
    Vector x = x_init;
    Vector bx_prev = b.evaluate(x_init_prev);
    double eta_prev = schedule.at(0);
    if (bx_prev.size() != x.size()) throw std::invalid_argument("frbs_solve: operator B changes dimension");

    for (std::size_t k = 0; k < stop.max_iterations; ++k) {
        const double eta = schedule.at(k);
        const Vector bx = b.evaluate(x);
        Vector next = a.resolvent(eta, x - eta * bx - eta_prev * (bx - bx_prev));
        if (!next.allFinite()) {
            std::ostringstream msg;
            msg << "frbs_solve: non-finite iterate at k=" << k << " (divergence or bad conditioning)";
            throw DivergenceError(msg.str());
        }
        const double res = fixed_point_residual(x, next);
        report.residual_history.push_back(res);
        x = std::move(next);
        bx_prev = bx;
        eta_prev = eta;
        report.iterations = k + 1;
        if (res <= stop.tolerance) {
            report.converged = true;
            break;
        }
    }
    report.solution = std::move(x);
    return report;
}

}  // namespace pmclstd
