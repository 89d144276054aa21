#include "pmclstd/prox.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pmclstd {
namespace {

void require_positive(double tau, const char* where) {
    if (!(tau > 0.0)) throw std::invalid_argument(std::string(where) + ": threshold must be positive");
}

void require_dims(const Vector& x, const SubspaceBasis& basis, const char* where) {
    if (x.size() != basis.ambient_dim()) {
        throw std::invalid_argument(std::string(where) + ": vector has dimension " + std::to_string(x.size()) +
                                    ", basis has ambient dimension " + std::to_string(basis.ambient_dim()));
    }
}

double huber(double t, double tau) {
    const double a = std::abs(t);
    return a <= tau ? t * t / (2.0 * tau) : a - tau / 2.0;
}

}  // namespace

SubspaceBasis::SubspaceBasis(Matrix columns) : columns_(std::move(columns)) {
    if (columns_.cols() > columns_.rows()) {
        throw std::invalid_argument("SubspaceBasis: more columns than the ambient dimension");
    }
    if (dim() == 0) return;
    const Matrix gram = columns_.transpose() * columns_;
    const double err = (gram - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
    if (!(err <= 1e-10)) {
        throw std::invalid_argument("SubspaceBasis: columns are not orthonormal (max deviation " +
                                    std::to_string(err) + ")");
    }
}

SubspaceBasis SubspaceBasis::trivial(Eigen::Index n) { return SubspaceBasis(Matrix(n, 0), Unchecked{}); }

SubspaceBasis SubspaceBasis::full(Eigen::Index n) { return SubspaceBasis(Matrix::Identity(n, n), Unchecked{}); }

Vector soft_threshold(const Vector& x, double tau) {
    require_positive(tau, "soft_threshold");
    return x.unaryExpr([tau](double t) {
        const double mag = std::abs(t) - tau;
        if (mag <= 0.0) return 0.0;
        return t >= 0.0 ? mag : -mag;
    });
}

double moreau_env_l1(const Vector& x, double tau) {
    require_positive(tau, "moreau_env_l1");
    double sum = 0.0;
    for (const double t : x) sum += huber(t, tau);
    return sum;
}

double mc_penalty(const Vector& x, double tau) {
    require_positive(tau, "mc_penalty");
    double sum = 0.0;
    for (const double t : x) {
        const double a = std::abs(t);
        sum += a <= tau ? a - t * t / (2.0 * tau) : tau / 2.0;
    }
    return sum;
}

Vector project_subspace(const Vector& x, const SubspaceBasis& basis) {
    require_dims(x, basis, "project_subspace");
    if (basis.dim() == 0) return Vector::Zero(x.size());
    const auto& v = basis.columns();
    return v * (v.transpose() * x);
}

double pmc_penalty(const Vector& x, double tau, const SubspaceBasis& basis) {
    require_positive(tau, "pmc_penalty");
    require_dims(x, basis, "pmc_penalty");
    return x.lpNorm<1>() - moreau_env_l1(project_subspace(x, basis), tau);
}

Vector resolvent_l1_minus_id(const Vector& x, double eta, double alpha, double mu) {
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("resolvent_l1_minus_id: eta must lie in (0, 1)");
    if (!(alpha > 0.0) || !(mu >= 0.0)) {
        throw std::invalid_argument("resolvent_l1_minus_id: alpha must be positive and mu nonnegative");
    }
    const double shrink = 1.0 - eta;
    const double threshold = eta * alpha * mu / shrink;
    if (threshold == 0.0) return x / shrink;
    return soft_threshold(x / shrink, threshold);
}

double l1_inclusion_residual(const Vector& x, const Vector& grad, double weight) {
    if (x.size() != grad.size()) throw std::invalid_argument("l1_inclusion_residual: dimension mismatch");
    double sq = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double d = 0.0;
        if (x(i) > 0.0) {
            d = grad(i) + weight;
        } else if (x(i) < 0.0) {
            d = grad(i) - weight;
        } else {
            d = std::max(std::abs(grad(i)) - weight, 0.0);
        }
        sq += d * d;
    }
    return std::sqrt(sq);
}

}  // namespace pmclstd
