#pragma once

#include "pmclstd/linalg.hpp"

namespace pmclstd {

/// Orthonormal basis V_q (n x q) of a subspace M; P_M = V_q V_q^T.
class SubspaceBasis {
public:
    /// Throws std::invalid_argument unless V^T V = I within 1e-10.
    explicit SubspaceBasis(Matrix columns);

    /// The trivial subspace {0} of R^n.
    static SubspaceBasis trivial(Eigen::Index n);
    /// All of R^n.
    static SubspaceBasis full(Eigen::Index n);

    Eigen::Index ambient_dim() const { return columns_.rows(); }
    Eigen::Index dim() const { return columns_.cols(); }
    const Matrix& columns() const { return columns_; }

private:
    struct Unchecked {};
    SubspaceBasis(Matrix columns, Unchecked) : columns_(std::move(columns)) {}

    Matrix columns_;
};

/// sgn(x) max(|x| - tau, 0) componentwise.
Vector soft_threshold(const Vector& x, double tau);

/// Moreau envelope of the l1 norm (sum of scalar Huber functions).
double moreau_env_l1(const Vector& x, double tau);

/// Minimax concave penalty, sum of |t| - t^2/(2 tau) clipped at tau/2.
double mc_penalty(const Vector& x, double tau);

Vector project_subspace(const Vector& x, const SubspaceBasis& basis);

/// Projective MC penalty: ||x||_1 - env_tau(P_M x).
double pmc_penalty(const Vector& x, double tau, const SubspaceBasis& basis);

/// Resolvent of eta (alpha mu d||.||_1 - Id), i.e. the unique z with
/// x in (1 - eta) z + eta alpha mu d||z||_1. Requires 0 < eta < 1.
Vector resolvent_l1_minus_id(const Vector& x, double eta, double alpha, double mu);

/// dist(0, grad + weight * d||x||_1) in the Euclidean norm.
double l1_inclusion_residual(const Vector& x, const Vector& grad, double weight);

}  // namespace pmclstd
