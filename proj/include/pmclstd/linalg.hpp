#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace pmclstd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Eigenpairs of a symmetric matrix, eigenvalues sorted descending.
struct SymmetricEigen {
    Vector values;
    Matrix vectors;
};

/// Full symmetric eigendecomposition.
SymmetricEigen symmetric_eigen(const Matrix& s);

/// Symmetric eigendecomposition of X^T X computed from the factor X.
///
/// When X has fewer rows than columns the nonzero part of the spectrum is
/// recovered from the smaller X X^T, so `vectors` may have fewer columns than
/// X; the missing eigenvalues are exactly zero and are still reported in
/// `values` (length X.cols()).
SymmetricEigen gram_eigen(const Matrix& x);

/// Largest singular value by power iteration on M^T M.
double spectral_norm(const Matrix& m, double rel_tol = 1e-10, int max_iter = 10000);

/// Partition of columns into groups that never share a nonzero in any row.
///
/// Each row belongs to at most one group (all-zero rows belong to none).
struct ColumnBlocks {
    std::vector<std::vector<Eigen::Index>> columns;
    std::vector<std::vector<Eigen::Index>> rows;
};

ColumnBlocks column_blocks(const Matrix& x);

/// Minimum-norm least-squares solution of a x = b.
Vector min_norm_solve(const Matrix& a, const Vector& b, double rcond);

}  // namespace pmclstd
