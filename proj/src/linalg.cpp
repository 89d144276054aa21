#include "pmclstd/linalg.hpp"
#include "pmclstd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pmclstd {

SymmetricEigen symmetric_eigen(const Matrix& s) {
    const auto n = s.rows();
    if (s.cols() != n) throw std::invalid_argument("symmetric_eigen: matrix is not square");
    SymmetricEigen out;
    if (n == 0) return out;
    const Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
    if (solver.info() != Eigen::Success) throw std::runtime_error("symmetric_eigen: no convergence");
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

SymmetricEigen gram_eigen(const Matrix& x) {
    const auto rows = x.rows();
    const auto cols = x.cols();
    if (rows >= cols) return symmetric_eigen(x.transpose() * x);

    // Dual route: X X^T u = l u  =>  X^T X (X^T u) = l (X^T u).
    const Matrix dual_gram = x * x.transpose();
    const SymmetricEigen dual = symmetric_eigen(dual_gram);
    const double top = dual.values.size() > 0 ? std::max(dual.values(0), 0.0) : 0.0;
    const double cutoff = static_cast<double>(cols) * 1e-12 * top;

    SymmetricEigen out;
    out.values = Vector::Zero(cols);
    Eigen::Index kept = 0;
    while (kept < dual.values.size() && dual.values(kept) > cutoff && top > 0.0) ++kept;
    out.vectors.resize(cols, kept);
    for (Eigen::Index i = 0; i < kept; ++i) {
        out.values(i) = dual.values(i);
        out.vectors.col(i) = x.transpose() * dual.vectors.col(i) / std::sqrt(dual.values(i));
    }
    return out;
}

double spectral_norm(const Matrix& m, double rel_tol, int max_iter) {
    if (m.size() == 0) return 0.0;
    // Fixed pseudo-random start: a constant vector is an exact eigenvector of
    // many structured matrices and would stall on the wrong singular value.
    Rng rng(0x9b5c3f1d2e4a7081ULL);
    Vector v(m.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const Vector image = m * v;
        const double next = image.squaredNorm();
        const Vector back = m.transpose() * image;
        const double back_norm = back.norm();
        if (back_norm == 0.0) return std::sqrt(next);
        v = back / back_norm;
        const bool done = it > 0 && std::abs(next - estimate) <= rel_tol * next;
        estimate = next;
        if (done) break;
    }
    return std::sqrt(estimate);
}

ColumnBlocks column_blocks(const Matrix& x) {
    const auto rows = x.rows();
    const auto cols = x.cols();
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(cols));
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    auto find = [&](Eigen::Index c) {
        while (parent[c] != c) {
            parent[c] = parent[parent[c]];
            c = parent[c];
        }
        return c;
    };

    std::vector<Eigen::Index> row_anchor(static_cast<std::size_t>(rows), -1);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (x(i, j) == 0.0) continue;
            if (row_anchor[i] < 0) {
                row_anchor[i] = j;
            } else {
                const auto a = find(row_anchor[i]);
                const auto b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        }
    }

    std::vector<Eigen::Index> block_of(static_cast<std::size_t>(cols), -1);
    ColumnBlocks out;
    for (Eigen::Index j = 0; j < cols; ++j) {
        const auto root = find(j);
        if (block_of[root] < 0) {
            block_of[root] = static_cast<Eigen::Index>(out.columns.size());
            out.columns.emplace_back();
            out.rows.emplace_back();
        }
        out.columns[block_of[root]].push_back(j);
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (row_anchor[i] >= 0) out.rows[block_of[find(row_anchor[i])]].push_back(i);
    }
    return out;
}

Vector min_norm_solve(const Matrix& a, const Vector& b, double rcond) {
    if (a.rows() != b.size()) throw std::invalid_argument("min_norm_solve: dimension mismatch");
    if (a.cols() == 0) return Vector(0);
    if (a.rows() > 0 && a.rows() <= a.cols()) {
        // Wide system: with a^T = Q R of full rank, x = Q R^{-T} b is the minimum-norm solution.
        const Eigen::HouseholderQR<Matrix> qr(a.transpose());
        const auto r = qr.matrixQR().topLeftCorner(a.rows(), a.rows()).triangularView<Eigen::Upper>();
        const Vector diag = qr.matrixQR().diagonal().cwiseAbs();
        if (diag.minCoeff() > rcond * diag.maxCoeff()) {
            Vector y = Vector::Zero(a.cols());
            y.head(a.rows()) = r.transpose().solve(b);
            return qr.householderQ() * y;
        }
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
    cod.setThreshold(rcond);
    return cod.solve(b);
}

}  // namespace pmclstd
