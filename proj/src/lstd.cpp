#include "pmclstd/lstd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace pmclstd {
namespace {

// Relative slack for boundary comparisons of the closed-form step parameters.
constexpr double kBoundarySlack = 1e-12;

struct EigenEntry {
    double value;
    Eigen::Index block;
    Eigen::Index local;  // column in the block's eigenvector matrix, -1 if not computed
};

}  // namespace

void LstdData::validate() const {
    const auto m = phi.rows();
    const auto n = phi.cols();
    if (m == 0 || n == 0) throw std::invalid_argument("LstdData: empty feature matrix");
    if (phi_next.rows() != m || phi_next.cols() != n) {
        throw std::invalid_argument("LstdData: Phi' must have the shape of Phi");
    }
    if (g.size() != m) throw std::invalid_argument("LstdData: payoff vector length differs from sample count");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("LstdData: gamma must lie in (0, 1)");
    if (!phi.allFinite() || !phi_next.allFinite() || !g.allFinite()) {
        throw std::invalid_argument("LstdData: non-finite entries");
    }
}

double LstdOperatorData::eigenvalue(Eigen::Index q) const {
    if (q < 1 || q > dim()) throw std::out_of_range("LstdOperatorData::eigenvalue: q outside 1..n");
    return gram_eigvals(q - 1);
}

SubspaceBasis LstdOperatorData::basis(Eigen::Index q) const {
    const auto n = dim();
    if (q < 0 || q > n) throw std::out_of_range("LstdOperatorData::basis: q outside 0..n");
    if (q == 0) return SubspaceBasis::trivial(n);
    if (q <= gram_eigvecs.cols()) return SubspaceBasis(gram_eigvecs.leftCols(q));

    // Complete with an orthonormal basis of the complement (eigenvalue zero).
    const Eigen::HouseholderQR<Matrix> qr(gram_eigvecs);
    const Matrix full = qr.householderQ();
    Matrix columns(n, q);
    columns.leftCols(gram_eigvecs.cols()) = gram_eigvecs;
    columns.rightCols(q - gram_eigvecs.cols()) = full.middleCols(gram_eigvecs.cols(), q - gram_eigvecs.cols());
    return SubspaceBasis(std::move(columns));
}

LstdOperatorData assemble_operator(const LstdData& data) {
    data.validate();
    const auto n = data.phi.cols();

    LstdOperatorData op;
    op.a_tilde = Matrix::Zero(n, n);
    op.b_tilde = data.phi.transpose() * data.g;

    // Phi^T Phi is block diagonal over groups of columns that never co-occur in a row.
    const ColumnBlocks blocks = column_blocks(data.phi);
    const Matrix residual = data.phi - data.gamma * data.phi_next;
    std::vector<SymmetricEigen> block_eigen;
    std::vector<EigenEntry> entries;
    entries.reserve(static_cast<std::size_t>(n));
    for (std::size_t b = 0; b < blocks.columns.size(); ++b) {
        const auto& cols = blocks.columns[b];
        const auto& rows = blocks.rows[b];
        const Matrix local = data.phi(rows, cols);
        op.a_tilde(cols, Eigen::all) = local.transpose() * residual(rows, Eigen::all);
        block_eigen.push_back(gram_eigen(local));
        const auto& eig = block_eigen.back();
        for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
            entries.push_back({eig.values(i), static_cast<Eigen::Index>(b), i < eig.vectors.cols() ? i : -1});
        }
    }

    double top = 0.0;
    for (const auto& e : entries) top = std::max(top, e.value);
    const double cutoff = static_cast<double>(n) * 1e-12 * top;
    for (auto& e : entries) {
        if (e.value <= cutoff) e.value = 0.0;
    }
    std::stable_sort(entries.begin(), entries.end(), [](const EigenEntry& x, const EigenEntry& y) {
        if (x.value != y.value) return x.value > y.value;
        return (x.local >= 0) && (y.local < 0);
    });

    op.gram_eigvals.resize(n);
    Eigen::Index stored = 0;
    for (const auto& e : entries) stored += e.local >= 0 ? 1 : 0;
    op.gram_eigvecs = Matrix::Zero(n, stored);
    Eigen::Index col = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& e = entries[static_cast<std::size_t>(i)];
        op.gram_eigvals(i) = e.value;
        if (e.value > 0.0) {
            ++op.rank;
            op.lambda_min_pp = e.value;
        }
        if (e.local >= 0) {
            const auto& cols = blocks.columns[static_cast<std::size_t>(e.block)];
            op.gram_eigvecs(cols, col) = block_eigen[static_cast<std::size_t>(e.block)].vectors.col(e.local);
            ++col;
        }
    }
    if (op.rank == 0) {
        throw std::invalid_argument("assemble_operator: all Gram eigenvalues are below the rank tolerance");
    }
    op.spectral_norm_a = spectral_norm(op.a_tilde);
    return op;
}

double lipschitz_beta(const PmcSolverConfig& config, const LstdOperatorData& op) {
    return config.alpha * (op.spectral_norm_a + config.concavity()) + 1.0;
}

double max_concavity(const LstdOperatorData& op, Eigen::Index q) {
    if (q < 0 || q > op.dim()) throw std::out_of_range("max_concavity: q outside 0..n");
    if (q == 0) return std::numeric_limits<double>::infinity();
    return std::max(op.eigenvalue(q), op.lambda_min_pp);
}

std::optional<std::string> check_convexity_condition(const PmcSolverConfig& config, const LstdOperatorData& op) {
    std::ostringstream why;
    why.precision(17);
    if (config.q < 0 || config.q > op.dim()) {
        why << "q=" << config.q << " outside 0.." << op.dim();
        return why.str();
    }
    if (config.mu < 0.0) return std::string("mu must be nonnegative");
    if (config.mu > 0.0 && config.q > 0) {
        if (!(config.tau > 0.0)) return std::string("tau must be positive");
        const double bound = max_concavity(op, config.q);
        if (config.mu / config.tau > bound * (1.0 + kBoundarySlack)) {
            why << "(C-1) violated: mu/tau=" << config.mu / config.tau << " exceeds max{l_q, lambda_min++}=" << bound
                << "; largest admissible mu/tau is " << bound;
            return why.str();
        }
    }
    const double alpha_max = 1.0 / (op.spectral_norm_a + config.concavity());
    if (!(config.alpha > 0.0) || config.alpha > alpha_max * (1.0 + kBoundarySlack)) {
        why << "(C-3) violated: alpha=" << config.alpha << " outside (0, " << alpha_max << "]";
        return why.str();
    }
    if (auto bad = validate_step_schedule(-1.0, lipschitz_beta(config, op), config.schedule)) {
        return "(C-2) violated: " + *bad;
    }
    return std::nullopt;
}

PmcSolverConfig default_config(const LstdOperatorData& op, double mu, double tau, Eigen::Index q) {
    PmcSolverConfig config;
    config.mu = mu;
    config.tau = tau;
    config.q = q;
    if (q < 0 || q > op.dim()) throw std::invalid_argument("default_config: q outside 0..n");
    if (mu > 0.0 && q > 0) {
        if (!(tau > 0.0)) throw std::invalid_argument("default_config: tau must be positive");
        const double bound = max_concavity(op, q);
        if (mu / tau > bound * (1.0 + kBoundarySlack)) {
            std::ostringstream why;
            why.precision(17);
            why << "default_config: mu/tau=" << mu / tau << " violates the convexity condition; the maximal "
                << "admissible mu/tau for q=" << q << " is " << bound;
            throw std::invalid_argument(why.str());
        }
    }
    const double scale = op.spectral_norm_a + config.concavity();
    if (!(scale > 0.0)) throw std::invalid_argument("default_config: operator A is zero");
    config.alpha = 1.0 / scale;
    config.schedule = StepSchedule::largest(lipschitz_beta(config, op));
    return config;
}

PmcOperator::PmcOperator(const LstdOperatorData& op, double mu, double tau, SubspaceBasis basis)
    : op_(&op), ratio_((mu == 0.0 || basis.dim() == 0) ? 0.0 : mu / tau), tau_(tau), basis_(std::move(basis)) {
    if (basis_.ambient_dim() != op.dim()) throw std::invalid_argument("PmcOperator: basis dimension mismatch");
}

Vector PmcOperator::operator()(const Vector& w) const {
    const auto n = op_->dim();
    if (w.size() != n) throw std::invalid_argument("pmc operator: dimension mismatch");
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (w(i) != 0.0) support.push_back(i);
    }
    const bool sparse = 3 * static_cast<Eigen::Index>(support.size()) < n;

    Vector out = -op_->b_tilde;
    if (sparse) {
        for (const auto j : support) out += w(j) * op_->a_tilde.col(j);
    } else {
        out.noalias() += op_->a_tilde * w;
    }
    if (ratio_ == 0.0) return out;

    const Matrix& v = basis_.columns();
    Vector coeff = Vector::Zero(v.cols());
    if (sparse) {
        for (const auto j : support) coeff += w(j) * v.row(j).transpose();
    } else {
        coeff.noalias() = v.transpose() * w;
    }
    const Vector projected = v * coeff;
    const Vector clipped = projected.cwiseMax(-tau_).cwiseMin(tau_);  // (Id - Soft_tau) p
    out.noalias() -= ratio_ * (v * (v.transpose() * clipped));
    return out;
}

Vector pmc_operator_t(const Vector& w, const LstdOperatorData& op, const PmcSolverConfig& config,
                      const SubspaceBasis& basis) {
    return PmcOperator(op, config.mu, config.tau, basis)(w);
}

SolveReport pmc_lstd_solve(const LstdOperatorData& op, const PmcSolverConfig& config, const Vector& w_init_prev,
                           const Vector& w_init) {
    if (auto bad = check_convexity_condition(config, op)) {
        throw std::invalid_argument("pmc_lstd_solve: " + *bad);
    }
    if (w_init.size() != op.dim() || w_init_prev.size() != op.dim()) {
        throw std::invalid_argument("pmc_lstd_solve: initial point dimension mismatch");
    }
    const double alpha = config.alpha;
    const double mu = config.mu;
    auto t = std::make_shared<PmcOperator>(op, mu, config.tau, op.basis(config.q));

    LipschitzMonotoneMap forward{[t, alpha](const Vector& w) -> Vector { return alpha * (*t)(w) + w; },
                                 lipschitz_beta(config, op)};
    ResolventOperator backward{[alpha, mu](double eta, const Vector& x) { return resolvent_l1_minus_id(x, eta, alpha, mu); },
                               -1.0};
    return frbs_solve(backward, forward, w_init_prev, w_init, config.schedule, config.stop);
}

SolveReport pmc_lstd_solve(const LstdData& data, const PmcSolverConfig& config, const Vector& w_init_prev,
                           const Vector& w_init) {
    return pmc_lstd_solve(assemble_operator(data), config, w_init_prev, w_init);
}

Vector lstd_closed_form(const LstdOperatorData& op, double ridge) {
    if (ridge < 0.0) throw std::invalid_argument("lstd_closed_form: ridge must be nonnegative");
    const auto n = op.dim();
    if (ridge > 0.0) {
        const Matrix shifted = op.a_tilde + ridge * Matrix::Identity(n, n);
        return shifted.partialPivLu().solve(op.b_tilde);
    }
    // range(A~) lies in range(Phi^T), spanned by the leading Gram eigenvectors, so the
    // least-squares problem can be compressed onto that basis without changing its minimizers.
    const auto u = op.gram_eigvecs.leftCols(op.rank);
    return min_norm_solve(u.transpose() * op.a_tilde, u.transpose() * op.b_tilde, static_cast<double>(n) * 1e-12);
}

}  // namespace pmclstd
