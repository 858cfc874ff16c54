#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "heat2d/errors.hpp"

namespace heat2d {

enum class RowKind { Stencil, Dirichlet, Reduction };

// Assembled linear system A x = b in triplet form. Accumulate entries, then
// finalize() (sort, merge duplicates) before solving. Finalized systems are
// immutable and shareable.
class SparseSystem {
public:
    SparseSystem() = default;
    explicit SparseSystem(int n)
        : n_(n), rhs_(n, 0.0), row_kind_(n, RowKind::Stencil) {}

    int n() const { return n_; }

    void add(int row, int col, double value) { entries_.push_back({row, col, value}); }

    // Row becomes `u_row = value`: single unit entry plus rhs.
    void set_dirichlet(int row, double value) {
        entries_.push_back({row, row, 1.0});
        rhs_[row] = value;
        row_kind_[row] = RowKind::Dirichlet;
    }

    void add_rhs(int row, double value) { rhs_[row] += value; }
    void set_row_kind(int row, RowKind kind) { row_kind_[row] = kind; }
    RowKind row_kind(int row) const { return row_kind_[row]; }

    const std::vector<double>& rhs() const { return rhs_; }

    void finalize() {
        std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        std::vector<Entry> merged;
        merged.reserve(entries_.size());
        for (const Entry& e : entries_) {
            if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col)
                merged.back().value += e.value;
            else
                merged.push_back(e);
        }
        entries_ = std::move(merged);
        finalized_ = true;
    }
    bool finalized() const { return finalized_; }

    // Maximum number of off-diagonal couplings in any row (the "bandwidth"
    // figure quoted for the assembled operators: ~4 for a stencil row, ~8 for
    // the coarse system, ~n^O for the reduced DDM system).
    int bandwidth() const {
        std::vector<int> off(n_, 0);
        for (const Entry& e : entries_)
            if (e.row != e.col) ++off[e.row];
        return off.empty() ? 0 : *std::max_element(off.begin(), off.end());
    }

    struct Entry {
        int row;
        int col;
        double value;
    };
    const std::vector<Entry>& entries() const { return entries_; }

private:
    int n_ = 0;
    std::vector<Entry> entries_;
    std::vector<double> rhs_;
    std::vector<RowKind> row_kind_;
    bool finalized_ = false;
};

namespace detail {

inline Eigen::SparseMatrix<double> to_eigen(const SparseSystem& sys) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(sys.entries().size());
    for (const auto& e : sys.entries()) trip.emplace_back(e.row, e.col, e.value);
    Eigen::SparseMatrix<double> a(sys.n(), sys.n());
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    return a;
}

} // namespace detail

// Reusable LU factorization of a SparseSystem matrix; solve() accepts
// arbitrary right-hand sides. Direct (not iterative) by design so that
// per-phase timings are not confounded by tolerance choices.
class SparseFactor {
public:
    explicit SparseFactor(const SparseSystem& sys) : n_(sys.n()) {
        matrix_ = detail::to_eigen(sys);
        lu_.compute(matrix_);
        if (lu_.info() != Eigen::Success)
            throw SolverError("sparse LU factorization failed (structurally or numerically "
                              "singular matrix): " + std::string(lu_.lastErrorMessage()),
                              0.0);
    }

    int n() const { return n_; }

    std::vector<double> solve(const std::vector<double>& rhs) const {
        Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n_);
        Eigen::VectorXd x = lu_.solve(b);
        if (lu_.info() != Eigen::Success)
            throw SolverError("sparse LU solve failed", 0.0);
        check_residual(b, x);
        return std::vector<double>(x.data(), x.data() + n_);
    }

private:
    void check_residual(const Eigen::Map<const Eigen::VectorXd>& b,
                        const Eigen::VectorXd& x) const {
        const double resid = (matrix_ * x - b).cwiseAbs().maxCoeff();
        const double bound = 1e-10 * (1.0 + b.cwiseAbs().maxCoeff());
        if (!(resid <= bound) || !x.allFinite())
            throw SolverError("sparse solve residual " + std::to_string(resid) +
                                  " exceeds bound " + std::to_string(bound),
                              resid);
    }

    int n_;
    Eigen::SparseMatrix<double> matrix_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

// One-shot direct solve with an infinity-norm residual check
// (|Ax-b|_inf <= 1e-10 (1 + |b|_inf)). Deterministic for identical input.
inline std::vector<double> solve_sparse(const SparseSystem& sys) {
    if (!sys.finalized())
        throw InvalidParameterError("solve_sparse: system must be finalized first");
    return SparseFactor(sys).solve(sys.rhs());
}

inline constexpr int kDenseSolveCap = 64;
inline constexpr double kCondLimit = 1e12;

// Column-wise dense solve a X = b with partial pivoting, for the small
// matrices of the oversampling step. Condition estimate via SVD; matrices
// beyond kCondLimit raise IllConditionedError and the caller decides whether
// to fall back to a pseudo-inverse.
inline Eigen::MatrixXd solve_dense_small(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                         double* cond_out = nullptr) {
    if (a.rows() != a.cols())
        throw InvalidParameterError("solve_dense_small: matrix must be square");
    if (a.rows() > kDenseSolveCap)
        throw InvalidParameterError("solve_dense_small: dimension " + std::to_string(a.rows()) +
                                    " exceeds cap " + std::to_string(kDenseSolveCap));
    if (a.rows() != b.rows())
        throw InvalidParameterError("solve_dense_small: rhs row count mismatch");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (cond_out) *cond_out = cond;
    if (!(cond <= kCondLimit))
        throw IllConditionedError("solve_dense_small: condition estimate " +
                                      std::to_string(cond) + " exceeds 1e12",
                                  cond);
    return Eigen::PartialPivLU<Eigen::MatrixXd>(a).solve(b);
}

// Least-squares pseudo-inverse solve; the recorded fallback path when
// the square oversampling matrix is near-singular.
inline Eigen::MatrixXd solve_dense_pinv(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.solve(b);
}

} // namespace heat2d
