#include "fracms/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fracms/error.hpp"
#include "fracms/raster.hpp"

namespace fracms {

namespace {

void normalize_signs(Matrix& v) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        Eigen::Index imax = 0;
        v.col(j).cwiseAbs().maxCoeff(&imax);
        if (v(imax, j) < 0) v.col(j) = -v.col(j);
    }
}

}  // namespace

// --- SparseSym --------------------------------------------------------------

SparseSym::SparseSym(SparseMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw InvalidArgument("SparseSym: matrix is not square");
    m_.makeCompressed();
    double scale = 0.0;
    for (int k = 0; k < m_.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m_, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
    const SparseMatrix diff = SparseMatrix(m_.transpose()) - m_;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(diff, k); it; ++it)
            if (std::abs(it.value()) > 1e-12 * scale)
                throw InvalidArgument("SparseSym: matrix is not symmetric at (" + std::to_string(it.row()) +
                                      ", " + std::to_string(it.col()) + ")");
    // Structural diagonal.
    bool missing = false;
    for (int k = 0; k < m_.cols() && !missing; ++k) {
        bool found = false;
        for (SparseMatrix::InnerIterator it(m_, k); it; ++it)
            if (it.row() == k) found = true;
        missing = !found;
    }
    if (missing) {
        std::vector<Triplet> t;
        t.reserve(m_.nonZeros() + m_.rows());
        for (int k = 0; k < m_.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(m_, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
        for (int k = 0; k < m_.rows(); ++k) t.emplace_back(k, k, 0.0);
        SparseMatrix full(m_.rows(), m_.cols());
        full.setFromTriplets(t.begin(), t.end());
        m_ = std::move(full);
        m_.makeCompressed();
    }
}

SparseSym SparseSym::from_triplets(int n, const std::vector<Triplet>& triplets) {
    std::vector<Triplet> t = triplets;
    for (int k = 0; k < n; ++k) t.emplace_back(k, k, 0.0);
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return SparseSym(std::move(m));
}

SparseSym SparseSym::from_dense(const Matrix& m) {
    if (m.rows() != m.cols()) throw InvalidArgument("SparseSym: matrix is not square");
    std::vector<Triplet> t;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != 0.0) t.emplace_back(static_cast<int>(i), static_cast<int>(j), m(i, j));
    return from_triplets(static_cast<int>(m.rows()), t);
}

SparseSym SparseSym::identity(int n) {
    std::vector<Triplet> t;
    for (int k = 0; k < n; ++k) t.emplace_back(k, k, 1.0);
    return from_triplets(n, t);
}

double SparseSym::max_diagonal() const {
    double d = 0.0;
    for (int k = 0; k < m_.cols(); ++k) d = std::max(d, m_.coeff(k, k));
    return d;
}

SparseSym SparseSym::principal_submatrix(std::span<const int> idx) const {
    std::vector<int> local(m_.rows(), -1);
    for (std::size_t i = 0; i < idx.size(); ++i) local[idx[i]] = static_cast<int>(i);
    std::vector<Triplet> t;
    for (std::size_t j = 0; j < idx.size(); ++j)
        for (SparseMatrix::InnerIterator it(m_, idx[j]); it; ++it) {
            const int li = local[it.row()];
            if (li >= 0) t.emplace_back(li, static_cast<int>(j), it.value());
        }
    SparseMatrix sub(static_cast<int>(idx.size()), static_cast<int>(idx.size()));
    sub.setFromTriplets(t.begin(), t.end());
    return SparseSym(std::move(sub));
}

// --- SpdFactor --------------------------------------------------------------

SpdFactor::SpdFactor(const SparseSym& a, double pivot_rel)
    : a_(std::make_shared<SparseSym>(a)), ldlt_(std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>()) {
    ldlt_->compute(a_->matrix());
    if (ldlt_->info() != Eigen::Success) throw SolverError("sparse LDL^T factorization failed");
    for (int k = 0; k < a_->matrix().outerSize(); ++k) {
        double col = 0.0;
        for (SparseMatrix::InnerIterator it(a_->matrix(), k); it; ++it) col += std::abs(it.value());
        norm_inf_ = std::max(norm_inf_, col);  // symmetric: column sums equal row sums
    }
    const double threshold = pivot_rel * a_->max_diagonal();
    const Vector d = ldlt_->vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (!(d[i] > threshold))
            throw SolverError("matrix is not positive definite: pivot " + std::to_string(d[i]) +
                              " at position " + std::to_string(i));
}

Vector SpdFactor::solve(const Vector& b, double tol) const {
    if (!ldlt_) throw SolverError("SpdFactor used before factorization");
    if (b.size() != a_->n()) throw InvalidArgument("spd solve: dimension mismatch");
    const double bnorm = b.lpNorm<Eigen::Infinity>();
    Vector x = ldlt_->solve(b);
    double rnorm = 0.0;
    for (int sweep = 0;; ++sweep) {
        const Vector r = b - a_->matrix() * x;
        rnorm = r.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(rnorm)) throw SolverError("spd solve produced non-finite values");
        if (rnorm <= tol * bnorm || sweep == 2) break;
        x += ldlt_->solve(r);
    }
    // Refinement stalls at the rounding floor eps * ||A|| ||x||, which can
    // exceed tol * ||b|| for badly conditioned high-contrast matrices; accept
    // any solution with normwise backward error below tol.
    const double backward = rnorm / (norm_inf_ * x.lpNorm<Eigen::Infinity>() + bnorm);
    if (!(rnorm <= tol * bnorm || backward <= tol))
        throw SolverError("spd solve: residual " + format_double(rnorm) + " with backward error " +
                          format_double(backward) + " above " + format_double(tol));
    return x;
}

Matrix SpdFactor::solve_many(const Matrix& b) const {
    if (!ldlt_) throw SolverError("SpdFactor used before factorization");
    return ldlt_->solve(b);
}

Vector spd_solve(const SparseSym& a, const Vector& b, double tol) { return SpdFactor(a).solve(b, tol); }

// --- Eigenproblems ----------------------------------------------------------

EigPairs gen_eig_smallest(const Matrix& a, const Matrix& b, int m) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || b.rows() != n || b.cols() != n)
        throw InvalidArgument("gen_eig_smallest: dimension mismatch");
    if (m < 0 || m > n)
        throw InvalidArgument("gen_eig_smallest: requested " + std::to_string(m) + " pairs of a " +
                              std::to_string(n) + "-dimensional problem");
    const Matrix as = 0.5 * (a + a.transpose());
    const Matrix bs = 0.5 * (b + b.transpose());
    Eigen::LLT<Matrix> llt(bs);
    if (llt.info() != Eigen::Success) throw SolverError("gen_eig_smallest: B is not positive definite");
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(as, bs, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) throw SolverError("gen_eig_smallest: eigensolver did not converge");
    EigPairs out;
    out.values = es.eigenvalues().head(m);
    out.vectors = es.eigenvectors().leftCols(m);
    normalize_signs(out.vectors);
    return out;
}

EigPairs gen_eig_smallest(const SparseSym& a, const SparseSym& b, int m) {
    return gen_eig_smallest(a.dense(), b.dense(), m);
}

// --- KKT --------------------------------------------------------------------

KktSolver::KktSolver(const SparseSym& a, SparseRows c) : a_(a), c_(std::move(c)) {
    if (c_.cols() != a_.n()) throw InvalidArgument("kkt: constraint matrix has wrong column count");
    try {
        factor_ = SpdFactor(a_);
    } catch (const SolverError&) {
        if (c_.rows() == 0) throw;
        // A is only SPD on ker(C): factor the augmented operator.
        const SparseMatrix ctc = SparseMatrix(c_.transpose()) * c_;
        double ctc_diag = 0.0;
        for (int k = 0; k < ctc.cols(); ++k) ctc_diag = std::max(ctc_diag, ctc.coeff(k, k));
        rho_ = std::max(a_.max_diagonal(), 1.0) / std::max(ctc_diag, 1e-300);
        factor_ = SpdFactor(SparseSym(SparseMatrix(a_.matrix() + rho_ * ctc)));
    }
    const Eigen::Index m = c_.rows();
    if (m == 0) return;
    ainv_ct_ = factor_.solve_many(Matrix(c_.transpose()));
    Matrix s = c_ * ainv_ct_;
    s = 0.5 * (s + s.transpose());

    // Unpivoted Cholesky so the first dependent row can be named.
    schur_chol_ = Matrix::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        double d = s(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= schur_chol_(j, k) * schur_chol_(j, k);
        if (!(d > 1e-12 * s(j, j)) || !(s(j, j) > 0.0))
            throw RankDeficientError("kkt: constraint " + std::to_string(j) +
                                         " is linearly dependent on the preceding constraints",
                                     static_cast<int>(j));
        const double ljj = std::sqrt(d);
        schur_chol_(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < m; ++i) {
            double v = s(i, j);
            for (Eigen::Index k = 0; k < j; ++k) v -= schur_chol_(i, k) * schur_chol_(j, k);
            schur_chol_(i, j) = v / ljj;
        }
    }
}

Vector KktSolver::schur_solve(const Vector& r) const {
    const auto l = schur_chol_.triangularView<Eigen::Lower>();
    return l.transpose().solve(l.solve(r));
}

KktSolution KktSolver::solve_once(const Vector& b, const Vector& g) const {
    KktSolution out;
    Vector rhs = b;
    if (rho_ != 0.0) rhs += rho_ * (c_.transpose() * g);
    Vector x0 = factor_.solve_many(rhs);
    if (c_.rows() == 0) {
        out.x = std::move(x0);
        out.multipliers = Vector(0);
        return out;
    }
    out.multipliers = schur_solve(c_ * x0 - g);
    out.x = x0 - ainv_ct_ * out.multipliers;
    return out;
}

KktSolution KktSolver::solve(const Vector& b, const Vector& g) const {
    if (b.size() != n() || g.size() != constraints()) throw InvalidArgument("kkt: dimension mismatch");
    KktSolution sol = solve_once(b, g);
    // Two sweeps of iterative refinement on the full saddle-point residual.
    for (int sweep = 0; sweep < 2; ++sweep) {
        Vector r1 = b - a_.matrix() * sol.x;
        if (constraints() > 0) r1 -= c_.transpose() * sol.multipliers;
        const Vector r2 = g - c_ * sol.x;
        const KktSolution corr = solve_once(r1, r2);
        sol.x += corr.x;
        if (constraints() > 0) sol.multipliers += corr.multipliers;
    }
    if (!sol.x.allFinite()) throw SolverError("kkt solve produced non-finite values");
    return sol;
}

KktSolution KktSolver::solve_constraints(const Vector& g) const { return solve(Vector::Zero(n()), g); }

KktSolution kkt_solve(const SparseSym& a, const SparseRows& c, const Vector& b, const Vector& g) {
    return KktSolver(a, c).solve(b, g);
}

KktSolution kkt_solve(const SparseSym& a, const Matrix& c, const Vector& b, const Vector& g) {
    if (c.cols() != a.n()) throw InvalidArgument("kkt: constraint matrix has wrong column count");
    const SparseRows cs = c.sparseView();
    return kkt_solve(a, cs, b, g);
}

// --- Gamma ------------------------------------------------------------------

double gamma_fn(double x) {
    if (!(x > 0.5 && x <= 2.5))
        throw InvalidArgument("gamma_fn: argument " + std::to_string(x) + " outside (0.5, 2.5]");
    return std::tgamma(x);
}

}  // namespace fracms
