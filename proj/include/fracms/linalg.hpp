#pragma once

// Numeric kernels: sparse SPD factorization, dense generalized symmetric
// eigenproblems, equality-constrained (KKT) solves and the Gamma function.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>
#include <span>
#include <vector>

namespace fracms {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
/// Row-major sparse storage for constraint matrices (one constraint per row).
using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// Default relative residual accepted by the sparse solvers.
inline constexpr double kResidualTol = 1e-10;
/// Pivots below this multiple of the largest diagonal entry are rejected.
inline constexpr double kPivotRel = 1e-13;

/// Symmetric sparse matrix in full (both triangles) storage with every
/// diagonal entry structurally present.
class SparseSym {
public:
    SparseSym() = default;
    /// Takes ownership of `m`; throws if it is not square and symmetric.
    explicit SparseSym(SparseMatrix m);

    static SparseSym from_triplets(int n, const std::vector<Triplet>& triplets);
    static SparseSym from_dense(const Matrix& m);
    static SparseSym identity(int n);

    int n() const noexcept { return static_cast<int>(m_.rows()); }
    const SparseMatrix& matrix() const noexcept { return m_; }
    Matrix dense() const { return Matrix(m_); }
    double max_diagonal() const;

    Vector operator*(const Vector& x) const { return m_ * x; }
    /// x^T A y
    double inner(const Vector& x, const Vector& y) const { return x.dot(m_ * y); }
    double quad(const Vector& x) const { return inner(x, x); }

    /// Rows and columns `idx` (in that order).
    SparseSym principal_submatrix(std::span<const int> idx) const;

private:
    SparseMatrix m_;
};

/// Sparse LDL^T factorization of an SPD matrix, computed once and reused.
class SpdFactor {
public:
    SpdFactor() = default;
    explicit SpdFactor(const SparseSym& a, double pivot_rel = kPivotRel);

    int n() const noexcept { return a_ ? a_->n() : 0; }
    /// Solves A x = b with at most two refinement sweeps. Accepts when
    /// ||A x - b|| <= tol ||b|| or, failing that, when the normwise backward
    /// error ||A x - b|| / (||A|| ||x|| + ||b||) (infinity norms) is below
    /// tol; throws SolverError otherwise.
    Vector solve(const Vector& b, double tol = kResidualTol) const;
    /// Multiple right-hand sides, no residual check.
    Matrix solve_many(const Matrix& b) const;

private:
    std::shared_ptr<const SparseSym> a_;
    std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
    double norm_inf_ = 0.0;
};

Vector spd_solve(const SparseSym& a, const Vector& b, double tol = kResidualTol);

/// Eigenpairs in ascending order, vectors normalized so that V^T B V = I and
/// the largest-magnitude entry of each vector is positive.
struct EigPairs {
    Vector values;
    Matrix vectors;
    int count() const noexcept { return static_cast<int>(values.size()); }
};

EigPairs gen_eig_smallest(const Matrix& a, const Matrix& b, int m);
EigPairs gen_eig_smallest(const SparseSym& a, const SparseSym& b, int m);

struct KktSolution {
    Vector x;
    Vector multipliers;
};

/// Solves  A x + C^T mu = b,  C x = g  for many right-hand sides with one
/// factorization. A must be SPD on ker(C); when A itself is not SPD the
/// augmented operator A + rho C^T C is factored instead.
class KktSolver {
public:
    KktSolver(const SparseSym& a, SparseRows c);

    int n() const noexcept { return a_.n(); }
    int constraints() const noexcept { return static_cast<int>(c_.rows()); }
    KktSolution solve(const Vector& b, const Vector& g) const;
    /// Solution for b = 0, the case used by the multiscale basis solves.
    KktSolution solve_constraints(const Vector& g) const;

private:
    KktSolution solve_once(const Vector& b, const Vector& g) const;
    Vector schur_solve(const Vector& r) const;

    SparseSym a_;
    SparseRows c_;
    double rho_ = 0.0;
    SpdFactor factor_;
    Matrix ainv_ct_;      // A^{-1} C^T
    Matrix schur_chol_;   // lower Cholesky factor of C A^{-1} C^T
};

KktSolution kkt_solve(const SparseSym& a, const SparseRows& c, const Vector& b, const Vector& g);
KktSolution kkt_solve(const SparseSym& a, const Matrix& c, const Vector& b, const Vector& g);

/// Gamma function on (0.5, 2.5].
double gamma_fn(double x);

}  // namespace fracms
