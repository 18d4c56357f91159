#pragma once

// Independent reference implementations used as test oracles. They use
// plain loops on std::vector so they share no code with the library's
// Eigen-based kernels.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "fracms/linalg.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const fracms::Matrix& m) {
    Dense d(m.rows(), std::vector<double>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
    return d;
}

/// Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(Dense a, std::vector<double> b) {
    const std::size_t n = a.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        if (a[p][k] == 0.0) throw std::runtime_error("oracle: singular matrix");
        std::swap(a[p], a[k]);
        std::swap(b[p], b[k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

/// Number of eigenvalues of the symmetric-definite pencil (A, B) below
/// sigma: the count of negative pivots of A - sigma B (Sylvester inertia),
/// computed by symmetric elimination without pivoting.
inline int count_below(const Dense& a, const Dense& b, double sigma) {
    const std::size_t n = a.size();
    Dense m(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i][j] = a[i][j] - sigma * b[i][j];
    int neg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double d = m[k][k];
        if (d == 0.0) d = -1e-300;
        if (d < 0) ++neg;
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = m[i][k] / d;
            for (std::size_t j = k + 1; j < n; ++j) m[i][j] -= f * m[k][j];
        }
    }
    return neg;
}

/// All eigenvalues of (A, B) by bisection on the inertia count, i.e. on the
/// sign structure of det(A - lambda B).
inline std::vector<double> pencil_eigenvalues(const Dense& a, const Dense& b, double lo, double hi) {
    const std::size_t n = a.size();
    std::vector<double> out;
    for (std::size_t k = 0; k < n; ++k) {
        double l = lo, h = hi;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (l + h);
            if (count_below(a, b, mid) > static_cast<int>(k)) h = mid;
            else l = mid;
        }
        out.push_back(0.5 * (l + h));
    }
    return out;
}

/// Modified Gram-Schmidt in the inner product x^T M y.
inline Dense gram_schmidt(const Dense& cols, const Dense& m) {
    auto inner = [&m](const std::vector<double>& x, const std::vector<double>& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < y.size(); ++j) s += x[i] * m[i][j] * y[j];
        return s;
    };
    Dense q;
    for (std::vector<double> v : cols) {
        for (const auto& u : q) {
            const double c = inner(u, v);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * u[i];
        }
        const double nv = std::sqrt(inner(v, v));
        for (double& x : v) x /= nv;
        q.push_back(v);
    }
    return q;
}

/// Gauss-Legendre rule on [a, b] with n points (Newton iteration on P_n).
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n) {
    double sum = 0.0;
    for (int i = 1; i <= n; ++i) {
        double x = std::cos(M_PI * (i - 0.25) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        sum += w * f(0.5 * (b - a) * x + 0.5 * (a + b));
    }
    return 0.5 * (b - a) * sum;
}

inline fracms::Matrix random_spd(int n, std::mt19937_64& rng, double shift = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    fracms::Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = u(rng);
    return g * g.transpose() + shift * fracms::Matrix::Identity(n, n);
}

inline fracms::Matrix random_matrix(int r, int c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    fracms::Matrix g(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) g(i, j) = u(rng);
    return g;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace oracle
