#pragma once

// L1 discretization of the Caputo derivative of order alpha in (0, 1) on a
// uniform time grid T_k = k * dt. The discrete operator
//
//   (1 / alpha0) * sum_{j=0}^{k} b_j (u^{k+1-j} - u^{k-j}),
//   b_j = (j+1)^{1-alpha} - j^{1-alpha},  alpha0 = Gamma(2-alpha) dt^alpha,
//
// approximates the derivative at T_{k+1}. Rewriting it as
// (u^{k+1} - w^k) / alpha0 isolates the history term w^k.

#include <span>
#include <vector>

#include "fracms/linalg.hpp"

namespace fracms {

class Trajectory;

class L1Kernel {
public:
    L1Kernel(double alpha, double dt, int steps);

    double alpha() const noexcept { return alpha_; }
    double dt() const noexcept { return dt_; }
    int steps() const noexcept { return steps_; }
    double alpha0() const noexcept { return alpha0_; }
    /// b_j for 0 <= j <= steps.
    double b(int j) const { return b_.at(static_cast<std::size_t>(j)); }
    std::span<const double> weights() const noexcept { return b_; }

    /// Coefficients c_0..c_k with w^k = sum_j c_j u^j:
    /// c_k = 1 - b_1, c_{k-p} = b_p - b_{p+1} (0 < p < k), c_0 = b_k;
    /// for k = 0 the single coefficient is 1.
    std::vector<double> history_coefficients(int k) const;

private:
    double alpha_;
    double dt_;
    int steps_;
    double alpha0_;
    std::vector<double> b_;
};

/// Validated construction: 0 < alpha < 1, dt > 0, steps >= 1.
L1Kernel make_kernel(double alpha, double dt, int steps);

/// b_j = (j+1)^{1-alpha} - j^{1-alpha}, evaluated without cancellation.
double l1_weight(double alpha, int j);

/// History term w^k from the stored states u^0..u^k of `history`
/// (k = history.size() - 1).
Vector history_rhs(const L1Kernel& kernel, const Trajectory& history);
/// Same for an explicit list of states.
Vector history_rhs(const L1Kernel& kernel, std::span<const Vector> states);

/// Discrete Caputo derivative of a scalar series u^0..u^n: entry k is the
/// approximation at T_{k+1}, for k = 0..n-1.
std::vector<double> caputo_apply(const L1Kernel& kernel, std::span<const double> samples);

}  // namespace fracms
