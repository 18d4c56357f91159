#include "fracms/fractional.hpp"

#include <cmath>
#include <string>

#include "fracms/error.hpp"
#include "fracms/kernels.hpp"
#include "fracms/trajectory.hpp"

namespace fracms {

double l1_weight(double alpha, int j) {
    if (j == 0) return 1.0;
    const double x = static_cast<double>(j);
    return std::pow(x, 1.0 - alpha) * std::expm1((1.0 - alpha) * std::log1p(1.0 / x));
}

L1Kernel::L1Kernel(double alpha, double dt, int steps) : alpha_(alpha), dt_(dt), steps_(steps) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidArgument("fractional order must lie in (0, 1), got " + std::to_string(alpha));
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");
    if (steps < 1) throw InvalidArgument("step count must be >= 1");
    alpha0_ = gamma_fn(2.0 - alpha) * std::pow(dt, alpha);
    b_.resize(static_cast<std::size_t>(steps) + 1);
    for (int j = 0; j <= steps; ++j) b_[j] = l1_weight(alpha, j);
}

L1Kernel make_kernel(double alpha, double dt, int steps) { return L1Kernel(alpha, dt, steps); }

std::vector<double> L1Kernel::history_coefficients(int k) const {
    if (k < 0 || k > steps_) throw InvalidArgument("history index " + std::to_string(k) + " out of range");
    std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
    if (k == 0) {
        c[0] = 1.0;
        return c;
    }
    c[k] = 1.0 - b_[1];
    for (int p = 1; p < k; ++p) c[k - p] = b_[p] - b_[p + 1];
    c[0] += b_[k];
    return c;
}

Vector history_rhs(const L1Kernel& kernel, const Trajectory& history) {
    if (history.empty()) throw InvalidArgument("history_rhs: empty history");
    const int k = history.size() - 1;
    const std::vector<double> c = kernel.history_coefficients(k);
    Vector w(history.dim());
    kernels::weighted_sum(c, history.data(), static_cast<std::size_t>(history.dim()),
                          std::span<double>(w.data(), static_cast<std::size_t>(w.size())));
    return w;
}

Vector history_rhs(const L1Kernel& kernel, std::span<const Vector> states) {
    if (states.empty()) throw InvalidArgument("history_rhs: empty history");
    const int k = static_cast<int>(states.size()) - 1;
    const std::vector<double> c = kernel.history_coefficients(k);
    Vector w = Vector::Zero(states[0].size());
    for (int j = 0; j <= k; ++j) w += c[j] * states[j];
    return w;
}

std::vector<double> caputo_apply(const L1Kernel& kernel, std::span<const double> samples) {
    if (samples.size() < 2) throw InvalidArgument("caputo_apply needs at least two samples");
    const int n = static_cast<int>(samples.size()) - 1;
    if (n > kernel.steps()) throw InvalidArgument("caputo_apply: series longer than the kernel");
    const double scale = 1.0 / kernel.alpha0();
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int j = 0; j <= k; ++j) s += kernel.b(j) * (samples[k + 1 - j] - samples[k - j]);
        out[k] = s * scale;
    }
    return out;
}

}  // namespace fracms
