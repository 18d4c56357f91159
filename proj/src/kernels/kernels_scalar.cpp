#include "kernels_impl.hpp"

#include <algorithm>

namespace fracms::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void weighted_sum(const double* weights, std::size_t count, const double* rows,
                  std::size_t stride, double* out, std::size_t n) {
    for (std::size_t i0 = 0; i0 < n; i0 += kWeightedSumBlock) {
        const std::size_t i1 = std::min(n, i0 + kWeightedSumBlock);
        std::fill(out + i0, out + i1, 0.0);
        for (std::size_t r = 0; r < count; ++r) {
            const double w = weights[r];
            const double* row = rows + r * stride;
            for (std::size_t i = i0; i < i1; ++i) out[i] += w * row[i];
        }
    }
}

}  // namespace fracms::kernels::scalar
