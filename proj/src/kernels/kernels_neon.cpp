#include "kernels_impl.hpp"

#include <arm_neon.h>

#include <algorithm>

namespace fracms::kernels::neon {

double dot(const double* x, const double* y, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void weighted_sum(const double* weights, std::size_t count, const double* rows,
                  std::size_t stride, double* out, std::size_t n) {
    for (std::size_t i0 = 0; i0 < n; i0 += kWeightedSumBlock) {
        const std::size_t i1 = std::min(n, i0 + kWeightedSumBlock);
        std::fill(out + i0, out + i1, 0.0);
        for (std::size_t r = 0; r < count; ++r) {
            const float64x2_t vw = vdupq_n_f64(weights[r]);
            const double* row = rows + r * stride;
            std::size_t i = i0;
            for (; i + 2 <= i1; i += 2)
                vst1q_f64(out + i, vfmaq_f64(vld1q_f64(out + i), vw, vld1q_f64(row + i)));
            for (; i < i1; ++i) out[i] += weights[r] * row[i];
        }
    }
}

}  // namespace fracms::kernels::neon
