// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "kernels_impl.hpp"

#include <immintrin.h>

#include <algorithm>

namespace fracms::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 8), _mm256_loadu_pd(y + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 12), _mm256_loadu_pd(y + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double s = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void weighted_sum(const double* weights, std::size_t count, const double* rows,
                  std::size_t stride, double* out, std::size_t n) {
    for (std::size_t i0 = 0; i0 < n; i0 += kWeightedSumBlock) {
        const std::size_t i1 = std::min(n, i0 + kWeightedSumBlock);
        std::fill(out + i0, out + i1, 0.0);
        const std::size_t vec_end = i0 + (i1 - i0) / 4 * 4;
        for (std::size_t r = 0; r < count; ++r) {
            const double w = weights[r];
            const __m256d vw = _mm256_set1_pd(w);
            const double* row = rows + r * stride;
            std::size_t i = i0;
            for (; i + 8 <= vec_end; i += 8) {
                __m256d o0 = _mm256_loadu_pd(out + i);
                __m256d o1 = _mm256_loadu_pd(out + i + 4);
                o0 = _mm256_fmadd_pd(vw, _mm256_loadu_pd(row + i), o0);
                o1 = _mm256_fmadd_pd(vw, _mm256_loadu_pd(row + i + 4), o1);
                _mm256_storeu_pd(out + i, o0);
                _mm256_storeu_pd(out + i + 4, o1);
            }
            for (; i < vec_end; i += 4) {
                __m256d o = _mm256_loadu_pd(out + i);
                _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vw, _mm256_loadu_pd(row + i), o));
            }
            for (; i < i1; ++i) out[i] += w * row[i];
        }
    }
}

}  // namespace fracms::kernels::avx2
