#pragma once

#include <cstddef>

namespace fracms::kernels {

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void weighted_sum(const double* weights, std::size_t count, const double* rows,
                  std::size_t stride, double* out, std::size_t n);
}  // namespace scalar

#if defined(FRACMS_HAVE_AVX2_TU)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void weighted_sum(const double* weights, std::size_t count, const double* rows,
                  std::size_t stride, double* out, std::size_t n);
}  // namespace avx2
#endif

#if defined(FRACMS_HAVE_NEON_TU)
namespace neon {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void weighted_sum(const double* weights, std::size_t count, const double* rows,
                  std::size_t stride, double* out, std::size_t n);
}  // namespace neon
#endif

// Column block processed per pass of weighted_sum; the output block stays
// in L1 while all rows stream through it.
inline constexpr std::size_t kWeightedSumBlock = 512;

}  // namespace fracms::kernels
