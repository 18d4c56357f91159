#pragma once

// Vector kernels used on the time-stepping hot path. The L1 history sum
// touches every stored state at every step, so these loops dominate the
// runtime of long fine-grid runs.
//
// Each kernel has a scalar reference implementation and, where the build
// target allows it, an AVX2+FMA (x86-64) or NEON (aarch64) variant. The
// variant is picked once at runtime from CPU feature detection.

#include <cstddef>
#include <span>
#include <string_view>

namespace fracms::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// Function table for one instruction-set variant.
struct KernelTable {
    Isa isa;
    double (*dot)(const double* x, const double* y, std::size_t n);
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // out[i] = sum_r weights[r] * rows[r * stride + i] for i < n, r < count.
    void (*weighted_sum)(const double* weights, std::size_t count,
                         const double* rows, std::size_t stride,
                         double* out, std::size_t n);
};

/// Table for `isa`, or nullptr when the variant is not compiled in or the
/// running CPU lacks the instructions.
const KernelTable* table_for(Isa isa);

/// Table selected for this process (best supported variant unless
/// scalar was forced).
const KernelTable& active();

/// Forces the scalar reference path (testing and debugging).
void set_force_scalar(bool force);

double dot(std::span<const double> x, std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void weighted_sum(std::span<const double> weights, const double* rows,
                  std::size_t stride, std::span<double> out);

}  // namespace fracms::kernels
