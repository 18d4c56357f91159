#include "fracms/kernels.hpp"

#include <atomic>
#include <cassert>

#include "kernels_impl.hpp"

namespace fracms::kernels {

namespace {

constexpr KernelTable kScalar{Isa::scalar, &scalar::dot, &scalar::axpy, &scalar::weighted_sum};

#if defined(FRACMS_HAVE_AVX2_TU)
constexpr KernelTable kAvx2{Isa::avx2, &avx2::dot, &avx2::axpy, &avx2::weighted_sum};

bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}
#endif

#if defined(FRACMS_HAVE_NEON_TU)
constexpr KernelTable kNeon{Isa::neon, &neon::dot, &neon::axpy, &neon::weighted_sum};
#endif

std::atomic<bool> g_force_scalar{false};

const KernelTable& best() {
    static const KernelTable* chosen = [] {
#if defined(FRACMS_HAVE_AVX2_TU)
        if (cpu_has_avx2()) return &kAvx2;
#endif
#if defined(FRACMS_HAVE_NEON_TU)
        return &kNeon;
#endif
        return &kScalar;
    }();
    return *chosen;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

const KernelTable* table_for(Isa isa) {
    switch (isa) {
        case Isa::scalar: return &kScalar;
        case Isa::avx2:
#if defined(FRACMS_HAVE_AVX2_TU)
            return cpu_has_avx2() ? &kAvx2 : nullptr;
#else
            return nullptr;
#endif
        case Isa::neon:
#if defined(FRACMS_HAVE_NEON_TU)
            return &kNeon;
#else
            return nullptr;
#endif
    }
    return nullptr;
}

const KernelTable& active() {
    if (g_force_scalar.load(std::memory_order_relaxed)) return kScalar;
    return best();
}

void set_force_scalar(bool force) { g_force_scalar.store(force, std::memory_order_relaxed); }

double dot(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size());
    return active().dot(x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    active().axpy(a, x.data(), y.data(), x.size());
}

void weighted_sum(std::span<const double> weights, const double* rows, std::size_t stride,
                  std::span<double> out) {
    active().weighted_sum(weights.data(), weights.size(), rows, stride, out.data(), out.size());
}

}  // namespace fracms::kernels
