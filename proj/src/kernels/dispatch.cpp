#include "smc/kernels/reduce.hpp"

#include <cstdlib>
#include <string_view>

namespace smc::kernels {

namespace detail {
#if defined(SMC_HAVE_AVX2_KERNELS)
const ReductionKernels& avx2KernelTable();
#endif
#if defined(SMC_HAVE_NEON_KERNELS)
const ReductionKernels& neonKernelTable();
#endif
}  // namespace detail

const ReductionKernels* avx2Kernels() {
#if defined(SMC_HAVE_AVX2_KERNELS)
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? &detail::avx2KernelTable() : nullptr;
#else
    return nullptr;
#endif
}

const ReductionKernels* neonKernels() {
#if defined(SMC_HAVE_NEON_KERNELS)
    // Advanced SIMD is mandatory on AArch64.
    return &detail::neonKernelTable();
#else
    return nullptr;
#endif
}

namespace {

const ReductionKernels& select() {
    const char* forced = std::getenv("SMC_KERNELS");
    if (forced != nullptr) {
        const std::string_view want(forced);
        if (want == "scalar") return scalarKernels();
        if (want == "avx2" && avx2Kernels() != nullptr) return *avx2Kernels();
        if (want == "neon" && neonKernels() != nullptr) return *neonKernels();
    }
    if (const auto* k = avx2Kernels()) return *k;
    if (const auto* k = neonKernels()) return *k;
    return scalarKernels();
}

}  // namespace

const ReductionKernels& active() {
    static const ReductionKernels& chosen = select();
    return chosen;
}

}  // namespace smc::kernels
