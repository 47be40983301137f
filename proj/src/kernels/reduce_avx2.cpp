// Compiled with -mavx2 (no -mfma); only reached after a runtime CPU check.
#include "smc/kernels/reduce.hpp"

#include <immintrin.h>

namespace smc::kernels::detail {
namespace {

inline double combineLanes(__m256d acc) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sumAvx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double total = combineLanes(acc);
    for (; i < n; ++i) total += x[i];
    return total;
}

double sumSquaredDeviationsAvx2(const double* x, std::size_t n, double center) {
    const __m256d c = _mm256_set1_pd(center);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), c);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double total = combineLanes(acc);
    for (; i < n; ++i) {
        const double d = x[i] - center;
        total += d * d;
    }
    return total;
}

double lag1CrossProductsAvx2(const double* x, std::size_t n, double center) {
    if (n < 2) return 0.0;
    const std::size_t pairs = n - 1;
    const __m256d c = _mm256_set1_pd(center);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= pairs; i += 4) {
        const __m256d a = _mm256_sub_pd(_mm256_loadu_pd(x + i), c);
        const __m256d b = _mm256_sub_pd(_mm256_loadu_pd(x + i + 1), c);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(a, b));
    }
    double total = combineLanes(acc);
    for (; i < pairs; ++i) total += (x[i] - center) * (x[i + 1] - center);
    return total;
}

const ReductionKernels kAvx2{Isa::Avx2, "avx2", &sumAvx2, &sumSquaredDeviationsAvx2,
                             &lag1CrossProductsAvx2};

}  // namespace

const ReductionKernels& avx2KernelTable() { return kAvx2; }

}  // namespace smc::kernels::detail
