#include "smc/kernels/reduce.hpp"

#include <arm_neon.h>

namespace smc::kernels::detail {
namespace {

// Lanes 0,1 live in lo and lanes 2,3 in hi, matching the 4-lane order.
inline double combineLanes(float64x2_t lo, float64x2_t hi) {
    return (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) +
           (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
}

double sumNeon(const double* x, std::size_t n) {
    float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        lo = vaddq_f64(lo, vld1q_f64(x + i));
        hi = vaddq_f64(hi, vld1q_f64(x + i + 2));
    }
    double total = combineLanes(lo, hi);
    for (; i < n; ++i) total += x[i];
    return total;
}

double sumSquaredDeviationsNeon(const double* x, std::size_t n, double center) {
    const float64x2_t c = vdupq_n_f64(center);
    float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float64x2_t a = vsubq_f64(vld1q_f64(x + i), c);
        const float64x2_t b = vsubq_f64(vld1q_f64(x + i + 2), c);
        lo = vaddq_f64(lo, vmulq_f64(a, a));
        hi = vaddq_f64(hi, vmulq_f64(b, b));
    }
    double total = combineLanes(lo, hi);
    for (; i < n; ++i) {
        const double d = x[i] - center;
        total += d * d;
    }
    return total;
}

double lag1CrossProductsNeon(const double* x, std::size_t n, double center) {
    if (n < 2) return 0.0;
    const std::size_t pairs = n - 1;
    const float64x2_t c = vdupq_n_f64(center);
    float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= pairs; i += 4) {
        const float64x2_t a0 = vsubq_f64(vld1q_f64(x + i), c);
        const float64x2_t b0 = vsubq_f64(vld1q_f64(x + i + 1), c);
        const float64x2_t a1 = vsubq_f64(vld1q_f64(x + i + 2), c);
        const float64x2_t b1 = vsubq_f64(vld1q_f64(x + i + 3), c);
        lo = vaddq_f64(lo, vmulq_f64(a0, b0));
        hi = vaddq_f64(hi, vmulq_f64(a1, b1));
    }
    double total = combineLanes(lo, hi);
    for (; i < pairs; ++i) total += (x[i] - center) * (x[i + 1] - center);
    return total;
}

const ReductionKernels kNeon{Isa::Neon, "neon", &sumNeon, &sumSquaredDeviationsNeon,
                             &lag1CrossProductsNeon};

}  // namespace

const ReductionKernels& neonKernelTable() { return kNeon; }

}  // namespace smc::kernels::detail
