#include "smc/kernels/reduce.hpp"

namespace smc::kernels {
namespace {

double sumScalar(const double* x, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        lane[0] += x[i];
        lane[1] += x[i + 1];
        lane[2] += x[i + 2];
        lane[3] += x[i + 3];
    }
    double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (; i < n; ++i) total += x[i];
    return total;
}

double sumSquaredDeviationsScalar(const double* x, std::size_t n, double center) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (std::size_t j = 0; j < 4; ++j) {
            const double d = x[i + j] - center;
            lane[j] += d * d;
        }
    }
    double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (; i < n; ++i) {
        const double d = x[i] - center;
        total += d * d;
    }
    return total;
}

double lag1CrossProductsScalar(const double* x, std::size_t n, double center) {
    if (n < 2) return 0.0;
    const std::size_t pairs = n - 1;
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= pairs; i += 4) {
        for (std::size_t j = 0; j < 4; ++j) {
            const double a = x[i + j] - center;
            const double b = x[i + j + 1] - center;
            lane[j] += a * b;
        }
    }
    double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (; i < pairs; ++i) total += (x[i] - center) * (x[i + 1] - center);
    return total;
}

const ReductionKernels kScalar{Isa::Scalar, "scalar", &sumScalar, &sumSquaredDeviationsScalar,
                               &lag1CrossProductsScalar};

}  // namespace

const ReductionKernels& scalarKernels() { return kScalar; }

}  // namespace smc::kernels
