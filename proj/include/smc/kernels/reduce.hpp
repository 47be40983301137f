#pragma once

// Data-parallel reductions used by the estimators: plain sums, centred sums
// of squares and lag-1 cross products.
//
// Every variant accumulates in four interleaved lanes (element i goes to
// lane i % 4 for the full-width prefix), combines the lanes as
// (l0 + l1) + (l2 + l3) and then adds the tail left to right. The scalar
// reference follows the same order, so all variants return identical bits
// and the active variant never changes analysis output.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace smc::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct ReductionKernels {
    Isa isa;
    std::string_view name;
    double (*sum)(const double* x, std::size_t n);
    double (*sumSquaredDeviations)(const double* x, std::size_t n, double center);
    // sum over i < n-1 of (x[i]-center)*(x[i+1]-center)
    double (*lag1CrossProducts)(const double* x, std::size_t n, double center);
};

const ReductionKernels& scalarKernels();
/// nullptr when the variant is not compiled in or the CPU lacks the ISA.
const ReductionKernels* avx2Kernels();
const ReductionKernels* neonKernels();

/// Best supported variant, chosen once per process. The environment
/// variable SMC_KERNELS=scalar|avx2|neon forces a variant when supported.
const ReductionKernels& active();

inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

inline double sumSquaredDeviations(std::span<const double> x, double center) {
    return active().sumSquaredDeviations(x.data(), x.size(), center);
}

inline double lag1CrossProducts(std::span<const double> x, double center) {
    return active().lag1CrossProducts(x.data(), x.size(), center);
}

/// Streaming sum over an unbounded sequence. Values are staged in a fixed
/// chunk and reduced with the active kernel; chunk totals are added in
/// arrival order, so the result depends only on the input sequence.
class ChunkedSum {
public:
    static constexpr std::size_t kChunk = 512;

    void add(double x) {
        buffer_[fill_++] = x;
        if (fill_ == kChunk) flush();
    }

    double total() const {
        return fill_ == 0 ? total_ : total_ + sum(std::span<const double>(buffer_.data(), fill_));
    }

    std::size_t count() const { return count_ + fill_; }

    void clear() {
        total_ = 0.0;
        count_ = 0;
        fill_ = 0;
    }

private:
    void flush() {
        total_ += sum(std::span<const double>(buffer_.data(), fill_));
        count_ += fill_;
        fill_ = 0;
    }

    std::array<double, kChunk> buffer_{};
    std::size_t fill_ = 0;
    std::size_t count_ = 0;
    double total_ = 0.0;
};

}  // namespace smc::kernels
