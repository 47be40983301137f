#pragma once

#include <cstdint>
#include <span>

namespace smc {

/// Streaming count / mean / sum of squared deviations (Welford), with an
/// exact-in-expectation merge (Chan et al.). Sample variance is 0 for n <= 1.
class RunningStats {
public:
    RunningStats() = default;

    /// Rejects NaN with DomainError.
    void add(double x);
    void merge(const RunningStats& other);

    /// Two-pass construction from a complete sample, using the reduction kernels.
    static RunningStats fromSample(std::span<const double> sample);

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double m2() const { return m2_; }
    double variance() const { return n_ <= 1 ? 0.0 : m2_ / static_cast<double>(n_ - 1); }

    friend bool operator==(const RunningStats&, const RunningStats&) = default;

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Functional form of RunningStats::add.
[[nodiscard]] RunningStats updateStats(RunningStats stats, double x);

}  // namespace smc
