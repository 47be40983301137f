#include "smc/stats/running_stats.hpp"

#include <cmath>

#include "smc/error.hpp"
#include "smc/kernels/reduce.hpp"

namespace smc {

void RunningStats::add(double x) {
    if (std::isnan(x)) throw DomainError("RunningStats: NaN sample");
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
    if (m2_ < 0.0) m2_ = 0.0;
}

void RunningStats::merge(const RunningStats& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double total = na + nb;
    const double delta = other.mean_ - mean_;
    mean_ += delta * (nb / total);
    m2_ += other.m2_ + delta * delta * (na * nb / total);
    n_ += other.n_;
}

RunningStats RunningStats::fromSample(std::span<const double> sample) {
    RunningStats s;
    if (sample.empty()) return s;
    for (double x : sample)
        if (std::isnan(x)) throw DomainError("RunningStats: NaN sample");
    s.n_ = sample.size();
    s.mean_ = kernels::sum(sample) / static_cast<double>(sample.size());
    s.m2_ = kernels::sumSquaredDeviations(sample, s.mean_);
    return s;
}

RunningStats updateStats(RunningStats stats, double x) {
    stats.add(x);
    return stats;
}

}  // namespace smc
