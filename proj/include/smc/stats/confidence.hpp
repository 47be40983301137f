#pragma once

#include <cstdint>
#include <string_view>

#include "smc/stats/running_stats.hpp"

namespace smc {

enum class DeltaMode { Absolute, Relative };

std::string_view toString(DeltaMode mode);
/// "absolute" / "relative"; anything else throws ConfigError.
DeltaMode parseDeltaMode(std::string_view text);

/// (1 - alpha) confidence interval around an estimate, with the precision
/// target it was built for.
struct CIResult {
    double estimate = 0.0;
    double halfWidth = 0.0;
    std::uint64_t n = 0;
    double alpha = 0.05;
    double deltaTarget = 0.1;
    DeltaMode deltaMode = DeltaMode::Absolute;
    double variance = 0.0;
    bool converged = false;
};

/// t_{n-1, 1-alpha/2} * sqrt(s^2 / n). Needs n >= 2.
double ciHalfWidth(const RunningStats& stats, double alpha);

/// Half-width with s^2/n inflated by (1 + rho) / (1 - rho) to account for
/// residual lag-1 correlation among batch means. Negative rho is treated as
/// 0, so the interval is never narrowed. Equals ciHalfWidth at rho = 0.
double autocorrAdjustedHalfWidth(const RunningStats& stats, double alpha, double rho);

/// Precision test: width 2*h against delta, either absolutely or relative to
/// |estimate|. Relative checks on |estimate| < 1e-12 fall back to absolute
/// and report it through `fellBackToAbsolute`.
bool meetsPrecision(double halfWidth, double estimate, double delta, DeltaMode mode,
                    bool* fellBackToAbsolute = nullptr);

}  // namespace smc
