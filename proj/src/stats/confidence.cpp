#include "smc/stats/confidence.hpp"

#include <cmath>
#include <string>

#include "smc/error.hpp"
#include "smc/stats/distributions.hpp"

namespace smc {

std::string_view toString(DeltaMode mode) {
    return mode == DeltaMode::Absolute ? "absolute" : "relative";
}

DeltaMode parseDeltaMode(std::string_view text) {
    if (text == "absolute" || text == "abs") return DeltaMode::Absolute;
    if (text == "relative" || text == "rel") return DeltaMode::Relative;
    throw ConfigError("delta mode must be 'absolute' or 'relative', got '" + std::string(text) + "'");
}

namespace {

void checkAlpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
}

}  // namespace

double ciHalfWidth(const RunningStats& stats, double alpha) {
    checkAlpha(alpha);
    if (stats.count() < 2) throw InsufficientDataError("confidence interval needs n >= 2");
    const double n = static_cast<double>(stats.count());
    return tQuantile(n - 1.0, 1.0 - alpha / 2.0) * std::sqrt(stats.variance() / n);
}

double autocorrAdjustedHalfWidth(const RunningStats& stats, double alpha, double rho) {
    checkAlpha(alpha);
    if (!(std::fabs(rho) < 1.0)) throw DomainError("autocorrelation must satisfy |rho| < 1");
    if (stats.count() < 2) throw InsufficientDataError("confidence interval needs n >= 2");
    const double n = static_cast<double>(stats.count());
    const double r = rho > 0.0 ? rho : 0.0;
    const double inflation = (1.0 + r) / (1.0 - r);
    return tQuantile(n - 1.0, 1.0 - alpha / 2.0) * std::sqrt(stats.variance() / n * inflation);
}

bool meetsPrecision(double halfWidth, double estimate, double delta, DeltaMode mode,
                    bool* fellBackToAbsolute) {
    if (fellBackToAbsolute != nullptr) *fellBackToAbsolute = false;
    const double width = 2.0 * halfWidth;
    if (mode == DeltaMode::Relative) {
        if (std::fabs(estimate) >= 1e-12) return width / std::fabs(estimate) <= delta;
        if (fellBackToAbsolute != nullptr) *fellBackToAbsolute = true;
    }
    return width <= delta;
}

}  // namespace smc
