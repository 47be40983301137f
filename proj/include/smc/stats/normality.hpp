#pragma once

#include <cstddef>
#include <span>

namespace smc {

/// A^2 for H0 "sample ~ Normal(mu, sigma2)" with both parameters treated as
/// known (case 0). Returns +inf when a point sits beyond double range of the
/// normal CDF.
double andersonDarlingStatistic(std::span<const double> sample, double mu, double sigma2);

/// P(A^2_n <= z) under H0, case 0: Marsaglia & Marsaglia (2004) asymptotic
/// approximation plus their finite-n correction.
double andersonDarlingCdf(std::size_t n, double z);

/// p-value of the case-0 test. Requires sample.size() >= 8 and sigma2 > 0.
double andersonDarlingPValue(std::span<const double> sample, double mu, double sigma2);

/// sum_{i<n-1}(x_i - mean)(x_{i+1} - mean) / sum_i (x_i - mean)^2, or 0 when
/// the sample has no spread. `variance` is only used for the zero check.
double lag1Autocorrelation(std::span<const double> sample, double mean, double variance);

/// rho* = sin(0.927 - z_{0.99} / sqrt(sampleSize)).
double lag1Threshold(std::size_t sampleSize);

struct GoodnessResult {
    double adPValue = 0.0;
    double lag1 = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    bool passedByLowVariance = false;
};

/// The batch-means goodness checks: moments of `batchMeans`, then (unless
/// the variance is at most minVar) the Anderson-Darling p-value and lag-1
/// autocorrelation evaluated at those moments. On the low-variance path
/// adPValue and lag1 stay at the (0, 0) sentinel.
GoodnessResult goodnessOfFit(std::span<const double> batchMeans, double minVar);

/// Pass rule shared by warmup and batch means: low variance, or
/// p-value > aStar and lag1 <= lag1Threshold(n).
bool goodnessPasses(const GoodnessResult& g, std::size_t n, double aStar);

}  // namespace smc
