#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "smc/error.hpp"
#include "smc/stats/confidence.hpp"
#include "smc/stats/distributions.hpp"
#include "smc/stats/normality.hpp"
#include "smc/stats/running_stats.hpp"
#include "oracles.hpp"

namespace {

using namespace smc;

double boostTQuantile(double df, double p) { return oracles::tQuantile(df, p); }
double nctQuadrature(double x, double df, double theta) { return oracles::nonCentralTCdf(x, df, theta); }

TEST(RunningStats, BatchFormula) {
    RunningStats s;
    for (double x : {1.0, 2.0, 3.0, 4.0}) s.add(x);
    EXPECT_DOUBLE_EQ(s.mean(), 2.5);
    EXPECT_NEAR(s.variance(), 5.0 / 3.0, 1e-15);
    EXPECT_EQ(s.count(), 4u);
}

TEST(RunningStats, SingleAndConstant) {
    RunningStats one;
    one.add(7.0);
    EXPECT_EQ(one.mean(), 7.0);
    EXPECT_EQ(one.variance(), 0.0);
    RunningStats constant;
    for (int i = 0; i < 50; ++i) constant.add(0.1);
    EXPECT_EQ(constant.variance(), 0.0);
}

TEST(RunningStats, MergeMatchesSequential) {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> d(3.0, 2.0);
    RunningStats all, a, b;
    for (int i = 0; i < 1000; ++i) {
        const double x = d(gen);
        all.add(x);
        (i < 313 ? a : b).add(x);
    }
    a.merge(b);
    EXPECT_EQ(a.count(), all.count());
    EXPECT_NEAR(a.mean(), all.mean(), 1e-12);
    EXPECT_NEAR(a.variance(), all.variance(), 1e-10);
}

TEST(RunningStats, RejectsNaN) {
    RunningStats s;
    EXPECT_THROW(s.add(std::nan("")), DomainError);
}

TEST(RunningStats, FromSampleAgreesWithStreaming) {
    std::vector<double> x{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
    const auto s = RunningStats::fromSample(x);
    EXPECT_DOUBLE_EQ(s.mean(), 5.0);
    EXPECT_DOUBLE_EQ(s.variance(), 32.0 / 7.0);
}

TEST(TQuantile, ReferenceValues) {
    EXPECT_EQ(tQuantile(7.0, 0.5), 0.0);
    EXPECT_NEAR(tQuantile(19.0, 0.975), 2.093, 5e-4);
    EXPECT_NEAR(tQuantile(198.0, 0.975), 1.972, 5e-4);
    EXPECT_NEAR(tQuantile(1.0, 0.975), 12.706, 5e-4);
}

TEST(TQuantile, MatchesIndependentQuantileOracle) {
    for (double df : {0.5, 1.0, 1.5, 2.0, 3.7, 5.0, 10.0, 19.0, 29.5, 50.0, 123.0, 198.0, 1000.0, 1e5}) {
        for (double p : {1e-6, 1e-3, 0.0125, 0.025, 0.05, 0.2, 0.5, 0.8, 0.95, 0.975, 0.9875, 0.999, 1 - 1e-6}) {
            const double expected = boostTQuantile(df, p);
            EXPECT_NEAR(tQuantile(df, p), expected, 1e-9 * std::max(1.0, std::abs(expected)))
                << "df=" << df << " p=" << p;
        }
    }
}

TEST(TQuantile, RejectsBadProbability) {
    EXPECT_THROW(tQuantile(5.0, 0.0), DomainError);
    EXPECT_THROW(tQuantile(5.0, 1.0), DomainError);
}

TEST(StudentT, CdfMatchesOracle) {
    for (double df : {0.7, 1.0, 4.0, 30.0, 500.0})
        for (double x : {-30.0, -3.0, -0.4, 0.0, 0.9, 2.5, 12.0}) {
            const double expected = boost::math::cdf(boost::math::students_t(df), x);
            EXPECT_NEAR(studentTCdf(x, df), expected, 1e-12) << df << " " << x;
        }
}

TEST(NonCentralT, QuadratureOracleReferencePoint) {
    const double oracle = nctQuadrature(2.0, 10.0, 1.5);
    EXPECT_NEAR(nonCentralTCdf(2.0, 10.0, 1.5), oracle, 1e-8);
}

TEST(NonCentralT, MatchesQuadratureAcrossGrid) {
    for (double df : {2.5, 10.0, 37.3, 198.0})
        for (double theta : {-2.0, 0.0, 0.5, 1.5, 4.0, 9.0})
            for (double x : {-3.0, -1.0, 0.0, 1.0, 1.97, 3.0, 8.0}) {
                EXPECT_NEAR(nonCentralTCdf(x, df, theta), nctQuadrature(x, df, theta), 1e-8)
                    << "x=" << x << " df=" << df << " theta=" << theta;
            }
}

TEST(NonCentralT, ReducesToCentralAtZeroTheta) {
    for (double df : {1.0, 3.0, 40.0})
        for (double x : {-2.0, 0.3, 5.0}) EXPECT_NEAR(nonCentralTCdf(x, df, 0.0), studentTCdf(x, df), 1e-12);
}

TEST(NonCentralT, NormalLimitAtMode) { EXPECT_NEAR(nonCentralTCdf(3.0, 1e6, 3.0), 0.5, 1e-3); }

TEST(NonCentralT, AgreesWithLibraryImplementation) {
    for (double theta : {0.3, 2.0, 20.0}) {
        const boost::math::non_central_t d(60.0, theta);
        for (double x : {theta - 2.0, theta, theta + 2.0})
            EXPECT_NEAR(nonCentralTCdf(x, 60.0, theta), boost::math::cdf(d, x), 1e-8);
    }
}

TEST(CiHalfWidth, ReferenceValues) {
    RunningStats zero;
    for (int i = 0; i < 5; ++i) zero.add(1.0);
    EXPECT_EQ(ciHalfWidth(zero, 0.05), 0.0);

    RunningStats s;
    // Construct n=20 with s^2 = 1 exactly: +-a around 0 with a^2 * 20 / 19 = 1.
    const double a = std::sqrt(19.0 / 20.0);
    for (int i = 0; i < 10; ++i) {
        s.add(a);
        s.add(-a);
    }
    ASSERT_NEAR(s.variance(), 1.0, 1e-14);
    EXPECT_NEAR(ciHalfWidth(s, 0.05), boostTQuantile(19, 0.975) * std::sqrt(1.0 / 20.0), 1e-12);
    EXPECT_NEAR(ciHalfWidth(s, 0.05), 0.4680, 1e-4);

    RunningStats two;
    two.add(std::sqrt(0.5));
    two.add(-std::sqrt(0.5));
    ASSERT_NEAR(two.variance(), 1.0, 1e-14);
    EXPECT_NEAR(ciHalfWidth(two, 0.05), 8.984, 1e-3);
}

TEST(CiHalfWidth, NeedsTwoObservations) {
    RunningStats s;
    s.add(1.0);
    EXPECT_THROW(ciHalfWidth(s, 0.05), InsufficientDataError);
}

RunningStats unitSample(std::uint64_t n) {
    RunningStats s;
    const double a = std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n));
    for (std::uint64_t i = 0; i < n / 2; ++i) {
        s.add(a);
        s.add(-a);
    }
    return s;
}

TEST(AutocorrAdjustedHalfWidth, Reductions) {
    const auto s = unitSample(124);
    EXPECT_EQ(autocorrAdjustedHalfWidth(s, 0.05, 0.0), ciHalfWidth(s, 0.05));
    EXPECT_GT(autocorrAdjustedHalfWidth(s, 0.05, 0.3), ciHalfWidth(s, 0.05));
    EXPECT_EQ(autocorrAdjustedHalfWidth(s, 0.05, -0.4), ciHalfWidth(s, 0.05));
}

TEST(AutocorrAdjustedHalfWidth, FrozenRegressionValue) {
    const auto s = unitSample(124);
    const double formula = boostTQuantile(123, 0.975) * std::sqrt(1.0 / 124.0 * 1.2 / 0.8);
    const double value = autocorrAdjustedHalfWidth(s, 0.05, 0.2);
    EXPECT_NEAR(value, formula, 1e-12);
    EXPECT_NEAR(value, 0.21770923, 1e-7);
}

TEST(Precision, AbsoluteAndRelative) {
    EXPECT_TRUE(meetsPrecision(0.05, 3.0, 0.1, DeltaMode::Absolute));
    EXPECT_FALSE(meetsPrecision(0.0501, 3.0, 0.1, DeltaMode::Absolute));
    EXPECT_TRUE(meetsPrecision(0.1, 2.0, 0.1, DeltaMode::Relative));
    EXPECT_FALSE(meetsPrecision(0.11, 2.0, 0.1, DeltaMode::Relative));
    bool fell = false;
    EXPECT_TRUE(meetsPrecision(0.04, 0.0, 0.1, DeltaMode::Relative, &fell));
    EXPECT_TRUE(fell);
    EXPECT_EQ(parseDeltaMode("relative"), DeltaMode::Relative);
    EXPECT_THROW(parseDeltaMode("percent"), ConfigError);
}

TEST(Lag1, ReferenceValues) {
    const std::vector<double> a{1, 2, 3, 4};
    EXPECT_DOUBLE_EQ(lag1Autocorrelation(a, 2.5, 5.0 / 3.0), 0.25);
    const std::vector<double> c(10, 3.0);
    EXPECT_EQ(lag1Autocorrelation(c, 3.0, 0.0), 0.0);
    std::vector<double> alt(100);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0 : 1.0;
    EXPECT_NEAR(lag1Autocorrelation(alt, 0.0, 1.0), -0.99, 1e-12);
}

TEST(Lag1, Threshold) {
    EXPECT_NEAR(lag1Threshold(124), std::sin(0.927 - 2.3263478740408408 / std::sqrt(124.0)), 1e-12);
    EXPECT_NEAR(lag1Threshold(124), 0.658, 1e-3);
    EXPECT_NEAR(lag1Threshold(8), 0.1043, 1e-3);
    EXPECT_NEAR(lag1Threshold(1u << 30), std::sin(0.927), 1e-4);
}

TEST(AndersonDarling, StatisticMatchesDefinition) {
    std::mt19937_64 gen(9);
    std::normal_distribution<double> d(1.0, 2.0);
    std::vector<double> x(57);
    for (auto& v : x) v = d(gen);
    EXPECT_NEAR(andersonDarlingStatistic(x, 1.0, 4.0), oracles::andersonDarlingStatistic(x, 1.0, 4.0), 1e-10);
}

TEST(AndersonDarling, PlottingPositionsLookNormal) {
    const boost::math::normal nd(2.0, 3.0);
    const std::size_t n = 124;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = boost::math::quantile(nd, (static_cast<double>(i) + 0.5) / n);
    EXPECT_GT(andersonDarlingPValue(x, 2.0, 9.0), 0.5);
}

TEST(AndersonDarling, TwoPointSampleRejected) {
    std::vector<double> x(124);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 ? 1.0 + 3.0 : 1.0 - 3.0;
    EXPECT_LT(andersonDarlingPValue(x, 1.0, 1.0), 0.01);
}

TEST(AndersonDarling, AffineInvariance) {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> x(40), y(40);
    for (auto& v : x) v = d(gen);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 3.0 * x[i] - 7.0;
    EXPECT_NEAR(andersonDarlingPValue(y, 3.0 * 0.1 - 7.0, 9.0 * 1.2), andersonDarlingPValue(x, 0.1, 1.2), 1e-9);
}

TEST(AndersonDarling, PValueMatchesMonteCarloOracle) {
    for (std::size_t n : {8u, 20u, 124u}) {
        const int draws = n > 100 ? 20000 : 60000;
        const auto null = oracles::andersonDarlingNullSample(n, draws, 100 + n);
        for (double zq : {0.3, 0.6, 1.0, 1.9, 2.5, 3.9}) {
            const double empirical = oracles::empiricalCdf(null, zq);
            const double se = std::sqrt(empirical * (1.0 - empirical) / draws);
            EXPECT_NEAR(andersonDarlingCdf(n, zq), empirical, 4.0 * se + 2e-3) << "n=" << n << " z=" << zq;
        }
    }
}

TEST(AndersonDarling, CanonicalUpperTailPoints) {
    // Asymptotic case-0 critical values: 1.933 (10%), 2.492 (5%), 3.857 (1%).
    EXPECT_NEAR(1.0 - andersonDarlingCdf(100000, 1.933), 0.10, 2e-3);
    EXPECT_NEAR(1.0 - andersonDarlingCdf(100000, 2.492), 0.05, 1e-3);
    EXPECT_NEAR(1.0 - andersonDarlingCdf(100000, 3.857), 0.01, 5e-4);
}

TEST(AndersonDarling, NeedsEightPoints) {
    std::vector<double> x{1, 2, 3, 4, 5, 6, 7};
    EXPECT_THROW(andersonDarlingPValue(x, 0.0, 1.0), InsufficientDataError);
}

TEST(Goodness, LowVarianceShortCircuit) {
    std::vector<double> x(124, 0.4);
    const auto g = goodnessOfFit(x, 1e-7);
    EXPECT_TRUE(g.passedByLowVariance);
    EXPECT_TRUE(goodnessPasses(g, x.size(), 0.01));
}

}  // namespace
