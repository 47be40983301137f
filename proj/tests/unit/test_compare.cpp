#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "smc/analysis/compare.hpp"
#include "smc/analysis/transient.hpp"
#include "smc/error.hpp"
#include "smc/stats/running_stats.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace {

using namespace smc;
using namespace smc::analysis;

double monteCarloPower(double var, std::uint64_t n, double aW, double epsilon, std::uint64_t seed) {
    return oracles::welchPowerMonteCarlo(var, n, var, n, aW, epsilon, 10000, seed);
}

TEST(Welch, HandEvaluation) {
    const auto o = welchTest({1.0, 1.0, 100}, {1.5, 1.0, 100}, 0.05);
    EXPECT_NEAR(o.tau, -3.5355339059, 1e-9);
    EXPECT_NEAR(o.nu, 198.0, 1e-9);
    EXPECT_TRUE(o.reject);
    EXPECT_FALSE(o.degenerate);
}

TEST(Welch, IdenticalCellsNeverReject) {
    const auto o = welchTest({2.0, 0.3, 50}, {2.0, 0.3, 50}, 0.05);
    EXPECT_EQ(o.tau, 0.0);
    EXPECT_FALSE(o.reject);
}

TEST(Welch, DegenerateCells) {
    auto o = welchTest({1.0, 0.0, 20}, {1.0, 0.0, 20}, 0.05);
    EXPECT_TRUE(o.degenerate);
    EXPECT_FALSE(o.reject);
    EXPECT_EQ(o.tau, 0.0);
    EXPECT_EQ(o.nu, 38.0);
    o = welchTest({1.0, 0.0, 20}, {2.0, 0.0, 20}, 0.05);
    EXPECT_TRUE(o.degenerate);
    EXPECT_TRUE(o.reject);
    EXPECT_TRUE(std::isinf(o.tau));
}

TEST(WelchPower, Limits) {
    const CellSummary a{0.0, 1.0, 400}, b{0.0, 1.0, 400};
    EXPECT_NEAR(welchPower(a, b, 0.05, 1e-12), 0.05, 1e-9);
    const double scale = std::sqrt(1.0 / 400 + 1.0 / 400);
    const CellSummary big{0.0, 1.0, 1000000};
    EXPECT_GT(welchPower(big, big, 0.05, 5.0 * std::sqrt(2.0 / 1e6)), 0.99);
    EXPECT_GT(welchPower(a, b, 0.05, 3.0 * scale), welchPower(a, b, 0.05, 1.0 * scale));
    EXPECT_LE(welchPowerUpperTail(a, b, 0.05, 2.0 * scale), welchPower(a, b, 0.05, 2.0 * scale));
}

TEST(WelchPower, MatchesMonteCarloOnFixedPair) {
    const CellSummary a{0.0, 1.0, 378}, b{0.0, 1.0, 378};
    const double analytic = welchPower(a, b, 0.025, 0.005);
    EXPECT_NEAR(analytic, monteCarloPower(1.0, 378, 0.025, 0.005, 1), 0.05);
}

TEST(WelchPower, MatchesMonteCarloWithRealEffect) {
    const CellSummary a{0.0, 2.0, 60}, b{0.0, 2.0, 60};
    const double analytic = welchPower(a, b, 0.05, 0.6);
    EXPECT_NEAR(analytic, monteCarloPower(2.0, 60, 0.05, 0.6, 2), 0.05);
}

ExperimentSummary summary(std::vector<std::tuple<std::string, std::uint64_t, CellSummary>> cells) {
    ExperimentSummary s;
    for (auto& [o, t, c] : cells) s.cells.push_back({o, t, c});
    return s;
}

TEST(CompareExperiments, SelfComparisonNeverRejects) {
    const auto s = summary({{"x", 0, {1.0, 1.0, 40}}, {"x", 5, {2.0, 3.0, 40}}, {"y", 5, {0.1, 0.2, 60}}});
    for (const auto& row : compareExperiments(s, s, 0.05, 0.1)) EXPECT_FALSE(row.outcome.reject);
}

TEST(CompareExperiments, GridMismatch) {
    const auto a = summary({{"x", 0, {1.0, 1.0, 40}}, {"x", 5, {2.0, 3.0, 40}}});
    const auto b = summary({{"x", 0, {1.0, 1.0, 40}}, {"x", 6, {2.0, 3.0, 40}}});
    try {
        compareExperiments(a, b, 0.05, 0.1);
        FAIL();
    } catch (const GridMismatchError& e) {
        EXPECT_FALSE(e.unmatched().empty());
    }
}

TEST(CompareExperiments, CalibrationPairRejectsWhenPowered) {
    using smc::testing::calibrationFactory;
    std::vector<std::uint64_t> times;
    for (std::uint64_t t = 0; t < 40; ++t) times.push_back(t);
    ObservableGridProgram program({"x"}, times);
    TransientRequest req;
    req.delta = 0.3;
    req.maxSims = 200;
    WorkerPool pa(calibrationFactory(models::IidNormal{0.0, 1.0}), 1);
    WorkerPool pb(calibrationFactory(models::IidNormal{0.5, 1.0}), 1);
    auto toSummary = [](const TransientResult& r) {
        ExperimentSummary s;
        for (const auto& c : r.cells) s.cells.push_back({c.observable, c.time, {c.ci.estimate, c.ci.variance, c.ci.n}});
        return s;
    };
    const auto rows = compareExperiments(toSummary(autoIR(req, program, pa, {1})),
                                         toSummary(autoIR(req, program, pb, {2})), 0.05, 0.5);
    int powered = 0, rejected = 0;
    for (const auto& r : rows) {
        if (r.outcome.power < 0.8) continue;
        ++powered;
        rejected += r.outcome.reject;
    }
    ASSERT_GT(powered, 20);
    EXPECT_GT(double(rejected) / powered, 0.95);
}

TEST(ReadTransientCsv, ParsesEmittedColumns) {
    std::istringstream in(
        "observable,time,mean,halfWidth,n,converged,variance\n"
        "x,0,1.5,0.1,40,true,2.25\n"
        "\"a,b\",3,-1,0.2,60,false,0.5\n");
    const auto s = readTransientCsv(in);
    ASSERT_EQ(s.cells.size(), 2u);
    EXPECT_EQ(s.cells[1].observable, "a,b");
    EXPECT_EQ(s.cells[1].time, 3u);
    EXPECT_EQ(s.cells[0].summary.variance, 2.25);
    EXPECT_EQ(s.cells[1].summary.n, 60u);
    std::istringstream bad("observable,time,mean\nx,0,1\n");
    EXPECT_THROW(readTransientCsv(bad), ConfigError);
}

}  // namespace
