#include <gtest/gtest.h>

#include <cmath>

#include "smc/analysis/ergodicity.hpp"
#include "smc/analysis/steady.hpp"
#include "smc/error.hpp"
#include "test_support.hpp"

namespace {

using namespace smc;
using namespace smc::analysis;
using smc::testing::calibrationFactory;

SteadyRequest request(double delta = 0.1) {
    SteadyRequest r;
    r.alpha = 0.05;
    r.delta = delta;
    return r;
}

TEST(BatchMeans, SqueezeIsExactOnIntegers) {
    BatchMeans bm(8, 2);
    std::vector<double> data;
    for (int i = 0; i < 16; ++i) data.push_back(double(i * i % 7));
    for (double v : data) bm.add(v);
    ASSERT_TRUE(bm.full());
    bm.squeeze();
    EXPECT_EQ(bm.batchSize(), 4u);
    ASSERT_EQ(bm.means().size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) {
        const double direct = (data[4 * k] + data[4 * k + 1] + data[4 * k + 2] + data[4 * k + 3]) / 4.0;
        EXPECT_EQ(bm.means()[k], direct);
    }
    // Refill the second half with the next 16 observations.
    for (int i = 16; i < 32; ++i) bm.add(double(i % 5));
    ASSERT_TRUE(bm.full());
    for (std::size_t k = 4; k < 8; ++k) {
        double s = 0;
        for (int j = 0; j < 4; ++j) s += double((16 + 4 * (k - 4) + j) % 5);
        EXPECT_EQ(bm.means()[k], s / 4.0);
    }
    EXPECT_EQ(bm.observations(), 32u);
}

TEST(BatchMeans, Restart) {
    BatchMeans bm(4, 3);
    for (int i = 0; i < 7; ++i) bm.add(1.0);
    bm.restart(5);
    EXPECT_EQ(bm.means().size(), 0u);
    EXPECT_EQ(bm.batchSize(), 5u);
    EXPECT_EQ(bm.observations(), 0u);
}

TEST(Warmup, ConstantPassesImmediately) {
    auto sim = models::makeCalibrationSim(models::Constant{3.0});
    sim->reset(1);
    ObservableProbes probes({"x"});
    const auto w = autoWarmup(*sim, probes, WarmupParams{}, 1u << 20);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_TRUE(w[0].converged);
    EXPECT_TRUE(w[0].passedByLowVariance);
    EXPECT_EQ(w[0].wSteps, 2048u);
    EXPECT_EQ(w[0].iterations, 0u);
}

TEST(Warmup, SlowMixingNeedsMoreDoublings) {
    ObservableProbes probes({"x"});
    int slowerCount = 0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto slow = models::makeCalibrationSim(models::Ar1{0.99, 0.0, 1.0, 0.0});
        auto fast = models::makeCalibrationSim(models::Ar1{0.1, 0.0, 1.0, 0.0});
        slow->reset(seed);
        fast->reset(seed);
        const auto ws = autoWarmup(*slow, probes, WarmupParams{}, 1u << 24);
        const auto wf = autoWarmup(*fast, probes, WarmupParams{}, 1u << 24);
        ASSERT_TRUE(ws[0].converged && wf[0].converged);
        slowerCount += ws[0].iterations > wf[0].iterations;
    }
    EXPECT_EQ(slowerCount, 3);
}

TEST(Warmup, BudgetExhaustion) {
    auto sim = models::makeCalibrationSim(models::Counter{});
    sim->reset(1);
    ObservableProbes probes({"x"});
    const auto w = autoWarmup(*sim, probes, WarmupParams{}, 10000);
    EXPECT_FALSE(w[0].converged);
    EXPECT_LE(sim->stepCount(), 10000u);
}

TEST(WarmupParams, Validation) {
    WarmupParams p;
    p.batches = 7;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.discard = 124;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(AutoRD, ConstantOneBlock) {
    WorkerPool pool(calibrationFactory(models::Constant{4.0}), 1);
    ObservableProbes probes({"x"});
    const auto r = autoRD(request(), probes, pool, {1});
    ASSERT_EQ(r.estimates.size(), 1u);
    const auto& e = r.estimates[0];
    EXPECT_TRUE(e.ci.converged);
    EXPECT_EQ(e.ci.estimate, 4.0);
    EXPECT_EQ(e.ci.halfWidth, 0.0);
    EXPECT_EQ(e.nOrSteps, 20u);
    EXPECT_EQ(e.wSteps, 2048u);
    EXPECT_EQ(e.method, "autoRD");
}

TEST(AutoRD, IidNormalKnownMean) {
    WorkerPool pool(calibrationFactory(models::IidNormal{5.0, 1.0}), 1);
    ObservableProbes probes({"x"});
    const auto r = autoRD(request(0.05), probes, pool, {2});
    const auto& e = r.estimates[0];
    ASSERT_TRUE(e.ci.converged);
    EXPECT_NEAR(e.ci.estimate, 5.0, 0.05);
    EXPECT_LE(2 * e.ci.halfWidth, 0.05);
    EXPECT_EQ(e.horizontalMeans.size(), e.nOrSteps);
}

TEST(AutoRD, Ar1StationaryMeanAndDeterminism) {
    ObservableProbes probes({"x"});
    std::optional<SteadyResult> reference;
    for (unsigned n : {1u, 2u, 4u, 8u}) {
        WorkerPool pool(calibrationFactory(models::Ar1{0.9, 5.0, 1.0, 0.0}), n);
        auto r = autoRD(request(0.2), probes, pool, {3});
        ASSERT_TRUE(r.allConverged());
        EXPECT_NEAR(r.estimates[0].ci.estimate, 5.0, 0.2);
        if (!reference) {
            reference = std::move(r);
            continue;
        }
        EXPECT_TRUE(smc::testing::sameBits(r.estimates[0].ci.estimate, reference->estimates[0].ci.estimate));
        EXPECT_TRUE(smc::testing::sameBits(r.estimates[0].ci.halfWidth, reference->estimates[0].ci.halfWidth));
        EXPECT_EQ(r.estimates[0].nOrSteps, reference->estimates[0].nOrSteps);
    }
}

TEST(ManualRD, NoWarmupAgreesWithAutoRD) {
    WorkerPool pool(calibrationFactory(models::IidNormal{1.0, 1.0}), 1);
    ObservableProbes probes({"x"});
    const auto manual = manualRD(request(0.1), probes, pool, {4}, 0, 50);
    const auto automatic = autoRD(request(0.1), probes, pool, {4});
    const auto& a = manual.estimates[0].ci;
    const auto& b = automatic.estimates[0].ci;
    EXPECT_LE(std::abs(a.estimate - b.estimate), a.halfWidth + b.halfWidth);
    EXPECT_EQ(manual.estimates[0].method, "manualRD");
}

TEST(ManualRD, FixedSimsAndPercentiles) {
    WorkerPool pool(calibrationFactory(models::IidNormal{0.0, 1.0}), 1);
    ObservableProbes probes({"x"});
    auto req = request(1e-6);
    req.fixedSims = 57;
    req.percentileInterval = true;
    const auto r = manualRD(req, probes, pool, {5}, 10, 20);
    const auto& e = r.estimates[0];
    EXPECT_EQ(e.nOrSteps, 57u);
    ASSERT_TRUE(e.percentileInterval.has_value());
    EXPECT_LT(e.percentileInterval->first, e.percentileInterval->second);
    EXPECT_EQ(e.percentileInterval->first, sampleQuantile(e.horizontalMeans, 0.05));
    EXPECT_THROW(manualRD(req, probes, pool, {5}, 20, 20), ConfigError);
}

TEST(AutoBM, ConstantPassesImmediately) {
    auto sim = models::makeCalibrationSim(models::Constant{2.0});
    ObservableProbes probes({"x"});
    const auto r = autoBM(request(), probes, *sim, {1});
    const auto& e = r.estimates[0];
    EXPECT_TRUE(e.ci.converged);
    EXPECT_EQ(e.ci.estimate, 2.0);
    EXPECT_EQ(e.ci.halfWidth, 0.0);
    EXPECT_EQ(e.method, "autoBM");
}

TEST(AutoBM, Ar1StationaryMean) {
    auto sim = models::makeCalibrationSim(models::Ar1{0.8, -2.0, 1.0, 10.0});
    ObservableProbes probes({"x"});
    const auto r = autoBM(request(0.05), probes, *sim, {6});
    const auto& e = r.estimates[0];
    ASSERT_TRUE(e.ci.converged);
    EXPECT_NEAR(e.ci.estimate, -2.0, 0.05);
    EXPECT_GE(e.wSteps, 2048u);
}

TEST(ManualBM, BudgetCheck) {
    auto sim = models::makeCalibrationSim(models::Counter{});
    ObservableProbes probes({"x"});
    auto req = request();
    req.maxSteps = 1000;
    EXPECT_THROW(manualBM(req, probes, *sim, {1}, 10), ConfigError);
}

TEST(AutoBM, NonStationaryHitsBudget) {
    auto sim = models::makeCalibrationSim(models::Counter{});
    ObservableProbes probes({"x"});
    auto req = request();
    req.maxSteps = 1u << 16;
    const auto r = autoBM(req, probes, *sim, {1});
    EXPECT_FALSE(r.estimates[0].ci.converged);
    EXPECT_FALSE(r.estimates[0].stopReason.empty());
}

TEST(SampleQuantile, Type7) {
    EXPECT_DOUBLE_EQ(sampleQuantile({10, 1, 4, 2, 3}, 0.05), 1.2);
    EXPECT_DOUBLE_EQ(sampleQuantile({10, 1, 4, 2, 3}, 0.95), 8.8);
    EXPECT_DOUBLE_EQ(sampleQuantile({10, 1, 4, 2, 3}, 0.5), 3.0);
}

SteadyEstimate estimate(double value, bool converged, double half = 0.001) {
    SteadyEstimate e;
    e.ci.estimate = value;
    e.ci.halfWidth = half;
    e.ci.converged = converged;
    return e;
}

TEST(Ergodicity, DecisionTable) {
    std::vector<double> normalish;
    for (int i = 0; i < 40; ++i) normalish.push_back(0.4 + 0.01 * std::sin(i * 1.7));
    auto v = decideErgodicity("p", estimate(0.498, true), estimate(0.426, true), normalish, 0.01, DeltaMode::Absolute);
    EXPECT_EQ(v.status, ErgodicityStatus::EvidenceOfNonErgodicity);
    EXPECT_NEAR(v.discrepancy, 0.072, 1e-12);

    v = decideErgodicity("p", estimate(0.4027, true), estimate(0.4035, true), normalish, 0.01, DeltaMode::Absolute);
    EXPECT_EQ(v.status, ErgodicityStatus::NoEvidenceOfViolation);

    v = decideErgodicity("p", estimate(0.4, false), estimate(0.4, true), normalish, 0.01, DeltaMode::Absolute);
    EXPECT_EQ(v.status, ErgodicityStatus::NonStationary);

    std::vector<double> twoPoint;
    for (int i = 0; i < 40; ++i) twoPoint.push_back(i % 2 ? 0.2 : 0.6);
    v = decideErgodicity("p", estimate(0.4, true), estimate(0.4, true), twoPoint, 0.01, DeltaMode::Absolute);
    EXPECT_EQ(v.status, ErgodicityStatus::EvidenceOfNonErgodicity);
    EXPECT_LT(v.adPValue, 0.01);

    const std::vector<double> constant(40, 0.4);
    v = decideErgodicity("p", estimate(0.4, true), estimate(0.4, true), constant, 0.01, DeltaMode::Absolute);
    EXPECT_EQ(v.status, ErgodicityStatus::NoEvidenceOfViolation);
    EXPECT_TRUE(std::isnan(v.adPValue));

    v = decideErgodicity("p", estimate(100.0, true), estimate(100.5, true), constant, 0.01, DeltaMode::Relative);
    EXPECT_EQ(v.status, ErgodicityStatus::NoEvidenceOfViolation);
}

TEST(Ergodicity, ConstantSimulator) {
    WorkerPool pool(calibrationFactory(models::Constant{0.7}), 1);
    ObservableProbes probes({"x"});
    const auto r = diagnoseErgodicity(request(), probes, pool, {1});
    ASSERT_EQ(r.verdicts.size(), 1u);
    EXPECT_EQ(r.verdicts[0].status, ErgodicityStatus::NoEvidenceOfViolation);
    EXPECT_NEAR(r.verdicts[0].discrepancy, 0.0, 1e-12);
}

TEST(Ergodicity, StatusNames) {
    EXPECT_EQ(toString(ErgodicityStatus::NonStationary), "NonStationary");
    EXPECT_EQ(toString(ErgodicityStatus::EvidenceOfNonErgodicity), "EvidenceOfNonErgodicity");
    EXPECT_EQ(toString(ErgodicityStatus::NoEvidenceOfViolation), "NoEvidenceOfViolation");
}

}  // namespace
