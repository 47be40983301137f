#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smc/analysis/pool.hpp"
#include "smc/analysis/probe.hpp"
#include "smc/sim/seed.hpp"
#include "smc/stats/confidence.hpp"
#include "smc/stats/normality.hpp"

namespace smc::analysis {

struct WarmupParams {
    std::uint64_t batches = 128;    // B
    std::uint64_t discard = 4;      // b
    std::uint64_t batchSize = 16;   // initial bs
    double minVar = 1e-7;
    double aStar = 0.01;

    void validate() const;
};

/// B adjacent batch means over one stream of observations.
class BatchMeans {
public:
    BatchMeans(std::size_t batches, std::uint64_t batchSize);

    /// Feed one observation. Returns true once all B batches are complete.
    bool add(double y);
    bool full() const { return filled_ == means_.size(); }
    std::span<const double> means() const { return {means_.data(), filled_}; }
    std::uint64_t batchSize() const { return batchSize_; }
    /// Observations absorbed since construction or the last restart.
    std::uint64_t observations() const { return observations_; }

    /// Average adjacent pairs into the first B/2 slots and double the batch
    /// size; the second half is refilled by later add() calls.
    void squeeze();
    /// Drop everything and start again with the given batch size.
    void restart(std::uint64_t batchSize);

private:
    std::vector<double> means_;
    std::size_t filled_ = 0;
    std::uint64_t batchSize_;
    std::uint64_t inBatch_ = 0;
    double batchSum_ = 0.0;
    std::uint64_t observations_ = 0;
};

struct WarmupEstimate {
    std::string observable;
    /// Observations in the warmup prefix: B * bs when the tests passed.
    std::uint64_t wSteps = 0;
    bool passedByLowVariance = false;
    /// Number of batch-size doublings.
    std::uint64_t iterations = 0;
    bool converged = false;
    GoodnessResult lastTest;
};

struct SteadyRequest {
    WarmupParams warmup;
    double alpha = 0.05;
    double delta = 0.1;
    DeltaMode deltaMode = DeltaMode::Absolute;
    /// Replication-deletion block size and budgets.
    std::uint64_t blockSize = 20;
    std::optional<std::uint64_t> maxSims;
    /// Run exactly this many replications, ignoring the stopping rule.
    std::optional<std::uint64_t> fixedSims;
    std::uint64_t horizonMultiplier = 2;
    /// Budget on the length of single long trajectories (warmup, batch means).
    std::uint64_t maxSteps = std::uint64_t{1} << 26;
    /// Also report the 5th/95th percentiles of the horizontal means.
    bool percentileInterval = false;

    void validate() const;
};

struct SteadyEstimate {
    std::string observable;
    std::string method;
    CIResult ci;
    std::uint64_t wSteps = 0;
    /// Replications for replication-deletion, trajectory length for batch means.
    std::uint64_t nOrSteps = 0;
    /// Batch means: last goodness-of-fit values. Replication-deletion: the
    /// normality p-value of the horizontal means (NaN when not tested).
    double adPValue = 0.0;
    double lag1 = 0.0;
    std::vector<double> horizontalMeans;
    std::optional<std::pair<double, double>> percentileInterval;
    /// Empty when converged, otherwise the budget that ran out.
    std::string stopReason;
};

struct SteadyResult {
    std::vector<SteadyEstimate> estimates;
    std::vector<WarmupEstimate> warmups;
    std::optional<std::string> failure;

    bool allConverged() const;
};

/// Warmup estimation for every probe on the simulator's current trajectory
/// (the caller resets it). Stops when every probe has passed or the
/// trajectory would exceed maxSteps; failures come back with converged unset.
std::vector<WarmupEstimate> autoWarmup(Simulator& sim, const ProbeSet& probes, const WarmupParams& params,
                                       std::uint64_t maxSteps);

/// Replication-deletion with the warmup estimated on the reserved warmup
/// stream: w is the largest per-probe warmup, m = w * horizonMultiplier.
SteadyResult autoRD(const SteadyRequest& request, const ProbeSet& probes, WorkerPool& pool, SeedPlan plan);

/// Replication-deletion with a fixed warmup w and horizon m (w < m).
SteadyResult manualRD(const SteadyRequest& request, const ProbeSet& probes, WorkerPool& pool, SeedPlan plan,
                      std::uint64_t w, std::uint64_t m);

/// Batch means on one trajectory (the reserved batch-means stream): warmup
/// detection, then fresh batches from the initial batch size, doubled until
/// normality, lag-1 and precision checks all pass.
SteadyResult autoBM(const SteadyRequest& request, const ProbeSet& probes, Simulator& sim, SeedPlan plan);

/// Batch means after skipping a fixed warmup of w observations.
SteadyResult manualBM(const SteadyRequest& request, const ProbeSet& probes, Simulator& sim, SeedPlan plan,
                      std::uint64_t w);

/// Linear-interpolation quantile (type 7) of an unsorted sample.
double sampleQuantile(std::vector<double> sample, double p);

}  // namespace smc::analysis
