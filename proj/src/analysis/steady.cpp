#include "smc/analysis/steady.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smc/error.hpp"
#include "smc/kernels/reduce.hpp"
#include "smc/stats/running_stats.hpp"

namespace smc::analysis {

void WarmupParams::validate() const {
    if (batches < 4 || batches % 2 != 0) throw ConfigError("batch count B must be even and at least 4");
    if (discard >= batches || batches - discard < 8)
        throw ConfigError("at least 8 batches must remain after discarding");
    if (batchSize < 1) throw ConfigError("batch size must be at least 1");
    if (!(minVar >= 0.0)) throw ConfigError("minVar must be non-negative");
    if (!(aStar > 0.0 && aStar < 1.0)) throw ConfigError("aStar must lie in (0, 1)");
}

void SteadyRequest::validate() const {
    warmup.validate();
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    if (blockSize < 2) throw ConfigError("block size must be at least 2");
    if (maxSims && *maxSims < 2) throw ConfigError("max-sims must be at least 2");
    if (fixedSims && *fixedSims < 2) throw ConfigError("a fixed replication count must be at least 2");
    if (horizonMultiplier < 2) throw ConfigError("horizon multiplier must be at least 2");
    if (maxSteps < warmup.batches * warmup.batchSize) throw ConfigError("max-steps is below one round of batches");
}

bool SteadyResult::allConverged() const {
    return !failure && std::all_of(estimates.begin(), estimates.end(), [](const auto& e) { return e.ci.converged; });
}

BatchMeans::BatchMeans(std::size_t batches, std::uint64_t batchSize) : means_(batches, 0.0), batchSize_(batchSize) {}

bool BatchMeans::add(double y) {
    if (full()) return true;
    batchSum_ += y;
    ++observations_;
    if (++inBatch_ == batchSize_) {
        means_[filled_++] = batchSum_ / static_cast<double>(batchSize_);
        batchSum_ = 0.0;
        inBatch_ = 0;
    }
    return full();
}

void BatchMeans::squeeze() {
    const std::size_t half = means_.size() / 2;
    for (std::size_t i = 0; i < half; ++i) means_[i] = (means_[2 * i] + means_[2 * i + 1]) / 2.0;
    filled_ = half;
    batchSize_ *= 2;
    batchSum_ = 0.0;
    inBatch_ = 0;
}

void BatchMeans::restart(std::uint64_t batchSize) {
    std::fill(means_.begin(), means_.end(), 0.0);
    filled_ = 0;
    batchSize_ = batchSize;
    batchSum_ = 0.0;
    inBatch_ = 0;
    observations_ = 0;
}

double sampleQuantile(std::vector<double> sample, double p) {
    if (sample.empty()) throw InsufficientDataError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
    std::sort(sample.begin(), sample.end());
    const double h = p * static_cast<double>(sample.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sample.size() - 1);
    return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

namespace {

/// Per-probe state machine over one long trajectory:
/// warmup detection (or a fixed skip), then optionally batch means.
class Tracker {
public:
    enum class Phase { Warmup, Skip, Batching, Done, Failed };

    struct Options {
        WarmupParams params;
        bool batchMeans = false;
        std::optional<std::uint64_t> fixedWarmup;
        double alpha = 0.05;
        double delta = 0.1;
        DeltaMode deltaMode = DeltaMode::Absolute;
        std::uint64_t maxSteps = 0;
    };

    explicit Tracker(const Options& options)
        : opt_(options), batches_(options.params.batches, options.params.batchSize) {
        if (opt_.fixedWarmup) {
            warmup_.wSteps = *opt_.fixedWarmup;
            warmup_.converged = true;
            phase_ = Phase::Skip;
            if (*opt_.fixedWarmup == 0) phase_ = Phase::Batching;
        }
    }

    bool finished() const { return phase_ == Phase::Done || phase_ == Phase::Failed; }
    Phase phase() const { return phase_; }
    const WarmupEstimate& warmup() const { return warmup_; }
    std::uint64_t steps() const { return steps_; }

    void add(double y) {
        ++steps_;
        switch (phase_) {
            case Phase::Skip:
                if (steps_ == *opt_.fixedWarmup) phase_ = Phase::Batching;
                return;
            case Phase::Warmup:
                if (batches_.add(y)) checkWarmup();
                return;
            case Phase::Batching:
                if (batches_.add(y)) checkBatchMeans();
                return;
            default:
                return;
        }
    }

    GoodnessResult lastTest() const { return last_; }
    CIResult ci() const { return ci_; }

private:
    std::span<const double> tail() const { return batches_.means().subspan(opt_.params.discard); }
    std::size_t tailSize() const { return opt_.params.batches - opt_.params.discard; }

    // The next round doubles everything consumed since the batches began.
    bool roomForAnotherRound() const { return steps_ + batches_.observations() <= opt_.maxSteps; }

    void checkWarmup() {
        last_ = goodnessOfFit(tail(), opt_.params.minVar);
        if (goodnessPasses(last_, tailSize(), opt_.params.aStar)) {
            warmup_.wSteps = batches_.observations();
            warmup_.passedByLowVariance = last_.passedByLowVariance;
            warmup_.converged = true;
            warmup_.lastTest = last_;
            if (opt_.batchMeans) {
                batches_.restart(opt_.params.batchSize);
                phase_ = Phase::Batching;
            } else {
                phase_ = Phase::Done;
            }
            return;
        }
        warmup_.lastTest = last_;
        if (!roomForAnotherRound()) {
            phase_ = Phase::Failed;
            return;
        }
        batches_.squeeze();
        ++warmup_.iterations;
    }

    void checkBatchMeans() {
        const auto mu = tail();
        last_ = goodnessOfFit(mu, opt_.params.minVar);
        const RunningStats stats = RunningStats::fromSample(mu);
        ci_.estimate = stats.mean();
        ci_.variance = stats.variance();
        ci_.n = stats.count();
        ci_.alpha = opt_.alpha;
        ci_.deltaTarget = opt_.delta;
        ci_.deltaMode = opt_.deltaMode;
        if (last_.passedByLowVariance) {
            ci_.halfWidth = 0.0;
        } else {
            const double rho = std::min(last_.lag1, std::nextafter(1.0, 0.0));
            ci_.halfWidth = autocorrAdjustedHalfWidth(stats, opt_.alpha, rho);
        }
        const bool precise = meetsPrecision(ci_.halfWidth, ci_.estimate, opt_.delta, opt_.deltaMode);
        if (goodnessPasses(last_, tailSize(), opt_.params.aStar) && precise) {
            ci_.converged = true;
            phase_ = Phase::Done;
            return;
        }
        if (!roomForAnotherRound()) {
            phase_ = Phase::Failed;
            return;
        }
        batches_.squeeze();
    }

    Options opt_;
    BatchMeans batches_;
    Phase phase_ = Phase::Warmup;
    std::uint64_t steps_ = 0;
    WarmupEstimate warmup_;
    GoodnessResult last_;
    CIResult ci_;
};

std::vector<Tracker> runTrackers(Simulator& sim, const ProbeSet& probes, const Tracker::Options& options) {
    std::vector<Tracker> trackers(probes.size(), Tracker(options));
    const ProbeReader read = probes.bind(sim);
    std::vector<double> values(probes.size());
    std::vector<std::size_t> open(probes.size());
    for (std::size_t k = 0; k < open.size(); ++k) open[k] = k;
    while (!open.empty()) {
        sim.next();
        read(values);
        std::erase_if(open, [&](std::size_t k) {
            trackers[k].add(values[k]);
            return trackers[k].finished();
        });
    }
    return trackers;
}

Tracker::Options trackerOptions(const SteadyRequest& request) {
    Tracker::Options options;
    options.params = request.warmup;
    options.alpha = request.alpha;
    options.delta = request.delta;
    options.deltaMode = request.deltaMode;
    options.maxSteps = request.maxSteps;
    return options;
}

SteadyResult batchMeans(const SteadyRequest& request, const ProbeSet& probes, Simulator& sim, SeedPlan plan,
                        std::optional<std::uint64_t> fixedWarmup) {
    request.validate();
    if (fixedWarmup && *fixedWarmup + request.warmup.batches * request.warmup.batchSize > request.maxSteps)
        throw ConfigError("fixed warmup plus one round of batches exceeds max-steps");
    Tracker::Options options = trackerOptions(request);
    options.batchMeans = true;
    options.fixedWarmup = fixedWarmup;

    const std::uint64_t seed = deriveSeed(plan, kBatchMeansStream);
    SteadyResult result;
    std::vector<Tracker> trackers;
    try {
        sim.reset(seed);
        trackers = runTrackers(sim, probes, options);
    } catch (const UnknownObservableError&) {
        throw;
    } catch (const std::exception& e) {
        result.failure = ReplicationFailedError(seed, e.what()).what();
        return result;
    }

    for (std::size_t k = 0; k < trackers.size(); ++k) {
        const Tracker& t = trackers[k];
        WarmupEstimate w = t.warmup();
        w.observable = probes.label(k);
        result.warmups.push_back(w);

        SteadyEstimate e;
        e.observable = probes.label(k);
        e.method = fixedWarmup ? "manualBM" : "autoBM";
        e.ci = t.ci();
        e.ci.alpha = request.alpha;
        e.ci.deltaTarget = request.delta;
        e.ci.deltaMode = request.deltaMode;
        e.wSteps = w.converged ? w.wSteps : 0;
        e.nOrSteps = t.steps();
        e.adPValue = t.lastTest().adPValue;
        e.lag1 = t.lastTest().lag1;
        if (!e.ci.converged) e.stopReason = w.converged ? "maxSteps" : "maxSteps (warmup)";
        result.estimates.push_back(std::move(e));
    }
    return result;
}

double horizontalNormality(const std::vector<double>& means) {
    if (means.size() < 8) return std::numeric_limits<double>::quiet_NaN();
    const RunningStats s = RunningStats::fromSample(means);
    if (!(s.variance() > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return andersonDarlingPValue(means, s.mean(), s.variance());
}

SteadyResult replicationDeletion(const SteadyRequest& request, const ProbeSet& probes, WorkerPool& pool,
                                 SeedPlan plan, std::uint64_t w, std::uint64_t m, const std::string& method,
                                 std::vector<WarmupEstimate> warmups) {
    const std::size_t count = probes.size();
    SteadyResult result;
    result.warmups = std::move(warmups);
    result.estimates.resize(count);
    std::vector<RunningStats> stats(count);
    std::vector<std::size_t> active(count);
    for (std::size_t k = 0; k < count; ++k) {
        active[k] = k;
        auto& e = result.estimates[k];
        e.observable = probes.label(k);
        e.method = method;
        e.wSteps = w;
        e.ci.alpha = request.alpha;
        e.ci.deltaTarget = request.delta;
        e.ci.deltaMode = request.deltaMode;
    }

    const std::uint64_t measured = m - w;
    auto replicate = [&](Simulator& sim, std::uint64_t index) {
        const std::uint64_t seed = deriveSeed(plan, index);
        try {
            sim.reset(seed);
            const ProbeReader read = probes.bind(sim);
            for (std::uint64_t t = 0; t < w; ++t) sim.next();
            std::vector<kernels::ChunkedSum> sums(count);
            std::vector<double> values(count);
            for (std::uint64_t t = w; t < m; ++t) {
                sim.next();
                read(values);
                for (std::size_t k = 0; k < count; ++k) sums[k].add(values[k]);
            }
            std::vector<double> means(count);
            for (std::size_t k = 0; k < count; ++k) means[k] = sums[k].total() / static_cast<double>(measured);
            return means;
        } catch (const UnknownObservableError&) {
            throw;
        } catch (const ReplicationFailedError& e) {
            throw ReplicationFailedError(index, seed, e.cause());
        } catch (const std::exception& e) {
            throw ReplicationFailedError(index, seed, e.what());
        }
    };

    const std::optional<std::uint64_t> cap = request.fixedSims ? request.fixedSims : request.maxSims;
    std::uint64_t n = 0;
    while (!active.empty()) {
        std::uint64_t blockEnd = n + request.blockSize;
        if (cap) blockEnd = std::min(blockEnd, *cap);
        if (blockEnd <= n) break;
        std::vector<std::vector<double>> rows;
        try {
            rows = pool.map<std::vector<double>>(n, blockEnd, replicate);
        } catch (const ReplicationFailedError& e) {
            result.failure = e.what();
            break;
        }
        for (const auto& row : rows) {
            for (std::size_t k : active) {
                stats[k].add(row[k]);
                result.estimates[k].horizontalMeans.push_back(row[k]);
            }
        }
        n = blockEnd;

        std::vector<std::size_t> stillActive;
        for (std::size_t k : active) {
            auto& ci = result.estimates[k].ci;
            ci.n = stats[k].count();
            ci.estimate = stats[k].mean();
            ci.variance = stats[k].variance();
            if (ci.n >= 2) {
                ci.halfWidth = ciHalfWidth(stats[k], request.alpha);
                ci.converged = meetsPrecision(ci.halfWidth, ci.estimate, request.delta, request.deltaMode);
            }
            // A fixed replication count keeps every probe running to the end.
            if (request.fixedSims || !ci.converged) stillActive.push_back(k);
        }
        active = std::move(stillActive);
    }

    for (auto& e : result.estimates) {
        e.nOrSteps = e.ci.n;
        e.adPValue = horizontalNormality(e.horizontalMeans);
        e.lag1 = 0.0;
        if (request.percentileInterval && !e.horizontalMeans.empty())
            e.percentileInterval = std::pair{sampleQuantile(e.horizontalMeans, 0.05),
                                             sampleQuantile(e.horizontalMeans, 0.95)};
        if (!e.ci.converged) e.stopReason = result.failure ? "failure" : (request.fixedSims ? "fixedSims" : "maxSims");
    }
    return result;
}

}  // namespace

std::vector<WarmupEstimate> autoWarmup(Simulator& sim, const ProbeSet& probes, const WarmupParams& params,
                                       std::uint64_t maxSteps) {
    params.validate();
    Tracker::Options options;
    options.params = params;
    options.maxSteps = maxSteps;
    const auto trackers = runTrackers(sim, probes, options);
    std::vector<WarmupEstimate> out;
    for (std::size_t k = 0; k < trackers.size(); ++k) {
        WarmupEstimate w = trackers[k].warmup();
        w.observable = probes.label(k);
        out.push_back(w);
    }
    return out;
}

SteadyResult autoRD(const SteadyRequest& request, const ProbeSet& probes, WorkerPool& pool, SeedPlan plan) {
    request.validate();
    const std::uint64_t seed = deriveSeed(plan, kWarmupStream);
    std::vector<WarmupEstimate> warmups;
    try {
        Simulator& sim = pool.primary();
        sim.reset(seed);
        warmups = autoWarmup(sim, probes, request.warmup, request.maxSteps);
    } catch (const UnknownObservableError&) {
        throw;
    } catch (const std::exception& e) {
        SteadyResult failed;
        failed.failure = ReplicationFailedError(seed, e.what()).what();
        return failed;
    }

    std::uint64_t w = 0;
    bool allPassed = true;
    for (const auto& est : warmups) {
        w = std::max(w, est.wSteps);
        allPassed = allPassed && est.converged;
    }
    if (!allPassed) {
        SteadyResult result;
        result.warmups = warmups;
        for (std::size_t k = 0; k < probes.size(); ++k) {
            SteadyEstimate e;
            e.observable = probes.label(k);
            e.method = "autoRD";
            e.ci.alpha = request.alpha;
            e.ci.deltaTarget = request.delta;
            e.ci.deltaMode = request.deltaMode;
            e.adPValue = std::numeric_limits<double>::quiet_NaN();
            e.stopReason = "maxSteps (warmup)";
            result.estimates.push_back(std::move(e));
        }
        return result;
    }
    return replicationDeletion(request, probes, pool, plan, w, w * request.horizonMultiplier, "autoRD",
                               std::move(warmups));
}

SteadyResult manualRD(const SteadyRequest& request, const ProbeSet& probes, WorkerPool& pool, SeedPlan plan,
                      std::uint64_t w, std::uint64_t m) {
    request.validate();
    if (w >= m) throw ConfigError("manualRD needs warmup < horizon");
    return replicationDeletion(request, probes, pool, plan, w, m, "manualRD", {});
}

SteadyResult autoBM(const SteadyRequest& request, const ProbeSet& probes, Simulator& sim, SeedPlan plan) {
    return batchMeans(request, probes, sim, plan, std::nullopt);
}

SteadyResult manualBM(const SteadyRequest& request, const ProbeSet& probes, Simulator& sim, SeedPlan plan,
                      std::uint64_t w) {
    return batchMeans(request, probes, sim, plan, w);
}

}  // namespace smc::analysis
