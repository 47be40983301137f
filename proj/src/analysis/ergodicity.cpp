#include "smc/analysis/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smc/error.hpp"
#include "smc/stats/normality.hpp"
#include "smc/stats/running_stats.hpp"

namespace smc::analysis {

std::string_view toString(ErgodicityStatus status) {
    switch (status) {
        case ErgodicityStatus::NonStationary: return "NonStationary";
        case ErgodicityStatus::EvidenceOfNonErgodicity: return "EvidenceOfNonErgodicity";
        case ErgodicityStatus::NoEvidenceOfViolation: return "NoEvidenceOfViolation";
    }
    return "?";
}

ErgodicityVerdict decideErgodicity(std::string observable, const SteadyEstimate& bm, const SteadyEstimate& rd,
                                   std::span<const double> horizontalMeans, double delta, DeltaMode mode) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    ErgodicityVerdict v;
    v.observable = std::move(observable);
    v.bm = bm.ci;
    v.rd = rd.ci;
    v.adPValue = nan;
    v.discrepancy = nan;

    if (!bm.ci.converged || !rd.ci.converged) {
        v.status = ErgodicityStatus::NonStationary;
        v.reason = !bm.ci.converged ? "autoBM did not converge" : "autoRD did not converge";
        if (!bm.ci.converged && !bm.stopReason.empty()) v.reason += " (" + bm.stopReason + ")";
        else if (!rd.ci.converged && !rd.stopReason.empty()) v.reason += " (" + rd.stopReason + ")";
        return v;
    }

    v.discrepancy = std::fabs(bm.ci.estimate - rd.ci.estimate);
    const double allowed = mode == DeltaMode::Relative && std::fabs(rd.ci.estimate) >= 1e-12
                               ? delta * std::fabs(rd.ci.estimate)
                               : delta;
    if (v.discrepancy > allowed) {
        v.status = ErgodicityStatus::EvidenceOfNonErgodicity;
        v.reason = "estimates differ by more than delta";
        return v;
    }

    const RunningStats s = RunningStats::fromSample(horizontalMeans);
    // Rounding in the mean leaves a tiny variance on constant data; treat it as zero.
    const double varianceFloor = 1e-24 * std::max(1.0, s.mean() * s.mean());
    if (horizontalMeans.size() >= 8 && s.variance() > varianceFloor) {
        v.adPValue = andersonDarlingPValue(horizontalMeans, s.mean(), s.variance());
        if (v.adPValue <= kHorizontalNormalityLevel) {
            v.status = ErgodicityStatus::EvidenceOfNonErgodicity;
            v.reason = "horizontal means are not normal";
            return v;
        }
        v.reason = "estimates agree and horizontal means look normal";
    } else {
        v.reason = "estimates agree; normality test skipped";
    }
    v.status = ErgodicityStatus::NoEvidenceOfViolation;
    return v;
}

ErgodicityResult diagnoseErgodicity(const SteadyRequest& request, const ProbeSet& probes, WorkerPool& pool,
                                    SeedPlan plan) {
    ErgodicityResult out;
    out.bm = autoBM(request, probes, pool.primary(), plan);
    out.rd = autoRD(request, probes, pool, plan);
    if (out.bm.failure || out.rd.failure) return out;
    for (std::size_t k = 0; k < probes.size(); ++k) {
        const auto& rd = out.rd.estimates[k];
        out.verdicts.push_back(decideErgodicity(probes.label(k), out.bm.estimates[k], rd, rd.horizontalMeans,
                                                request.delta, request.deltaMode));
    }
    return out;
}

}  // namespace smc::analysis
