#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smc/analysis/steady.hpp"

namespace smc::analysis {

enum class ErgodicityStatus { NonStationary, EvidenceOfNonErgodicity, NoEvidenceOfViolation };

std::string_view toString(ErgodicityStatus status);

struct ErgodicityVerdict {
    std::string observable;
    ErgodicityStatus status = ErgodicityStatus::NonStationary;
    std::optional<CIResult> bm;
    std::optional<CIResult> rd;
    /// Normality p-value of the replication-deletion horizontal means; NaN
    /// when the test was not reached or skipped for zero variance.
    double adPValue = 0.0;
    /// |bm - rd|, NaN unless both converged.
    double discrepancy = 0.0;
    /// Which check decided the verdict.
    std::string reason;
};

/// Significance level of the normality check on horizontal means.
inline constexpr double kHorizontalNormalityLevel = 0.01;

/// The decision rule on recorded inputs. Non-convergence of either method
/// gives NonStationary. Otherwise a discrepancy above delta (relative mode:
/// above delta * |rd|) or a rejected normality test on the horizontal means
/// gives EvidenceOfNonErgodicity, and anything else NoEvidenceOfViolation.
/// Zero-variance horizontal means skip the normality test.
ErgodicityVerdict decideErgodicity(std::string observable, const SteadyEstimate& bm, const SteadyEstimate& rd,
                                   std::span<const double> horizontalMeans, double delta, DeltaMode mode);

struct ErgodicityResult {
    std::vector<ErgodicityVerdict> verdicts;
    SteadyResult bm;
    SteadyResult rd;
};

/// Runs autoBM and autoRD with the same request, then decides per probe.
ErgodicityResult diagnoseErgodicity(const SteadyRequest& request, const ProbeSet& probes, WorkerPool& pool,
                                    SeedPlan plan);

}  // namespace smc::analysis
