#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace smc::analysis {

/// Mean, sample variance and count of one (observable, time) cell.
struct CellSummary {
    double mean = 0.0;
    double variance = 0.0;
    std::uint64_t n = 0;
};

struct WelchOutcome {
    double tau = 0.0;
    double nu = 0.0;
    bool reject = false;
    double power = 0.0;
    /// f_a + f_b below 1e-15: the test is numerically meaningless.
    bool degenerate = false;
};

inline constexpr double kWelchDegeneracyTolerance = 1e-15;

/// Two-sided Welch test of equal means at level aW, with Satterthwaite
/// degrees of freedom used as a real number. Degenerate cells report
/// tau = 0 for equal means and +-inf otherwise, nu = n_a + n_b - 2, and
/// reject exactly when the means differ.
WelchOutcome welchTest(const CellSummary& a, const CellSummary& b, double aW);

/// Probability that the two-sided test rejects when the true difference is
/// epsilon: 1 - T(t_c | theta) + T(-t_c | theta), with T the non-central t
/// CDF at nu degrees of freedom, t_c = t_{nu, 1-aW/2} and
/// theta = |epsilon| / sqrt(f_a + f_b). Tends to aW as epsilon -> 0.
/// Degenerate cells report 1.
double welchPower(const CellSummary& a, const CellSummary& b, double aW, double epsilon);

/// Upper-tail-only form 1 - T(t_c | theta), which omits the (usually
/// negligible) probability of rejecting in the wrong direction.
double welchPowerUpperTail(const CellSummary& a, const CellSummary& b, double aW, double epsilon);

struct ExperimentCell {
    std::string observable;
    std::uint64_t time = 0;
    CellSummary summary;
};

struct ExperimentSummary {
    std::vector<ExperimentCell> cells;
};

struct ComparisonRow {
    std::string observable;
    std::uint64_t time = 0;
    WelchOutcome outcome;
};

class GridMismatchError : public std::runtime_error {
public:
    GridMismatchError(const std::string& message, std::vector<std::string> unmatched)
        : std::runtime_error(message), unmatched_(std::move(unmatched)) {}
    const std::vector<std::string>& unmatched() const { return unmatched_; }

private:
    std::vector<std::string> unmatched_;
};

/// One Welch outcome per shared cell, in the order of `a`. Both experiments
/// must cover exactly the same (observable, time) grid.
std::vector<ComparisonRow> compareExperiments(const ExperimentSummary& a, const ExperimentSummary& b, double aW,
                                              double epsilon);

/// Reads a transient CSV (needs columns observable, time, mean, n, variance).
ExperimentSummary readTransientCsv(std::istream& in);

}  // namespace smc::analysis
