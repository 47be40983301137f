#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smc/analysis/pool.hpp"
#include "smc/sim/seed.hpp"
#include "smc/stats/confidence.hpp"

namespace smc::analysis {

/// The cells of a transient study and how one replication fills them.
/// Implementations must be safe to call concurrently on distinct simulators.
class TransientProgram {
public:
    virtual ~TransientProgram() = default;
    virtual std::size_t cellCount() const = 0;
    virtual std::string cellLabel(std::size_t cell) const = 0;
    virtual std::uint64_t cellTime(std::size_t cell) const = 0;
    /// Reset `sim` with `seed` and write out[k] for every k in `active`
    /// (ascending). Entries for other cells are left untouched.
    virtual void replicate(Simulator& sim, std::uint64_t seed, std::span<const std::size_t> active,
                           std::span<double> out) const = 0;
};

/// Every observable sampled at every time: cell (o, t) is observable o after
/// t steps. Cells are ordered observable-major.
class ObservableGridProgram final : public TransientProgram {
public:
    ObservableGridProgram(std::vector<std::string> observables, std::vector<std::uint64_t> times);
    std::size_t cellCount() const override { return observables_.size() * times_.size(); }
    std::string cellLabel(std::size_t cell) const override { return observables_[cell / times_.size()]; }
    std::uint64_t cellTime(std::size_t cell) const override { return times_[cell % times_.size()]; }
    void replicate(Simulator& sim, std::uint64_t seed, std::span<const std::size_t> active,
                   std::span<double> out) const override;

private:
    std::vector<std::string> observables_;
    std::vector<std::uint64_t> times_;
};

struct TransientRequest {
    double alpha = 0.05;
    double delta = 0.1;
    DeltaMode deltaMode = DeltaMode::Absolute;
    std::uint64_t blockSize = 20;
    /// Replication budget; unlimited when empty.
    std::optional<std::uint64_t> maxSims;

    void validate() const;
};

struct TransientCellResult {
    std::string observable;
    std::uint64_t time = 0;
    CIResult ci;
    /// The relative target was replaced by the absolute one (|mean| ~ 0).
    bool fellBackToAbsolute = false;
};

struct TransientResult {
    std::vector<TransientCellResult> cells;
    /// Replications drawn in total.
    std::uint64_t simulations = 0;
    /// Set when a replication failed; the cells hold the statistics of the
    /// blocks completed before the failure.
    std::optional<std::string> failure;

    bool allConverged() const;
};

/// Blocks of `blockSize` replications; replication i is seeded with
/// deriveSeed(plan, i). After each block every unresolved cell is checked
/// against the precision target and frozen once it meets it. Each block
/// only simulates up to the latest unresolved time.
TransientResult autoIR(const TransientRequest& request, const TransientProgram& program, WorkerPool& pool,
                       SeedPlan plan);

}  // namespace smc::analysis
