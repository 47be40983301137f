#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "smc/analysis/probe.hpp"
#include "smc/analysis/transient.hpp"
#include "smc/query/ast.hpp"
#include "smc/query/evaluator.hpp"

namespace smc::query {

/// Values taken by the range variable: from, from + step, ... up to `to`.
/// Throws ConfigError for step <= 0 or from > to.
std::vector<double> expandRange(const RangeSpec& range);

/// One cell per (target, range value), target-major. The observable
/// column shows the target text, the time column the range value (which
/// must therefore be a non-negative integer).
class QueryTransientProgram final : public analysis::TransientProgram {
public:
    QueryTransientProgram(std::shared_ptr<const QueryAst> ast, std::uint64_t budget = kDefaultUnfoldingBudget);

    std::size_t cellCount() const override { return targets_.size() * values_.size(); }
    std::string cellLabel(std::size_t cell) const override { return labels_[cell / values_.size()]; }
    std::uint64_t cellTime(std::size_t cell) const override { return times_[cell % values_.size()]; }
    void replicate(Simulator& sim, std::uint64_t seed, std::span<const std::size_t> active,
                   std::span<double> out) const override;

    /// All targets of a replication share one trajectory.
    bool lockstep() const { return lockstep_; }

private:
    Env envFor(std::size_t cell) const;

    std::shared_ptr<const QueryAst> ast_;
    std::uint64_t budget_;
    std::vector<const Expr*> targets_;
    std::vector<std::string> labels_;
    std::vector<std::string> rangeName_;
    std::vector<double> values_;
    std::vector<std::uint64_t> times_;
    bool lockstep_ = false;
};

/// Next-free targets evaluated on each state. Targets that are plainly
/// s.eval of a fixed name read the observable slot directly.
class QueryProbes final : public analysis::ProbeSet {
public:
    explicit QueryProbes(std::shared_ptr<const QueryAst> ast);

    std::size_t size() const override { return labels_.size(); }
    std::string label(std::size_t i) const override { return labels_[i]; }
    analysis::ProbeReader bind(Simulator& sim) const override;

private:
    std::shared_ptr<const QueryAst> ast_;
    std::vector<std::string> labels_;
    std::vector<std::optional<std::string>> direct_;
};

struct BoundQuery {
    CommandKind kind = CommandKind::AutoIR;
    std::shared_ptr<QueryTransientProgram> transient;
    std::shared_ptr<QueryProbes> probes;
    /// manualRD / manualBM warmup, manualRD horizon.
    std::uint64_t warmup = 0;
    std::uint64_t horizon = 0;
};

/// Turn a checked query into the analysis it requests.
BoundQuery bindQuery(std::shared_ptr<const QueryAst> ast, std::uint64_t budget = kDefaultUnfoldingBudget);

}  // namespace smc::query
