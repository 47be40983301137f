#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "smc/sim/simulator.hpp"

namespace smc::analysis {

/// Reads every probe of a set at the simulator's current state.
using ProbeReader = std::function<void(std::span<double> out)>;

/// Quantities measured on each state of a trajectory, without stepping it:
/// plain observables, or next-free query expressions.
class ProbeSet {
public:
    virtual ~ProbeSet() = default;
    virtual std::size_t size() const = 0;
    virtual std::string label(std::size_t i) const = 0;
    /// Resolve against one simulator. The reader is used only with that
    /// simulator and only from one thread. Throws UnknownObservableError.
    virtual ProbeReader bind(Simulator& sim) const = 0;
};

class ObservableProbes final : public ProbeSet {
public:
    explicit ObservableProbes(std::vector<std::string> names);
    std::size_t size() const override { return names_.size(); }
    std::string label(std::size_t i) const override { return names_[i]; }
    ProbeReader bind(Simulator& sim) const override;

private:
    std::vector<std::string> names_;
};

}  // namespace smc::analysis
