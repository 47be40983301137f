#include "smc/analysis/probe.hpp"

#include "smc/error.hpp"

namespace smc::analysis {

ObservableProbes::ObservableProbes(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) throw ConfigError("no observables to analyse");
}

ProbeReader ObservableProbes::bind(Simulator& sim) const {
    std::vector<ObservableSlot> slots;
    slots.reserve(names_.size());
    for (const auto& name : names_) slots.push_back(sim.resolve(name));
    return [&sim, slots = std::move(slots)](std::span<double> out) {
        for (std::size_t i = 0; i < slots.size(); ++i) out[i] = sim.read(slots[i]);
    };
}

}  // namespace smc::analysis
