#include "smc/sim/simulator.hpp"

#include <algorithm>
#include <string>

#include "smc/error.hpp"

namespace smc {

ObservableSlot Simulator::resolve(std::string_view name) {
    if (name == "steps") return ObservableSlot{kStepsSlot};
    const int slot = doResolve(name);
    if (slot < 0) throw UnknownObservableError(std::string(name));
    return ObservableSlot{slot};
}

TrajectoryMatrix runTrajectory(Simulator& sim, std::uint64_t seed, std::uint64_t horizon,
                               std::span<const std::string> observables,
                               std::span<const std::uint64_t> sampleTimes) {
    if (!std::is_sorted(sampleTimes.begin(), sampleTimes.end()))
        throw ConfigError("runTrajectory: sample times must be sorted");
    if (!sampleTimes.empty() && sampleTimes.back() > horizon)
        throw ConfigError("runTrajectory: sample time beyond horizon");

    TrajectoryMatrix out;
    out.rows = sampleTimes.size();
    out.cols = observables.size();
    out.values.reserve(out.rows * out.cols);
    try {
        sim.reset(seed);
        std::vector<ObservableSlot> slots;
        slots.reserve(observables.size());
        for (const auto& name : observables) slots.push_back(sim.resolve(name));
        std::size_t next = 0;
        for (std::uint64_t t = 0;; ++t) {
            while (next < sampleTimes.size() && sampleTimes[next] == t) {
                for (auto slot : slots) out.values.push_back(sim.read(slot));
                ++next;
            }
            if (t == horizon) break;
            sim.next();
        }
    } catch (const ProtocolError& e) {
        throw ReplicationFailedError(seed, e.what());
    }
    return out;
}

}  // namespace smc
