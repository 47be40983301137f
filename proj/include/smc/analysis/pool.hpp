#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <thread>
#include <vector>

#include "smc/sim/simulator.hpp"

namespace smc::analysis {

/// N workers, each owning one simulator built by the factory on first use.
/// Work for a block of replication indices is split into contiguous ranges,
/// one per worker; results come back in index order, so any fold over them
/// is independent of N.
class WorkerPool {
public:
    WorkerPool(SimulatorFactory factory, unsigned parallelism);

    unsigned parallelism() const { return static_cast<unsigned>(sims_.size()); }

    /// Runs task(sim, index) for every index in [begin, end) and returns the
    /// results ordered by index. If any task throws, the exception of the
    /// lowest failing index is rethrown after all workers finish.
    template <class R>
    std::vector<R> map(std::uint64_t begin, std::uint64_t end,
                       const std::function<R(Simulator&, std::uint64_t)>& task) {
        std::vector<R> results(static_cast<std::size_t>(end - begin));
        forEach(begin, end, [&](Simulator& sim, std::uint64_t index) {
            results[static_cast<std::size_t>(index - begin)] = task(sim, index);
        });
        return results;
    }

    void forEach(std::uint64_t begin, std::uint64_t end,
                 const std::function<void(Simulator&, std::uint64_t)>& task);

    /// Simulator of worker 0, for analyses that follow one long trajectory.
    Simulator& primary() { return simulator(0); }

    /// Replications executed by each worker so far.
    const std::vector<std::uint64_t>& replicationsPerWorker() const { return counts_; }

private:
    Simulator& simulator(unsigned worker);

    SimulatorFactory factory_;
    std::vector<std::unique_ptr<Simulator>> sims_;
    std::vector<std::uint64_t> counts_;
};

}  // namespace smc::analysis
