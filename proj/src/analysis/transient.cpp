#include "smc/analysis/transient.hpp"

#include <algorithm>

#include "smc/error.hpp"
#include "smc/stats/running_stats.hpp"

namespace smc::analysis {

ObservableGridProgram::ObservableGridProgram(std::vector<std::string> observables, std::vector<std::uint64_t> times)
    : observables_(std::move(observables)), times_(std::move(times)) {
    if (observables_.empty()) throw ConfigError("transient analysis needs at least one observable");
    if (times_.empty()) throw ConfigError("transient analysis needs at least one time");
    if (!std::is_sorted(times_.begin(), times_.end()) ||
        std::adjacent_find(times_.begin(), times_.end()) != times_.end())
        throw ConfigError("transient times must be strictly increasing");
}

void ObservableGridProgram::replicate(Simulator& sim, std::uint64_t seed, std::span<const std::size_t> active,
                                      std::span<double> out) const {
    std::vector<ObservableSlot> slots;
    slots.reserve(observables_.size());
    for (const auto& name : observables_) slots.push_back(sim.resolve(name));

    // Visit the active cells time-major so the trajectory is walked once.
    std::vector<std::size_t> order(active.begin(), active.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cellTime(a) < cellTime(b); });

    sim.reset(seed);
    for (std::size_t cell : order) {
        const std::uint64_t t = cellTime(cell);
        while (sim.stepCount() < t) sim.next();
        out[cell] = sim.read(slots[cell / times_.size()]);
    }
}

void TransientRequest::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    if (blockSize < 2) throw ConfigError("block size must be at least 2");
    if (maxSims && *maxSims < 2) throw ConfigError("max-sims must be at least 2");
}

bool TransientResult::allConverged() const {
    return !failure && std::all_of(cells.begin(), cells.end(), [](const auto& c) { return c.ci.converged; });
}

TransientResult autoIR(const TransientRequest& request, const TransientProgram& program, WorkerPool& pool,
                       SeedPlan plan) {
    request.validate();
    const std::size_t cellCount = program.cellCount();
    if (cellCount == 0) throw ConfigError("transient analysis has no cells");

    TransientResult result;
    result.cells.resize(cellCount);
    std::vector<RunningStats> stats(cellCount);
    std::vector<std::size_t> active(cellCount);
    for (std::size_t k = 0; k < cellCount; ++k) {
        active[k] = k;
        auto& cell = result.cells[k];
        cell.observable = program.cellLabel(k);
        cell.time = program.cellTime(k);
        cell.ci.alpha = request.alpha;
        cell.ci.deltaTarget = request.delta;
        cell.ci.deltaMode = request.deltaMode;
    }

    std::uint64_t n = 0;
    while (!active.empty()) {
        std::uint64_t blockEnd = n + request.blockSize;
        if (request.maxSims) blockEnd = std::min(blockEnd, *request.maxSims);
        if (blockEnd <= n) break;

        std::vector<std::vector<double>> values;
        try {
            values = pool.map<std::vector<double>>(n, blockEnd, [&](Simulator& sim, std::uint64_t index) {
                const std::uint64_t seed = deriveSeed(plan, index);
                std::vector<double> out(cellCount, 0.0);
                try {
                    program.replicate(sim, seed, active, out);
                } catch (const UnknownObservableError&) {
                    throw;
                } catch (const ConfigError&) {
                    throw;
                } catch (const ReplicationFailedError& e) {
                    throw ReplicationFailedError(index, seed, e.cause());
                } catch (const std::exception& e) {
                    throw ReplicationFailedError(index, seed, e.what());
                }
                return out;
            });
        } catch (const ReplicationFailedError& e) {
            result.failure = e.what();
            break;
        }

        // Fold in replication-index order.
        for (const auto& row : values)
            for (std::size_t k : active) stats[k].add(row[k]);
        n = blockEnd;

        std::vector<std::size_t> stillActive;
        for (std::size_t k : active) {
            auto& ci = result.cells[k].ci;
            ci.n = stats[k].count();
            ci.estimate = stats[k].mean();
            ci.variance = stats[k].variance();
            if (ci.n >= 2) {
                ci.halfWidth = ciHalfWidth(stats[k], request.alpha);
                bool fellBack = false;
                ci.converged = meetsPrecision(ci.halfWidth, ci.estimate, request.delta, request.deltaMode, &fellBack);
                result.cells[k].fellBackToAbsolute = fellBack;
            }
            if (!ci.converged) stillActive.push_back(k);
        }
        active = std::move(stillActive);
    }
    result.simulations = n;
    return result;
}

}  // namespace smc::analysis
