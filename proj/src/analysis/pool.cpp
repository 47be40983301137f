#include "smc/analysis/pool.hpp"

#include <algorithm>

#include "smc/error.hpp"

namespace smc::analysis {

WorkerPool::WorkerPool(SimulatorFactory factory, unsigned parallelism)
    : factory_(std::move(factory)), sims_(std::max(1u, parallelism)), counts_(sims_.size(), 0) {
    if (parallelism == 0) throw ConfigError("parallelism must be at least 1");
}

Simulator& WorkerPool::simulator(unsigned worker) {
    auto& slot = sims_[worker];
    if (!slot) {
        slot = factory_();
        if (!slot) throw ConfigError("simulator factory returned nothing");
    }
    return *slot;
}

void WorkerPool::forEach(std::uint64_t begin, std::uint64_t end,
                         const std::function<void(Simulator&, std::uint64_t)>& task) {
    if (end <= begin) return;
    const std::uint64_t total = end - begin;
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(sims_.size(), total));

    // Simulators are created here, on the coordinator, so launch failures
    // surface before any work starts.
    for (unsigned w = 0; w < workers; ++w) simulator(w);

    struct Failure {
        std::uint64_t index = ~std::uint64_t{0};
        std::exception_ptr error;
    };
    std::vector<Failure> failures(workers);

    auto runRange = [&](unsigned w, std::uint64_t lo, std::uint64_t hi) {
        Simulator& sim = *sims_[w];
        for (std::uint64_t i = lo; i < hi; ++i) {
            try {
                task(sim, i);
                ++counts_[w];
            } catch (...) {
                failures[w] = {i, std::current_exception()};
                return;
            }
        }
    };

    const std::uint64_t base = total / workers;
    const std::uint64_t extra = total % workers;
    std::vector<std::jthread> threads;
    threads.reserve(workers > 0 ? workers - 1 : 0);
    std::uint64_t lo = begin;
    std::uint64_t firstHi = 0;
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t hi = lo + base + (w < extra ? 1 : 0);
        if (w == 0) firstHi = hi;
        else threads.emplace_back(runRange, w, lo, hi);
        lo = hi;
    }
    runRange(0, begin, firstHi);
    threads.clear();

    const Failure* first = nullptr;
    for (const auto& f : failures)
        if (f.error && (!first || f.index < first->index)) first = &f;
    if (first) std::rethrow_exception(first->error);
}

}  // namespace smc::analysis
