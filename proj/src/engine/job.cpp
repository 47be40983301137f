#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "smc/analysis/probe.hpp"
#include "smc/engine/engine.hpp"
#include "smc/error.hpp"
#include "smc/kernels/reduce.hpp"
#include "smc/query/binder.hpp"
#include "smc/query/parser.hpp"

namespace smc::engine {

namespace {

using namespace smc::analysis;
using query::CommandKind;

std::string fnv1a(const std::vector<std::string>& lines) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& l : lines) {
        if (l.rfind("parallelism=", 0) == 0) continue;
        for (unsigned char c : l + "\n") {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentSummary readExperiment(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    try {
        return readTransientCsv(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

SteadyRequest steadyRequest(const EngineConfig& c) {
    SteadyRequest r;
    r.warmup = c.warmupParams;
    r.alpha = c.alpha;
    r.delta = c.delta;
    r.deltaMode = c.deltaMode;
    r.blockSize = c.blockSize;
    r.maxSims = c.maxSims;
    r.fixedSims = c.fixedSims;
    r.horizonMultiplier = c.horizonMultiplier;
    r.maxSteps = c.maxSteps;
    r.percentileInterval = c.percentileCi;
    r.validate();
    return r;
}

std::string methodOf(CommandKind kind) { return std::string(query::toString(kind)); }

void collectSteady(JobResult& job, SteadyResult&& r) {
    for (auto& e : r.estimates) job.steady.push_back(std::move(e));
    for (auto& w : r.warmups) job.warmups.push_back({std::move(w), "warmup"});
    if (r.failure && !job.manifest.failure) job.manifest.failure = r.failure;
}

void tagWarmups(JobResult& job, std::size_t from, const std::string& method) {
    for (std::size_t i = from; i < job.warmups.size(); ++i) job.warmups[i].method = method;
}

}  // namespace

JobResult runJob(const EngineConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    JobResult job;
    job.command = config.command;
    job.manifest.config = config.canonicalLines();
    job.manifest.configHash = fnv1a(job.manifest.config);
    job.manifest.kernels = std::string(kernels::active().name);

    auto finish = [&] {
        job.manifest.wallSeconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        job.manifest.totalReplications = std::accumulate(job.manifest.replicationsPerWorker.begin(),
                                                         job.manifest.replicationsPerWorker.end(), std::uint64_t{0});
        return job;
    };

    if (config.command == Command::Compare) {
        const auto a = readExperiment(config.inputs[0]);
        const auto b = readExperiment(config.inputs[1]);
        job.welch = compareExperiments(a, b, config.aW.value_or(config.alpha), config.epsilon.value_or(config.delta));
        return finish();
    }

    const auto binding = models::bindModel(config.model);
    WorkerPool pool(binding.factory, config.parallelism);
    const SeedPlan plan{config.seed};

    std::shared_ptr<const query::QueryAst> ast;
    std::optional<query::BoundQuery> bound;
    if (config.queryPath) {
        ast = std::make_shared<const query::QueryAst>(query::parseQuery(readFile(*config.queryPath)));
        bound = query::bindQuery(ast);
    }

    // What to run: the subcommand, refined by the query's eval command.
    Command effective = config.command;
    std::string method = config.method;
    std::uint64_t w = config.warmup, m = config.horizon;
    if (bound) {
        const CommandKind kind = bound->kind;
        if (config.command == Command::Query) {
            effective = kind == CommandKind::AutoIR   ? Command::Transient
                        : kind == CommandKind::Warmup ? Command::Warmup
                                                      : Command::Steady;
        }
        if (effective == Command::Transient && kind != CommandKind::AutoIR)
            throw ConfigError("transient needs a query with an autoIR eval command, got " + methodOf(kind));
        if (effective != Command::Transient && kind == CommandKind::AutoIR)
            throw ConfigError(std::string(toString(effective)) + " needs a steady-state query, got autoIR");
        if (effective == Command::Steady) {
            if (kind == CommandKind::Warmup)
                throw ConfigError("steady needs an autoRD, autoBM, manualRD or manualBM query");
            method = methodOf(kind);
            w = bound->warmup;
            m = bound->horizon;
        }
    }

    const std::vector<std::string> observables =
        config.observables.empty() ? binding.defaultObservables : config.observables;
    std::unique_ptr<ProbeSet> ownedProbes;
    const ProbeSet* probes = nullptr;
    if (bound && effective != Command::Transient) {
        probes = bound->probes.get();
    } else {
        ownedProbes = std::make_unique<ObservableProbes>(observables);
        probes = ownedProbes.get();
    }

    switch (effective) {
        case Command::Transient: {
            TransientRequest req;
            req.alpha = config.alpha;
            req.delta = config.delta;
            req.deltaMode = config.deltaMode;
            req.blockSize = config.blockSize;
            req.maxSims = config.fixedSims ? config.fixedSims : config.maxSims;
            req.validate();
            std::unique_ptr<ObservableGridProgram> grid;
            const TransientProgram* program = nullptr;
            if (bound) {
                program = bound->transient.get();
            } else {
                grid = std::make_unique<ObservableGridProgram>(observables, config.times);
                program = grid.get();
            }
            auto r = autoIR(req, *program, pool, plan);
            job.manifest.failure = r.failure;
            std::size_t open = 0, fellBack = 0;
            for (const auto& c : r.cells) {
                open += !c.ci.converged;
                fellBack += c.fellBackToAbsolute;
            }
            if (open) job.warnings.push_back(std::to_string(open) + " of " + std::to_string(r.cells.size()) +
                                             " cells did not reach the precision target");
            if (fellBack)
                job.warnings.push_back(std::to_string(fellBack) +
                                       " cells used the absolute precision target (mean close to 0)");
            job.transient = std::move(r);
            break;
        }
        case Command::Warmup: {
            Simulator& sim = pool.primary();
            try {
                sim.reset(deriveSeed(plan, kWarmupStream));
                for (auto& e : autoWarmup(sim, *probes, config.warmupParams, config.maxSteps))
                    job.warmups.push_back({std::move(e), "warmup"});
            } catch (const UnknownObservableError&) {
                throw;
            } catch (const std::exception& e) {
                job.manifest.failure = ReplicationFailedError(deriveSeed(plan, kWarmupStream), e.what()).what();
            }
            break;
        }
        case Command::Steady: {
            const SteadyRequest req = steadyRequest(config);
            const std::size_t before = job.warmups.size();
            if (method == "autoRD") collectSteady(job, autoRD(req, *probes, pool, plan));
            else if (method == "manualRD") collectSteady(job, manualRD(req, *probes, pool, plan, w, m));
            else if (method == "autoBM") collectSteady(job, autoBM(req, *probes, pool.primary(), plan));
            else collectSteady(job, manualBM(req, *probes, pool.primary(), plan, w));
            tagWarmups(job, before, method);
            break;
        }
        case Command::Ergodicity: {
            auto r = diagnoseErgodicity(steadyRequest(config), *probes, pool, plan);
            job.verdicts = std::move(r.verdicts);
            std::size_t before = job.warmups.size();
            collectSteady(job, std::move(r.bm));
            tagWarmups(job, before, "autoBM");
            before = job.warmups.size();
            collectSteady(job, std::move(r.rd));
            tagWarmups(job, before, "autoRD");
            break;
        }
        case Command::Compare:
        case Command::Query:
            break;
    }

    if (!job.steady.empty()) {
        std::size_t open = 0;
        for (const auto& e : job.steady) open += !e.ci.converged;
        if (open) job.warnings.push_back(std::to_string(open) + " of " + std::to_string(job.steady.size()) +
                                         " steady-state estimates did not converge");
    }
    job.manifest.replicationsPerWorker = pool.replicationsPerWorker();
    return finish();
}

}  // namespace smc::engine
