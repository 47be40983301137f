#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smc/analysis/compare.hpp"
#include "smc/analysis/ergodicity.hpp"
#include "smc/analysis/steady.hpp"
#include "smc/analysis/transient.hpp"
#include "smc/models/registry.hpp"
#include "smc/stats/confidence.hpp"

namespace smc::engine {

enum class Command { Transient, Steady, Warmup, Ergodicity, Compare, Query };

std::string_view toString(Command c);
std::optional<Command> parseCommand(std::string_view text);

struct EngineConfig {
    Command command = Command::Transient;
    models::ModelSpec model;
    std::optional<std::string> queryPath;
    std::vector<std::string> observables;
    std::vector<std::uint64_t> times;
    /// autoRD, autoBM, manualRD or manualBM (steady command).
    std::string method = "autoRD";
    std::uint64_t warmup = 0;
    std::uint64_t horizon = 0;

    double alpha = 0.05;
    double delta = 0.1;
    DeltaMode deltaMode = DeltaMode::Absolute;
    /// Welch level; defaults to alpha.
    std::optional<double> aW;
    /// Smallest difference of interest for power; defaults to delta.
    std::optional<double> epsilon;

    unsigned parallelism = 1;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> maxSims;
    std::optional<std::uint64_t> fixedSims;
    std::uint64_t maxSteps = std::uint64_t{1} << 26;
    std::uint64_t blockSize = 20;
    std::uint64_t horizonMultiplier = 2;
    analysis::WarmupParams warmupParams;
    bool percentileCi = false;

    /// compare: the two transient CSVs.
    std::vector<std::string> inputs;
    std::filesystem::path outDir = ".";

    /// Throws ConfigError.
    void validate() const;

    /// Effective settings as sorted "key=value" lines, the same keys the
    /// config file accepts. Feeding them back reproduces the run.
    std::vector<std::string> canonicalLines() const;
};

struct Manifest {
    std::string configHash;
    std::vector<std::string> config;
    double wallSeconds = 0.0;
    std::vector<std::uint64_t> replicationsPerWorker;
    std::uint64_t totalReplications = 0;
    std::string kernels;
    std::optional<std::string> failure;
};

/// A warmup estimate and the analysis it belongs to (warmup, autoRD, ...).
struct WarmupRow {
    analysis::WarmupEstimate estimate;
    std::string method;
};

struct JobResult {
    Command command = Command::Transient;
    std::optional<analysis::TransientResult> transient;
    std::vector<analysis::SteadyEstimate> steady;
    std::vector<WarmupRow> warmups;
    std::vector<analysis::ComparisonRow> welch;
    std::vector<analysis::ErgodicityVerdict> verdicts;
    std::vector<std::string> warnings;
    Manifest manifest;

    bool failed() const { return manifest.failure.has_value(); }
};

/// Runs the configured analysis. Replication failures are reported through
/// manifest.failure; configuration problems throw ConfigError (or
/// UnknownObservableError), and compare grid mismatches throw
/// GridMismatchError.
JobResult runJob(const EngineConfig& config);

/// Writes transient.csv, steady.csv, warmup.csv, welch.csv,
/// ergodicity.csv and manifest.json into dir (created if needed). When the
/// job failed, every CSV gets a ".partial" suffix instead. Returns the
/// paths written.
std::vector<std::filesystem::path> emitCsv(const JobResult& result, const std::filesystem::path& dir);

/// Command-line entry point: 0 success, 1 failed job or grid mismatch,
/// 2 usage or configuration error.
int cliMain(int argc, char** argv);

}  // namespace smc::engine
