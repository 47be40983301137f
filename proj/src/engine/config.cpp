#include <algorithm>
#include <filesystem>

#include "smc/engine/engine.hpp"
#include "smc/error.hpp"
#include "smc/io/csv.hpp"

namespace smc::engine {

namespace {

constexpr std::string_view kCommandNames[] = {"transient", "steady", "warmup", "ergodicity", "compare", "query"};

std::string line(std::string_view key, const std::string& value) { return std::string(key) + "=" + value; }

std::string joined(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
    return out;
}

}  // namespace

std::string_view toString(Command c) { return kCommandNames[static_cast<std::size_t>(c)]; }

std::optional<Command> parseCommand(std::string_view text) {
    for (std::size_t i = 0; i < std::size(kCommandNames); ++i)
        if (kCommandNames[i] == text) return static_cast<Command>(i);
    return std::nullopt;
}

void EngineConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    if (aW && !(*aW > 0.0 && *aW < 1.0)) throw ConfigError("aw must lie in (0, 1)");
    if (epsilon && !(*epsilon >= 0.0)) throw ConfigError("epsilon must be non-negative");
    if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
    if (maxSims && *maxSims == 0) throw ConfigError("max-sims must be positive");
    if (fixedSims && *fixedSims == 0) throw ConfigError("fixed-sims must be positive");
    if (maxSteps == 0) throw ConfigError("max-steps must be positive");
    if (blockSize == 0) throw ConfigError("block-size must be positive");
    if (horizonMultiplier < 2) throw ConfigError("horizon-multiplier must be at least 2");
    warmupParams.validate();

    if (command == Command::Compare) {
        if (inputs.size() != 2) throw ConfigError("compare needs exactly two transient CSV files");
        for (const auto& p : inputs)
            if (!std::filesystem::is_regular_file(p)) throw ConfigError("input file not found: " + p);
        return;
    }
    if (!inputs.empty()) throw ConfigError("positional inputs are only accepted by compare");
    if (command == Command::Query && !queryPath) throw ConfigError("query needs --query <file>");
    if (queryPath && !std::filesystem::is_regular_file(*queryPath))
        throw ConfigError("query file not found: " + *queryPath);
    if (command == Command::Transient && !queryPath && times.empty())
        throw ConfigError("transient needs --times (or a query)");
    if (command == Command::Steady) {
        if (method != "autoRD" && method != "autoBM" && method != "manualRD" && method != "manualBM")
            throw ConfigError("method must be autoRD, autoBM, manualRD or manualBM");
        if (method == "manualRD" && !queryPath && !(warmup < horizon))
            throw ConfigError("manualRD needs --warmup w and --horizon m with w < m");
    }
}

std::vector<std::string> EngineConfig::canonicalLines() const {
    using io::formatReal;
    std::vector<std::string> out;
    out.push_back(line("command", std::string(toString(command))));
    if (command != Command::Compare) {
        out.push_back(line("model", model.name));
        for (const auto& [k, v] : model.params) out.push_back(line("model-param", k + "=" + v));
    }
    if (queryPath) out.push_back(line("query", std::filesystem::absolute(*queryPath).string()));
    if (!observables.empty()) out.push_back(line("observable", joined(observables)));
    if (!times.empty()) {
        std::vector<std::string> t;
        for (auto v : times) t.push_back(std::to_string(v));
        out.push_back(line("times", joined(t)));
    }
    for (const auto& p : inputs) out.push_back(line("input", std::filesystem::absolute(p).string()));
    out.push_back(line("method", method));
    out.push_back(line("warmup", std::to_string(warmup)));
    out.push_back(line("horizon", std::to_string(horizon)));
    out.push_back(line("alpha", formatReal(alpha)));
    out.push_back(line("delta", formatReal(delta)));
    out.push_back(line("delta-mode", std::string(toString(deltaMode))));
    if (aW) out.push_back(line("aw", formatReal(*aW)));
    if (epsilon) out.push_back(line("epsilon", formatReal(*epsilon)));
    out.push_back(line("parallelism", std::to_string(parallelism)));
    out.push_back(line("seed", std::to_string(seed)));
    if (maxSims) out.push_back(line("max-sims", std::to_string(*maxSims)));
    if (fixedSims) out.push_back(line("fixed-sims", std::to_string(*fixedSims)));
    out.push_back(line("max-steps", std::to_string(maxSteps)));
    out.push_back(line("block-size", std::to_string(blockSize)));
    out.push_back(line("horizon-multiplier", std::to_string(horizonMultiplier)));
    out.push_back(line("batches", std::to_string(warmupParams.batches)));
    out.push_back(line("discard", std::to_string(warmupParams.discard)));
    out.push_back(line("batch-size", std::to_string(warmupParams.batchSize)));
    out.push_back(line("min-var", formatReal(warmupParams.minVar)));
    out.push_back(line("a-star", formatReal(warmupParams.aStar)));
    out.push_back(line("percentile-ci", percentileCi ? "true" : "false"));
    return out;
}

}  // namespace smc::engine
