#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "smc/engine/engine.hpp"
#include "smc/error.hpp"

namespace smc::engine {

namespace {

constexpr const char* kUsage =
    "usage: engine <command> [options]\n"
    "\n"
    "commands:\n"
    "  transient    expected values at fixed times (autoIR)\n"
    "  steady       steady-state estimates (--method autoRD|autoBM|manualRD|manualBM)\n"
    "  warmup       warmup-period detection only\n"
    "  ergodicity   autoBM vs autoRD ergodicity diagnosis\n"
    "  compare      Welch comparison of two transient.csv files\n"
    "  query        run the eval command of a query file\n"
    "\n"
    "Run 'engine <command> --help' for the options. '--config <file>' reads\n"
    "key=value lines (or a manifest.json) that act as flags given first.\n";

using Entries = std::vector<std::pair<std::string, std::string>>;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::pair<std::string, std::string> splitEntry(const std::string& text, const std::string& where) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(where + ": expected key=value, got '" + text + "'");
    return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

Entries loadConfigFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    Entries entries;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path + ": " + e.what());
        }
        if (!j.contains("config") || !j["config"].is_array()) throw ConfigError(path + ": no \"config\" array");
        for (const auto& l : j["config"]) entries.push_back(splitEntry(l.get<std::string>(), path));
        return entries;
    }
    std::istringstream lines(text);
    std::string raw;
    for (int no = 1; std::getline(lines, raw); ++no) {
        const std::string l = trim(raw);
        if (l.empty() || l[0] == '#') continue;
        entries.push_back(splitEntry(l, path + ":" + std::to_string(no)));
    }
    return entries;
}

std::vector<std::uint64_t> parseTimes(const std::string& text) {
    std::vector<std::uint64_t> out;
    auto number = [&](const std::string& s) -> std::uint64_t {
        std::size_t used = 0;
        std::uint64_t v = 0;
        try {
            v = std::stoull(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || s[0] == '-') throw ConfigError("bad time '" + s + "'");
        return v;
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(trim(p));
        if (parts.size() != 3) throw ConfigError("times range must be from:step:to");
        const auto a = number(parts[0]), step = number(parts[1]), b = number(parts[2]);
        if (step == 0 || a > b) throw ConfigError("times range needs step > 0 and from <= to");
        for (auto t = a; t <= b; t += step) out.push_back(t);
        return out;
    }
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');)
        if (!trim(p).empty()) out.push_back(number(trim(p)));
    return out;
}

struct SweepSpec {
    std::string key;
    std::vector<std::string> values;
};

SweepSpec parseSweep(const std::string& text) {
    const auto [key, range] = splitEntry(text, "--sweep");
    std::vector<double> parts;
    std::stringstream ss(range);
    for (std::string p; std::getline(ss, p, ':');) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(p, &used));
            if (used != p.size()) throw ConfigError("");
        } catch (const std::exception&) {
            throw ConfigError("--sweep expects key=from:step:to with numbers, got '" + text + "'");
        }
    }
    if (parts.size() != 3 || !(parts[1] > 0.0) || parts[0] > parts[2])
        throw ConfigError("--sweep expects key=from:step:to with step > 0 and from <= to");
    SweepSpec spec{key, {}};
    const auto count = static_cast<std::uint64_t>(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9)) + 1;
    for (std::uint64_t i = 0; i < count; ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", parts[0] + static_cast<double>(i) * parts[1]);
        spec.values.emplace_back(buf);
    }
    return spec;
}

/// Builds the option set on `app`, writing into `cfg` and the side values.
struct Options {
    EngineConfig cfg;
    std::vector<std::string> modelParams;
    std::string times;
    std::string deltaMode = "absolute";
    std::optional<std::string> sweep;
    std::vector<std::string> inputs;
    std::uint64_t maxSims = 0;
    std::uint64_t fixedSims = 0;
    double aW = 0.0;
    double epsilon = 0.0;
    std::string out = ".";
    std::string query;

    void attach(CLI::App& app) {
        app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        app.add_option("--model", cfg.model.name, "kelly, crra, iidNormal, ar1, constant, counter, exec:<cmd>, tcp:<host>:<port>");
        app.add_option("--model-param", modelParams, "model parameter k=v (repeatable)")
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        app.add_option("--query", query, "query file");
        app.add_option("--observable", cfg.observables, "observables (comma list; default: the model's)")
            ->delimiter(',')
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        app.add_option("--times", times, "sampling times: t1,t2,... or from:step:to");
        app.add_option("--method", cfg.method, "steady method: autoRD, autoBM, manualRD, manualBM");
        app.add_option("--warmup", cfg.warmup, "manual warmup w (manualRD, manualBM)");
        app.add_option("--horizon", cfg.horizon, "manual horizon m (manualRD)");
        app.add_option("--alpha", cfg.alpha, "CI significance level");
        app.add_option("--delta", cfg.delta, "CI width target");
        app.add_option("--delta-mode", deltaMode, "absolute or relative");
        app.add_option("--aw", aW, "Welch test level (default: alpha)");
        app.add_option("--epsilon", epsilon, "difference of interest for Welch power (default: delta)");
        app.add_option("--parallelism", cfg.parallelism, "worker count N");
        app.add_option("--seed", cfg.seed, "base seed");
        app.add_option("--max-sims", maxSims, "replication budget");
        app.add_option("--fixed-sims", fixedSims, "run exactly this many replications");
        app.add_option("--max-steps", cfg.maxSteps, "step budget of single long trajectories");
        app.add_option("--block-size", cfg.blockSize, "replications per block");
        app.add_option("--horizon-multiplier", cfg.horizonMultiplier, "autoRD horizon m = w * multiplier");
        app.add_option("--batches", cfg.warmupParams.batches, "batch count B");
        app.add_option("--discard", cfg.warmupParams.discard, "batches discarded before testing");
        app.add_option("--batch-size", cfg.warmupParams.batchSize, "initial batch size");
        app.add_option("--min-var", cfg.warmupParams.minVar, "low-variance shortcut threshold");
        app.add_option("--a-star", cfg.warmupParams.aStar, "batch-means test level");
        app.add_flag("--percentile-ci", cfg.percentileCi, "also report 5th/95th percentiles of horizontal means");
        app.add_option("--out", out, "output directory");
        app.add_option("--sweep", sweep, "run one job per value: key=from:step:to (a model parameter)");
        app.add_option("--input", inputs, "compare input (alternative to positionals)")
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        app.add_option("inputs", inputs, "compare: two transient.csv files")
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    }

    void finish(CLI::App& app) {
        for (const auto& p : modelParams) {
            auto [k, v] = splitEntry(p, "--model-param");
            cfg.model.params[k] = v;
        }
        if (!query.empty()) cfg.queryPath = query;
        if (!times.empty()) cfg.times = parseTimes(times);
        cfg.deltaMode = parseDeltaMode(deltaMode);
        if (app.count("--max-sims")) cfg.maxSims = maxSims;
        if (app.count("--fixed-sims")) cfg.fixedSims = fixedSims;
        if (app.count("--aw")) cfg.aW = aW;
        if (app.count("--epsilon")) cfg.epsilon = epsilon;
        cfg.inputs = inputs;
        cfg.outDir = out;
    }
};

bool isRepeatableKey(const std::string& key) { return key == "observable" || key == "input"; }

int runOne(const EngineConfig& cfg) {
    JobResult result;
    try {
        result = runJob(cfg);
    } catch (const analysis::GridMismatchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& u : e.unmatched()) std::cerr << "  unmatched: " << u << "\n";
        return 1;
    }
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    emitCsv(result, cfg.outDir);
    if (result.failed()) {
        std::cerr << "error: " << *result.manifest.failure << "\n"
                  << "partial results written to " << cfg.outDir.string() << " (*.partial)\n";
        return 1;
    }
    return 0;
}

}  // namespace

int cliMain(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) {
        std::cerr << kUsage;
        return 2;
    }
    if (args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
        std::cout << kUsage;
        return 0;
    }

    try {
        // Pull out --config so its entries can be placed before the flags.
        std::optional<std::string> configPath;
        std::vector<std::string> rest;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--config") {
                if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file");
                configPath = args[++i];
            } else if (args[i].rfind("--config=", 0) == 0) {
                configPath = args[i].substr(9);
            } else {
                rest.push_back(args[i]);
            }
        }
        Entries entries;
        if (configPath) entries = loadConfigFile(*configPath);

        std::optional<Command> command;
        if (!rest.empty() && rest[0].rfind("-", 0) != 0) {
            command = parseCommand(rest[0]);
            if (!command) {
                std::cerr << "error: unknown command '" << rest[0] << "'\n" << kUsage;
                return 2;
            }
            rest.erase(rest.begin());
        }
        for (const auto& [k, v] : entries)
            if (k == "command" && !command) {
                command = parseCommand(v);
                if (!command) throw ConfigError("unknown command '" + v + "' in " + *configPath);
            }
        if (!command) {
            std::cerr << "error: no command given\n" << kUsage;
            return 2;
        }

        std::vector<std::string> combined;
        auto givenOnCommandLine = [&](const std::string& key) {
            for (const auto& a : rest)
                if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
            return false;
        };
        for (const auto& [k, v] : entries) {
            if (k == "command") continue;
            if (isRepeatableKey(k) && givenOnCommandLine(k)) continue;
            if (k == "percentile-ci") {
                if (v == "true") combined.push_back("--percentile-ci");
                else if (v != "false") throw ConfigError("percentile-ci must be true or false");
                continue;
            }
            combined.push_back("--" + k + "=" + v);
        }
        combined.insert(combined.end(), rest.begin(), rest.end());

        CLI::App app("engine " + std::string(toString(*command)));
        Options opts;
        opts.cfg.command = *command;
        opts.attach(app);
        try {
            std::vector<std::string> reversed(combined.rbegin(), combined.rend());
            app.parse(reversed);
        } catch (const CLI::CallForHelp&) {
            std::cout << app.help();
            return 0;
        } catch (const CLI::ParseError& e) {
            std::cerr << "error: " << e.what() << "\n" << app.help();
            return 2;
        }
        opts.finish(app);

        if (!opts.sweep) {
            opts.cfg.validate();
            return runOne(opts.cfg);
        }
        const SweepSpec sweep = parseSweep(*opts.sweep);
        int status = 0;
        for (const auto& value : sweep.values) {
            EngineConfig cfg = opts.cfg;
            cfg.model.params[sweep.key] = value;
            cfg.outDir = opts.cfg.outDir / (sweep.key + "=" + value);
            cfg.validate();
            std::cerr << "sweep " << sweep.key << "=" << value << "\n";
            status = std::max(status, runOne(cfg));
        }
        return status;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n" << kUsage;
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UnknownObservableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace smc::engine
