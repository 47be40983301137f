#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "smc/engine/engine.hpp"
#include "smc/io/csv.hpp"
#include "smc/sim/seed.hpp"

namespace smc::engine {

namespace {

namespace fs = std::filesystem;
using io::formatReal;

std::string flag(bool b) { return b ? "true" : "false"; }

std::string optionalReal(const std::optional<CIResult>& ci) { return ci ? formatReal(ci->estimate) : ""; }

void writeAtomically(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string transientCsv(const JobResult& r) {
    std::ostringstream s;
    io::CsvWriter w(s);
    w.row({"observable", "time", "mean", "halfWidth", "n", "converged", "variance"});
    if (r.transient)
        for (const auto& c : r.transient->cells)
            w.row({c.observable, std::to_string(c.time), formatReal(c.ci.estimate), formatReal(c.ci.halfWidth),
                   std::to_string(c.ci.n), flag(c.ci.converged), formatReal(c.ci.variance)});
    return s.str();
}

std::string steadyCsv(const JobResult& r) {
    std::ostringstream s;
    io::CsvWriter w(s);
    w.row({"observable", "estimate", "halfWidth", "n-or-steps", "wSteps", "method", "converged", "adPValue", "lag1",
           "p05", "p95", "stopReason"});
    for (const auto& e : r.steady) {
        const auto& pi = e.percentileInterval;
        w.row({e.observable, formatReal(e.ci.estimate), formatReal(e.ci.halfWidth), std::to_string(e.nOrSteps),
               std::to_string(e.wSteps), e.method, flag(e.ci.converged), formatReal(e.adPValue), formatReal(e.lag1),
               pi ? formatReal(pi->first) : "", pi ? formatReal(pi->second) : "", e.stopReason});
    }
    return s.str();
}

std::string warmupCsv(const JobResult& r) {
    std::ostringstream s;
    io::CsvWriter w(s);
    w.row({"observable", "method", "wSteps", "converged", "lowVariance", "iterations", "adPValue", "lag1"});
    for (const auto& [e, method] : r.warmups)
        w.row({e.observable, method, std::to_string(e.wSteps), flag(e.converged), flag(e.passedByLowVariance),
               std::to_string(e.iterations), formatReal(e.lastTest.adPValue), formatReal(e.lastTest.lag1)});
    return s.str();
}

std::string welchCsv(const JobResult& r) {
    std::ostringstream s;
    io::CsvWriter w(s);
    w.row({"observable", "time", "tau", "nu", "reject", "power", "degenerate"});
    for (const auto& row : r.welch) {
        const auto& o = row.outcome;
        w.row({row.observable, std::to_string(row.time), formatReal(o.tau), formatReal(o.nu), flag(o.reject),
               formatReal(o.power), flag(o.degenerate)});
    }
    return s.str();
}

std::string ergodicityCsv(const JobResult& r) {
    std::ostringstream s;
    io::CsvWriter w(s);
    w.row({"observable", "status", "bmEstimate", "rdEstimate", "discrepancy", "adPValue", "reason"});
    for (const auto& v : r.verdicts)
        w.row({v.observable, std::string(analysis::toString(v.status)), optionalReal(v.bm), optionalReal(v.rd),
               formatReal(v.discrepancy), formatReal(v.adPValue), v.reason});
    return s.str();
}

std::string manifestJson(const JobResult& r) {
    const auto& m = r.manifest;
    nlohmann::ordered_json j;
    j["command"] = std::string(toString(r.command));
    j["status"] = m.failure ? "failed" : "ok";
    if (m.failure) j["failure"] = *m.failure;
    j["configHash"] = m.configHash;
    j["config"] = m.config;
    std::uint64_t base = 0;
    for (const auto& l : m.config)
        if (l.rfind("seed=", 0) == 0) base = std::stoull(l.substr(5));
    j["seedPlan"] = {{"baseSeed", base},
                     {"replicationSeed", "splitmix64(baseSeed ^ index)"},
                     {"warmupStreamIndex", kWarmupStream},
                     {"batchMeansStreamIndex", kBatchMeansStream}};
    j["wallSeconds"] = m.wallSeconds;
    j["replicationsPerWorker"] = m.replicationsPerWorker;
    j["totalReplications"] = m.totalReplications;
    j["kernels"] = m.kernels;
    j["warnings"] = r.warnings;
    return j.dump(2) + "\n";
}

}  // namespace

std::vector<fs::path> emitCsv(const JobResult& result, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

    const bool partial = result.failed();
    const std::pair<const char*, std::string> files[] = {
        {"transient.csv", transientCsv(result)}, {"steady.csv", steadyCsv(result)},
        {"warmup.csv", warmupCsv(result)},       {"welch.csv", welchCsv(result)},
        {"ergodicity.csv", ergodicityCsv(result)},
    };
    std::vector<fs::path> written;
    for (const auto& [name, content] : files) {
        const fs::path complete = dir / name;
        const fs::path marked = dir / (std::string(name) + ".partial");
        fs::remove(partial ? complete : marked, ec);
        writeAtomically(partial ? marked : complete, content);
        written.push_back(partial ? marked : complete);
    }
    writeAtomically(dir / "manifest.json", manifestJson(result));
    written.push_back(dir / "manifest.json");
    return written;
}

}  // namespace smc::engine
