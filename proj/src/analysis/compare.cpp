#include "smc/analysis/compare.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>

#include "smc/error.hpp"
#include "smc/io/csv.hpp"
#include "smc/stats/distributions.hpp"

namespace smc::analysis {

namespace {

void requireCounts(const CellSummary& a, const CellSummary& b) {
    if (a.n < 2 || b.n < 2) throw InsufficientDataError("Welch test needs at least 2 samples per cell");
}

struct Moments {
    double fa;
    double fb;
};

Moments scaledVariances(const CellSummary& a, const CellSummary& b) {
    return {a.variance / static_cast<double>(a.n), b.variance / static_cast<double>(b.n)};
}

double satterthwaite(const CellSummary& a, const CellSummary& b, const Moments& f) {
    const double num = (f.fa + f.fb) * (f.fa + f.fb);
    const double den = f.fa * f.fa / static_cast<double>(a.n - 1) + f.fb * f.fb / static_cast<double>(b.n - 1);
    return num / den;
}

}  // namespace

WelchOutcome welchTest(const CellSummary& a, const CellSummary& b, double aW) {
    requireCounts(a, b);
    if (!(aW > 0.0 && aW < 1.0)) throw DomainError("Welch test level must lie in (0, 1)");
    const Moments f = scaledVariances(a, b);
    WelchOutcome out;
    const double diff = a.mean - b.mean;
    if (f.fa + f.fb < kWelchDegeneracyTolerance) {
        out.degenerate = true;
        out.tau = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        out.nu = static_cast<double>(a.n + b.n - 2);
        out.reject = diff != 0.0;
        out.power = 1.0;
        return out;
    }
    out.tau = diff / std::sqrt(f.fa + f.fb);
    out.nu = satterthwaite(a, b, f);
    out.reject = std::fabs(out.tau) > tQuantile(out.nu, 1.0 - aW / 2.0);
    return out;
}

double welchPower(const CellSummary& a, const CellSummary& b, double aW, double epsilon) {
    requireCounts(a, b);
    const Moments f = scaledVariances(a, b);
    if (f.fa + f.fb < kWelchDegeneracyTolerance) return 1.0;
    const double nu = satterthwaite(a, b, f);
    const double tc = tQuantile(nu, 1.0 - aW / 2.0);
    const double theta = std::fabs(epsilon) / std::sqrt(f.fa + f.fb);
    const double power = 1.0 - nonCentralTCdf(tc, nu, theta) + nonCentralTCdf(-tc, nu, theta);
    return std::clamp(power, 0.0, 1.0);
}

double welchPowerUpperTail(const CellSummary& a, const CellSummary& b, double aW, double epsilon) {
    requireCounts(a, b);
    const Moments f = scaledVariances(a, b);
    if (f.fa + f.fb < kWelchDegeneracyTolerance) return 1.0;
    const double nu = satterthwaite(a, b, f);
    const double tc = tQuantile(nu, 1.0 - aW / 2.0);
    const double theta = std::fabs(epsilon) / std::sqrt(f.fa + f.fb);
    return std::clamp(1.0 - nonCentralTCdf(tc, nu, theta), 0.0, 1.0);
}

std::vector<ComparisonRow> compareExperiments(const ExperimentSummary& a, const ExperimentSummary& b, double aW,
                                              double epsilon) {
    using Key = std::pair<std::string, std::uint64_t>;
    std::map<Key, const ExperimentCell*> byKey;
    for (const auto& cell : b.cells) byKey.emplace(Key{cell.observable, cell.time}, &cell);

    auto describe = [](const Key& k) { return k.first + "@" + std::to_string(k.second); };
    std::vector<std::string> unmatched;
    std::vector<ComparisonRow> rows;
    std::map<Key, bool> seen;
    for (const auto& cell : a.cells) {
        const Key key{cell.observable, cell.time};
        auto it = byKey.find(key);
        if (it == byKey.end()) {
            unmatched.push_back("only in first: " + describe(key));
            continue;
        }
        seen[key] = true;
        ComparisonRow row;
        row.observable = cell.observable;
        row.time = cell.time;
        row.outcome = welchTest(cell.summary, it->second->summary, aW);
        if (!row.outcome.degenerate) row.outcome.power = welchPower(cell.summary, it->second->summary, aW, epsilon);
        rows.push_back(std::move(row));
    }
    for (const auto& [key, cell] : byKey)
        if (!seen.contains(key)) unmatched.push_back("only in second: " + describe(key));
    if (!unmatched.empty()) {
        std::string message = "experiment grids differ in " + std::to_string(unmatched.size()) + " cell(s):";
        for (const auto& u : unmatched) message += "\n  " + u;
        throw GridMismatchError(message, std::move(unmatched));
    }
    return rows;
}

namespace {

double toReal(const std::string& text, const std::string& column) {
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError("transient CSV: bad " + column + " value '" + text + "'");
    return v;
}

std::uint64_t toCount(const std::string& text, const std::string& column) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw ConfigError("transient CSV: bad " + column + " value '" + text + "'");
    return v;
}

}  // namespace

ExperimentSummary readTransientCsv(std::istream& in) {
    std::vector<std::string> header;
    if (!io::readCsvRow(in, header)) throw ConfigError("transient CSV is empty");
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* name : {"observable", "time", "mean", "n", "variance"})
        if (!col.contains(name)) throw ConfigError(std::string("transient CSV lacks column '") + name + "'");

    ExperimentSummary summary;
    std::vector<std::string> row;
    while (io::readCsvRow(in, row)) {
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != header.size()) throw ConfigError("transient CSV row has the wrong number of fields");
        ExperimentCell cell;
        cell.observable = row[col["observable"]];
        cell.time = toCount(row[col["time"]], "time");
        cell.summary.mean = toReal(row[col["mean"]], "mean");
        cell.summary.n = toCount(row[col["n"]], "n");
        cell.summary.variance = toReal(row[col["variance"]], "variance");
        summary.cells.push_back(std::move(cell));
    }
    return summary;
}

}  // namespace smc::analysis
