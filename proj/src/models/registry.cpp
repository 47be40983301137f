#include "smc/models/registry.hpp"

#include <charconv>
#include <chrono>
#include <set>
#include <sstream>

#include "smc/error.hpp"
#include "smc/models/calibration.hpp"
#include "smc/models/crra.hpp"
#include "smc/models/kelly.hpp"
#include "smc/sim/external.hpp"

namespace smc::models {

namespace {

double parseNumber(const std::string& key, const std::string& text) {
    double value = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ConfigError("model parameter " + key + ": '" + text + "' is not a number");
    return value;
}

std::vector<double> parseList(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parseNumber(key, item));
    if (out.empty()) throw ConfigError("model parameter " + key + " is empty");
    return out;
}

std::vector<std::string> parseNames(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void rejectUnknown(const ModelSpec& spec, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : spec.params)
        if (!allowed.contains(key)) throw ConfigError("model " + spec.name + " has no parameter '" + key + "'");
}

std::string describe(const ModelSpec& spec) {
    std::string text = spec.name;
    for (const auto& [key, value] : spec.params) text += " " + key + "=" + value;
    return text;
}

ModelBinding bindKelly(const ModelSpec& spec) {
    rejectUnknown(spec, {"c", "beliefs", "wealth", "piStar"});
    KellyMarketConfig config;
    for (const auto& [key, value] : spec.params) {
        if (key == "c") config.c = parseNumber(key, value);
        else if (key == "beliefs") config.beliefs = parseList(key, value);
        else if (key == "wealth") config.initialWealth = parseList(key, value);
        else if (key == "piStar") config.piStar = parseNumber(key, value);
    }
    config.validate();
    KellyMarket probe(config);
    return {[config] { return std::make_unique<KellyMarket>(config); }, probe.defaultObservables(), describe(spec)};
}

ModelBinding bindCrra(const ModelSpec& spec) {
    rejectUnknown(spec, {"scenario", "pi1", "pi2", "gamma1", "gamma2", "w1", "w2", "piStar", "eta", "theta"});
    CrraMarketConfig config;
    if (auto it = spec.params.find("scenario"); it != spec.params.end()) {
        if (it->second == "iid") config = CrraMarketConfig::iidNoise();
        else if (it->second == "ar") config = CrraMarketConfig::arNoise();
        else if (it->second == "ergodic") config = CrraMarketConfig::ergodic();
        else throw ConfigError("crra scenario must be iid, ar or ergodic");
    }
    for (const auto& [key, value] : spec.params) {
        if (key == "scenario") continue;
        const double v = parseNumber(key, value);
        if (key == "pi1") config.pi1 = v;
        else if (key == "pi2") config.pi2 = v;
        else if (key == "gamma1") config.gamma1 = v;
        else if (key == "gamma2") config.gamma2 = v;
        else if (key == "w1") config.w1 = v;
        else if (key == "w2") config.w2 = v;
        else if (key == "piStar") config.piStar = v;
        else if (key == "eta") config.noiseEta = v;
        else if (key == "theta") config.noiseTheta = v;
    }
    config.validate();
    CrraMarket probe(config);
    return {[config] { return std::make_unique<CrraMarket>(config); }, probe.defaultObservables(), describe(spec)};
}

ModelBinding bindCalibration(const ModelSpec& spec) {
    auto get = [&](const std::string& key, double fallback) {
        auto it = spec.params.find(key);
        return it == spec.params.end() ? fallback : parseNumber(key, it->second);
    };
    CalibrationKind kind;
    if (spec.name == "iidNormal") {
        rejectUnknown(spec, {"mu", "sigma2"});
        kind = IidNormal{get("mu", 0.0), get("sigma2", 1.0)};
        if (std::get<IidNormal>(kind).sigma2 <= 0.0) throw ConfigError("iidNormal needs sigma2 > 0");
    } else if (spec.name == "ar1") {
        rejectUnknown(spec, {"phi", "mu", "sigma2", "x0"});
        kind = Ar1{get("phi", 0.5), get("mu", 0.0), get("sigma2", 1.0), get("x0", 0.0)};
        const auto& a = std::get<Ar1>(kind);
        if (!(a.phi > -1.0 && a.phi < 1.0) || a.sigma2 <= 0.0)
            throw ConfigError("ar1 needs |phi| < 1 and sigma2 > 0");
    } else if (spec.name == "constant") {
        rejectUnknown(spec, {"value"});
        kind = Constant{get("value", 0.0)};
    } else {
        rejectUnknown(spec, {});
        kind = Counter{};
    }
    return {[kind] { return makeCalibrationSim(kind); }, {"x"}, describe(spec)};
}

ModelBinding bindExternal(const ModelSpec& spec) {
    rejectUnknown(spec, {"timeoutMs", "observables"});
    ExternalSimSpec ext = ExternalSimSpec::parse(spec.name);
    if (auto it = spec.params.find("timeoutMs"); it != spec.params.end()) {
        const double ms = parseNumber(it->first, it->second);
        if (!(ms > 0.0)) throw ConfigError("timeoutMs must be positive");
        ext.timeout = std::chrono::milliseconds(static_cast<long long>(ms));
    }
    if (auto it = spec.params.find("observables"); it != spec.params.end())
        ext.defaultObservables = parseNames(it->second);
    if (ext.defaultObservables.empty()) ext.defaultObservables = {"price"};
    return {[ext] { return connectExternal(ext); }, ext.defaultObservables, describe(spec)};
}

}  // namespace

std::vector<std::string> builtinModelNames() { return {"kelly", "crra", "iidNormal", "ar1", "constant", "counter"}; }

ModelBinding bindModel(const ModelSpec& spec) {
    if (spec.name == "kelly") return bindKelly(spec);
    if (spec.name == "crra") return bindCrra(spec);
    if (spec.name == "iidNormal" || spec.name == "ar1" || spec.name == "constant" || spec.name == "counter")
        return bindCalibration(spec);
    if (spec.name.starts_with("exec:") || spec.name.starts_with("tcp:")) return bindExternal(spec);
    throw ConfigError("unknown model '" + spec.name + "'");
}

}  // namespace smc::models
