#include "smc/models/kelly.hpp"

#include <cassert>
#include <charconv>
#include <cmath>
#include <string>

#include "smc/error.hpp"

namespace smc::models {

void KellyMarketConfig::validate() const {
    if (!(c > 0.0 && c <= 1.0)) throw ConfigError("kelly: c must lie in (0,1]");
    if (beliefs.empty()) throw ConfigError("kelly: at least one agent required");
    if (beliefs.size() != initialWealth.size())
        throw ConfigError("kelly: beliefs and wealth lists differ in length");
    for (double b : beliefs)
        if (!(b > 0.0 && b < 1.0)) throw ConfigError("kelly: beliefs must lie in (0,1)");
    double total = 0.0;
    for (double w : initialWealth) {
        if (!(w >= 0.0)) throw ConfigError("kelly: initial wealth must be non-negative");
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw ConfigError("kelly: initial wealth must sum to 1");
    if (!(piStar > 0.0 && piStar < 1.0)) throw ConfigError("kelly: piStar must lie in (0,1)");
}

double kellyClearingPrice(const std::vector<double>& wealth, const KellyMarketConfig& config) {
    double p = 0.0;
    for (std::size_t i = 0; i < wealth.size(); ++i) p += config.beliefs[i] * wealth[i];
    return p;
}

KellyMarketState kellyStep(const KellyMarketState& state, const KellyMarketConfig& config, double draw) {
    const double p = kellyClearingPrice(state.wealth, config);
    if (!(p > 0.0 && p < 1.0)) throw NumericalError("kelly: degenerate clearing price " + std::to_string(p));
    KellyMarketState next;
    next.price = p;
    next.lastOutcome = draw < config.piStar ? 1 : 0;
    next.wealth.resize(state.wealth.size());
    const double c = config.c;
    if (next.lastOutcome == 1) {
        for (std::size_t i = 0; i < state.wealth.size(); ++i)
            next.wealth[i] = state.wealth[i] * ((1.0 - c) + c * config.beliefs[i] / p);
    } else {
        for (std::size_t i = 0; i < state.wealth.size(); ++i)
            next.wealth[i] = state.wealth[i] * ((1.0 - c) + c * (1.0 - config.beliefs[i]) / (1.0 - p));
    }
#ifndef NDEBUG
    double total = 0.0;
    for (double w : next.wealth) total += w;
    assert(std::fabs(total - 1.0) < 1e-9);
#endif
    return next;
}

namespace {
constexpr int kPriceSlot = 0;
constexpr int kOutcomeSlot = 1;
constexpr int kFirstWealthSlot = 2;

int parseIndex(std::string_view text) {
    int value = -1;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) return -1;
    return value;
}
}  // namespace

KellyMarket::KellyMarket(KellyMarketConfig config) : config_(std::move(config)) {
    config_.validate();
    doReset(0);
}

std::vector<std::string> KellyMarket::defaultObservables() const {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < config_.beliefs.size(); ++i) names.push_back(std::to_string(i));
    names.emplace_back("price");
    return names;
}

void KellyMarket::doReset(std::uint64_t seed) {
    rng_.reseed(seed);
    state_.wealth = config_.initialWealth;
    state_.price = kellyClearingPrice(state_.wealth, config_);
    state_.lastOutcome = 0;
}

void KellyMarket::doNext() {
    // In-place form of kellyStep; same arithmetic, no allocation.
    const double p = kellyClearingPrice(state_.wealth, config_);
    if (!(p > 0.0 && p < 1.0)) throw NumericalError("kelly: degenerate clearing price " + std::to_string(p));
    const double draw = rng_.uniform();
    const double c = config_.c;
    state_.price = p;
    state_.lastOutcome = draw < config_.piStar ? 1 : 0;
    auto& w = state_.wealth;
    if (state_.lastOutcome == 1) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] * ((1.0 - c) + c * config_.beliefs[i] / p);
    } else {
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = w[i] * ((1.0 - c) + c * (1.0 - config_.beliefs[i]) / (1.0 - p));
    }
}

int KellyMarket::doResolve(std::string_view name) {
    if (name == "price") return kPriceSlot;
    if (name == "outcome") return kOutcomeSlot;
    if (name.starts_with("wealth.")) name.remove_prefix(7);
    const int index = parseIndex(name);
    if (index < 0 || index >= static_cast<int>(config_.beliefs.size())) return -1;
    return kFirstWealthSlot + index;
}

double KellyMarket::doRead(int slot) {
    if (slot == kPriceSlot) return state_.price;
    if (slot == kOutcomeSlot) return state_.lastOutcome;
    return state_.wealth[static_cast<std::size_t>(slot - kFirstWealthSlot)];
}

}  // namespace smc::models
