#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smc/sim/rng.hpp"
#include "smc/sim/simulator.hpp"

namespace smc::models {

/// N agents betting a fractional-Kelly share of wealth on a binary event.
struct KellyMarketConfig {
    double c = 0.01;
    std::vector<double> beliefs{0.3, 0.5, 0.8};
    std::vector<double> initialWealth{0.33, 0.33, 0.34};
    double piStar = 0.6;

    /// Throws ConfigError.
    void validate() const;
};

struct KellyMarketState {
    std::vector<double> wealth;
    double price = 0.0;
    int lastOutcome = 0;
};

/// Price the market clears at for the given wealth: sum_i belief_i * w_i.
double kellyClearingPrice(const std::vector<double>& wealth, const KellyMarketConfig& config);

/// One betting round. The price clears on the previous wealth; the event
/// occurs iff draw < piStar; agent i's wealth is scaled by
///   (1 - c) + c * belief_i / p          if the event occurs,
///   (1 - c) + c * (1 - belief_i) / (1 - p) otherwise,
/// evaluated in exactly that operation order (out-of-process
/// implementations reproduce it bit for bit).
KellyMarketState kellyStep(const KellyMarketState& state, const KellyMarketConfig& config, double draw);

/// Observables: "price", "outcome", and agent wealth as "<i>" or "wealth.<i>".
/// At step 0 "price" reports the price the first round will clear at.
class KellyMarket final : public Simulator {
public:
    explicit KellyMarket(KellyMarketConfig config);

    std::vector<std::string> defaultObservables() const override;
    const KellyMarketState& state() const { return state_; }
    const KellyMarketConfig& config() const { return config_; }

protected:
    void doReset(std::uint64_t seed) override;
    void doNext() override;
    int doResolve(std::string_view name) override;
    double doRead(int slot) override;

private:
    KellyMarketConfig config_;
    KellyMarketState state_;
    Rng rng_;
};

}  // namespace smc::models
