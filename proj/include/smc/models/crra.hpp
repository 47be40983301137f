#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "smc/sim/rng.hpp"
#include "smc/sim/simulator.hpp"

namespace smc::models {

/// Two CRRA traders with beliefs pi1 < pi2, plus a non-trading reporter who
/// publishes price + v_t with v_t = theta * v_{t-1} + U(-eta, eta).
struct CrraMarketConfig {
    double pi1 = 0.2;
    double pi2 = 0.5;
    double gamma1 = 2.0;
    double gamma2 = 0.5;
    double w1 = 0.5;
    double w2 = 0.5;
    double piStar = 0.45;
    double noiseEta = 0.5;
    double noiseTheta = 0.0;

    void validate() const;

    static CrraMarketConfig iidNoise();
    static CrraMarketConfig arNoise();
    static CrraMarketConfig ergodic();
};

struct CrraMarketState {
    std::array<double, 2> wealth{0.5, 0.5};
    double truePrice = 0.0;
    double noise = 0.0;
    double reportedPrice = 0.0;
    int lastOutcome = 0;
};

/// Optimal CRRA bet shares b1(p), b2(p) at price p.
double crraBetShare1(double p, const CrraMarketConfig& config);
double crraBetShare2(double p, const CrraMarketConfig& config);

/// Market-clearing price for the given wealth: the root in
/// [pi1 + 1e-12, pi2 - 1e-12] of w1 b1(p) p - w2 b2(p) (1 - p), found by
/// Brent's method to 1e-12. When one trader holds all wealth the root sits
/// on the interval end. Throws NumericalError if the solver stalls.
double crraClearingPrice(const std::array<double, 2>& wealth, const CrraMarketConfig& config);

/// One round: clear, bet, draw the event with draws.first < piStar, update
/// wealth, then advance the reporter noise with u = eta * (2 * draws.second - 1).
/// Wealth is renormalised to sum to one after the update.
CrraMarketState crraStep(const CrraMarketState& state, const CrraMarketConfig& config,
                         std::pair<double, double> draws);

CrraMarketState crraInitialState(const CrraMarketConfig& config);

/// Observables: "price" (true clearing price), "reportedPrice", "noise",
/// "outcome", wealth as "<i>" / "wealth.<i>" for i in {0, 1}.
class CrraMarket final : public Simulator {
public:
    explicit CrraMarket(CrraMarketConfig config);

    std::vector<std::string> defaultObservables() const override;
    const CrraMarketState& state() const { return state_; }

protected:
    void doReset(std::uint64_t seed) override;
    void doNext() override;
    int doResolve(std::string_view name) override;
    double doRead(int slot) override;

private:
    CrraMarketConfig config_;
    CrraMarketState state_;
    Rng rng_;
};

}  // namespace smc::models
