#include "smc/models/crra.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smc/error.hpp"

namespace smc::models {

void CrraMarketConfig::validate() const {
    if (!(pi1 > 0.0 && pi2 < 1.0 && pi1 < pi2)) throw ConfigError("crra: need 0 < pi1 < pi2 < 1");
    if (!(gamma1 > 0.0 && gamma2 > 0.0)) throw ConfigError("crra: risk aversion must be positive");
    if (!(w1 >= 0.0 && w2 >= 0.0) || std::fabs(w1 + w2 - 1.0) > 1e-12)
        throw ConfigError("crra: initial wealth must be non-negative and sum to 1");
    if (!(piStar > 0.0 && piStar < 1.0)) throw ConfigError("crra: piStar must lie in (0,1)");
    if (!(noiseEta > 0.0)) throw ConfigError("crra: eta must be positive");
    if (!(std::fabs(noiseTheta) < 1.0)) throw ConfigError("crra: |theta| must be < 1");
}

CrraMarketConfig CrraMarketConfig::iidNoise() { return CrraMarketConfig{}; }

CrraMarketConfig CrraMarketConfig::arNoise() {
    CrraMarketConfig c;
    c.noiseTheta = 0.9;
    return c;
}

CrraMarketConfig CrraMarketConfig::ergodic() {
    CrraMarketConfig c;
    c.pi2 = 0.8;
    c.gamma2 = 2.0;
    c.noiseTheta = 0.9;
    return c;
}

double crraBetShare1(double p, const CrraMarketConfig& config) {
    const double inv = 1.0 / config.gamma1;
    const double up = std::pow(p * (1.0 - config.pi1), inv);
    const double down = std::pow(config.pi1 * (1.0 - p), inv);
    const double denom =
        up + p * std::pow(config.pi1, inv) * std::pow(1.0 - p, (1.0 - config.gamma1) / config.gamma1);
    return (up - down) / denom;
}

double crraBetShare2(double p, const CrraMarketConfig& config) {
    const double inv = 1.0 / config.gamma2;
    const double up = std::pow(config.pi2 * (1.0 - p), inv);
    const double down = std::pow(p * (1.0 - config.pi2), inv);
    const double denom =
        up + (1.0 - p) * std::pow(1.0 - config.pi2, inv) * std::pow(p, (1.0 - config.gamma2) / config.gamma2);
    return (up - down) / denom;
}

namespace {

constexpr double kEdge = 1e-12;
constexpr double kTolerance = 1e-12;
constexpr int kMaxIterations = 200;

double excessDemand(double p, const std::array<double, 2>& w, const CrraMarketConfig& config) {
    return w[0] * crraBetShare1(p, config) * p - w[1] * crraBetShare2(p, config) * (1.0 - p);
}

}  // namespace

double crraClearingPrice(const std::array<double, 2>& wealth, const CrraMarketConfig& config) {
    double a = config.pi1 + kEdge;
    double b = config.pi2 - kEdge;
    double fa = excessDemand(a, wealth, config);
    double fb = excessDemand(b, wealth, config);
    if (fa >= 0.0) return a;
    if (fb <= 0.0) return b;

    // Brent's method (zeroin).
    double c = a, fc = fa, d = b - a, e = d;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2.0 * 1e-16 * std::fabs(b) + 0.5 * kTolerance;
        const double m = 0.5 * (c - b);
        if (std::fabs(m) <= tol || fb == 0.0) return b;
        if (std::fabs(e) >= tol && std::fabs(fa) > std::fabs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::fabs(tol * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += std::fabs(d) > tol ? d : (m > 0.0 ? tol : -tol);
        fb = excessDemand(b, wealth, config);
    }
    throw NumericalError("crra: clearing price did not converge (w1=" + std::to_string(wealth[0]) +
                         ", w2=" + std::to_string(wealth[1]) + ")");
}

CrraMarketState crraInitialState(const CrraMarketConfig& config) {
    CrraMarketState s;
    s.wealth = {config.w1, config.w2};
    s.truePrice = crraClearingPrice(s.wealth, config);
    s.noise = 0.0;
    s.reportedPrice = s.truePrice;
    return s;
}

CrraMarketState crraStep(const CrraMarketState& state, const CrraMarketConfig& config,
                         std::pair<double, double> draws) {
    const double p = crraClearingPrice(state.wealth, config);
    const double b1 = crraBetShare1(p, config);
    const double b2 = crraBetShare2(p, config);
    const double alpha1 = (1.0 - b1) * p;
    const double alpha2 = (1.0 - b2) * p + b2;

    CrraMarketState next;
    next.truePrice = p;
    next.lastOutcome = draws.first < config.piStar ? 1 : 0;
    if (next.lastOutcome == 1) {
        next.wealth = {alpha1 / p * state.wealth[0], alpha2 / p * state.wealth[1]};
    } else {
        next.wealth = {(1.0 - alpha1) / (1.0 - p) * state.wealth[0],
                       (1.0 - alpha2) / (1.0 - p) * state.wealth[1]};
    }
    const double total = next.wealth[0] + next.wealth[1];
    next.wealth[0] /= total;
    next.wealth[1] /= total;

    const double u = config.noiseEta * (2.0 * draws.second - 1.0);
    next.noise = config.noiseTheta * state.noise + u;
    next.reportedPrice = p + next.noise;
    return next;
}

namespace {
enum Slot : int { kPrice, kReported, kNoise, kOutcome, kWealth0, kWealth1 };
}

CrraMarket::CrraMarket(CrraMarketConfig config) : config_(config) {
    config_.validate();
    doReset(0);
}

std::vector<std::string> CrraMarket::defaultObservables() const { return {"reportedPrice"}; }

void CrraMarket::doReset(std::uint64_t seed) {
    rng_.reseed(seed);
    state_ = crraInitialState(config_);
}

void CrraMarket::doNext() {
    const double first = rng_.uniform();
    const double second = rng_.uniform();
    state_ = crraStep(state_, config_, {first, second});
}

int CrraMarket::doResolve(std::string_view name) {
    if (name == "price") return kPrice;
    if (name == "reportedPrice") return kReported;
    if (name == "noise") return kNoise;
    if (name == "outcome") return kOutcome;
    if (name == "0" || name == "wealth.0") return kWealth0;
    if (name == "1" || name == "wealth.1") return kWealth1;
    return -1;
}

double CrraMarket::doRead(int slot) {
    switch (slot) {
        case kPrice: return state_.truePrice;
        case kReported: return state_.reportedPrice;
        case kNoise: return state_.noise;
        case kOutcome: return state_.lastOutcome;
        case kWealth0: return state_.wealth[0];
        default: return state_.wealth[1];
    }
}

}  // namespace smc::models
