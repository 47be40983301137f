#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "smc/sim/rng.hpp"
#include "smc/sim/simulator.hpp"

namespace smc::models {

/// Toy simulators with analytically known laws, all exposing "x".
struct IidNormal {
    double mu = 0.0;
    double sigma2 = 1.0;
};

/// x_t = mu + phi (x_{t-1} - mu) + N(0, sigma2), starting at x0.
/// Stationary variance sigma2 / (1 - phi^2).
struct Ar1 {
    double phi = 0.5;
    double mu = 0.0;
    double sigma2 = 1.0;
    double x0 = 0.0;
};

/// x is always `value`.
struct Constant {
    double value = 0.0;
};

/// x equals the step count.
struct Counter {};

using CalibrationKind = std::variant<IidNormal, Ar1, Constant, Counter>;

class CalibrationSim final : public Simulator {
public:
    explicit CalibrationSim(CalibrationKind kind);

    std::vector<std::string> defaultObservables() const override { return {"x"}; }

protected:
    void doReset(std::uint64_t seed) override;
    void doNext() override;
    int doResolve(std::string_view name) override { return name == "x" ? 0 : -1; }
    double doRead(int) override { return x_; }

private:
    double draw();

    CalibrationKind kind_;
    Rng rng_;
    double x_ = 0.0;
    std::uint64_t t_ = 0;
};

std::unique_ptr<Simulator> makeCalibrationSim(CalibrationKind kind);

}  // namespace smc::models
