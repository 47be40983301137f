#include "smc/models/calibration.hpp"

#include <cmath>

#include "smc/error.hpp"

namespace smc::models {

CalibrationSim::CalibrationSim(CalibrationKind kind) : kind_(kind) {
    if (const auto* n = std::get_if<IidNormal>(&kind_); n && !(n->sigma2 > 0.0))
        throw ConfigError("iidNormal: sigma2 must be positive");
    if (const auto* a = std::get_if<Ar1>(&kind_)) {
        if (!(a->sigma2 > 0.0)) throw ConfigError("ar1: sigma2 must be positive");
        if (!(std::fabs(a->phi) < 1.0)) throw ConfigError("ar1: |phi| must be < 1");
    }
    doReset(0);
}

double CalibrationSim::draw() { return rng_.standardNormal(); }

void CalibrationSim::doReset(std::uint64_t seed) {
    rng_.reseed(seed);
    t_ = 0;
    if (const auto* n = std::get_if<IidNormal>(&kind_)) {
        x_ = n->mu + std::sqrt(n->sigma2) * draw();
    } else if (const auto* a = std::get_if<Ar1>(&kind_)) {
        x_ = a->x0;
    } else if (const auto* c = std::get_if<Constant>(&kind_)) {
        x_ = c->value;
    } else {
        x_ = 0.0;
    }
}

void CalibrationSim::doNext() {
    ++t_;
    if (const auto* n = std::get_if<IidNormal>(&kind_)) {
        x_ = n->mu + std::sqrt(n->sigma2) * draw();
    } else if (const auto* a = std::get_if<Ar1>(&kind_)) {
        x_ = a->mu + a->phi * (x_ - a->mu) + std::sqrt(a->sigma2) * draw();
    } else if (std::holds_alternative<Counter>(kind_)) {
        x_ = static_cast<double>(t_);
    }
}

std::unique_ptr<Simulator> makeCalibrationSim(CalibrationKind kind) {
    return std::make_unique<CalibrationSim>(kind);
}

}  // namespace smc::models
