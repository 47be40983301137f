#pragma once

#include <cstring>
#include <memory>
#include <stdexcept>

#include "smc/models/calibration.hpp"
#include "smc/sim/rng.hpp"
#include "smc/sim/simulator.hpp"

namespace smc::testing {

/// x is drawn from N(mu, 1) at reset and then never changes.
class FrozenDraw final : public Simulator {
public:
    explicit FrozenDraw(double mu = 0.0) : mu_(mu) {}
    std::vector<std::string> defaultObservables() const override { return {"x"}; }

protected:
    void doReset(std::uint64_t seed) override {
        Rng rng(seed);
        x_ = mu_ + rng.standardNormal();
    }
    void doNext() override {}
    int doResolve(std::string_view name) override { return name == "x" ? 0 : -1; }
    double doRead(int) override { return x_; }

private:
    double mu_;
    double x_ = 0.0;
};

/// Wraps another simulator and throws from reset for one seed.
class FailingOnSeed final : public Simulator {
public:
    FailingOnSeed(std::unique_ptr<Simulator> inner, std::uint64_t badSeed)
        : inner_(std::move(inner)), badSeed_(badSeed) {}
    std::vector<std::string> defaultObservables() const override { return inner_->defaultObservables(); }

protected:
    void doReset(std::uint64_t seed) override {
        if (seed == badSeed_) throw std::runtime_error("injected fault");
        inner_->reset(seed);
    }
    void doNext() override { inner_->next(); }
    int doResolve(std::string_view name) override {
        try {
            slots_.push_back(inner_->resolve(name));
        } catch (...) {
            return -1;
        }
        return static_cast<int>(slots_.size() - 1);
    }
    double doRead(int slot) override { return inner_->read(slots_[static_cast<std::size_t>(slot)]); }

private:
    std::unique_ptr<Simulator> inner_;
    std::uint64_t badSeed_;
    std::vector<ObservableSlot> slots_;
};

inline SimulatorFactory calibrationFactory(models::CalibrationKind kind) {
    return [kind] { return models::makeCalibrationSim(kind); };
}

inline bool sameBits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace smc::testing
