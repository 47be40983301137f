#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace smc {

/// Handle to a resolved observable; cheap to copy, valid for the simulator
/// that produced it.
struct ObservableSlot {
    int index = -1;
    friend bool operator==(ObservableSlot, ObservableSlot) = default;
};

/// Control surface over one stochastic trajectory: reset(seed), next(),
/// eval(observable). Single-threaded; one instance per worker.
///
/// The name "steps" always resolves to the number of next() calls since the
/// last reset, whatever the model.
class Simulator {
public:
    virtual ~Simulator() = default;

    void reset(std::uint64_t seed) {
        doReset(seed);
        steps_ = 0;
    }

    void next() {
        doNext();
        ++steps_;
    }

    /// Throws UnknownObservableError.
    ObservableSlot resolve(std::string_view name);
    double read(ObservableSlot slot) { return slot.index == kStepsSlot ? static_cast<double>(steps_) : doRead(slot.index); }
    double eval(std::string_view name) { return read(resolve(name)); }

    std::uint64_t stepCount() const { return steps_; }

    /// Observables analysed when the user names none.
    virtual std::vector<std::string> defaultObservables() const = 0;

protected:
    static constexpr int kStepsSlot = -2;

    virtual void doReset(std::uint64_t seed) = 0;
    virtual void doNext() = 0;
    /// Slot index >= 0, or -1 when the name is unknown.
    virtual int doResolve(std::string_view name) = 0;
    virtual double doRead(int slot) = 0;

private:
    std::uint64_t steps_ = 0;
};

using SimulatorFactory = std::function<std::unique_ptr<Simulator>()>;

/// Row-major |sampleTimes| x |observables| table.
struct TrajectoryMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double at(std::size_t row, std::size_t col) const { return values[row * cols + col]; }
    friend bool operator==(const TrajectoryMatrix&, const TrajectoryMatrix&) = default;
};

/// Reset with `seed`, step to `horizon`, and record every observable at each
/// sample time (sorted ascending, all <= horizon). Simulator faults surface
/// as ReplicationFailedError carrying the seed.
TrajectoryMatrix runTrajectory(Simulator& sim, std::uint64_t seed, std::uint64_t horizon,
                               std::span<const std::string> observables,
                               std::span<const std::uint64_t> sampleTimes);

}  // namespace smc
