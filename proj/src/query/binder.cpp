#include "smc/query/binder.hpp"

#include <cmath>

#include "smc/error.hpp"

namespace smc::query {

std::vector<double> expandRange(const RangeSpec& range) {
    if (!(range.step > 0.0)) throw ConfigError("range step must be positive");
    if (range.from > range.to) throw ConfigError("empty range: from is greater than to");
    const double span = (range.to - range.from) / range.step;
    const auto count = static_cast<std::uint64_t>(std::floor(span + 1e-9)) + 1;
    if (count > (std::uint64_t{1} << 24)) throw ConfigError("range has too many values");
    std::vector<double> values;
    values.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) values.push_back(range.from + static_cast<double>(k) * range.step);
    return values;
}

namespace {

std::uint64_t requireCount(double v, const char* what) {
    if (!(v >= 0.0) || v != std::floor(v) || v > 9.007199254740992e15)
        throw ConfigError(std::string(what) + " must be a non-negative integer, got " + formatNumber(v));
    return static_cast<std::uint64_t>(v);
}

}  // namespace

QueryTransientProgram::QueryTransientProgram(std::shared_ptr<const QueryAst> ast, std::uint64_t budget)
    : ast_(std::move(ast)), budget_(budget) {
    const EvalCommand& cmd = ast_->command;
    if (cmd.kind != CommandKind::AutoIR || !cmd.range) throw ConfigError("not a transient query");
    values_ = expandRange(*cmd.range);
    for (double v : values_) times_.push_back(requireCount(v, "range values"));
    rangeName_ = {cmd.range->variable};
    for (const auto& t : cmd.targets) {
        targets_.push_back(t.get());
        labels_.push_back(print(*t));
    }
    lockstep_ = supportsLockstep(*ast_);
}

Env QueryTransientProgram::envFor(std::size_t cell) const {
    Env env;
    env.names = &rangeName_;
    env.values.push_back(values_[cell % values_.size()]);
    return env;
}

void QueryTransientProgram::replicate(Simulator& sim, std::uint64_t seed, std::span<const std::size_t> active,
                                      std::span<double> out) const {
    Evaluator ev(*ast_, sim, budget_);
    auto number = [](const Value& v, const std::string& label) {
        if (const double* d = std::get_if<double>(&v)) return *d;
        throw QueryRuntimeError("target " + label + " evaluated to a string");
    };

    if (!lockstep_) {
        for (std::size_t cell : active) {
            sim.reset(seed);
            out[cell] = number(ev.evaluate(*targets_[cell / values_.size()], envFor(cell)), cellLabel(cell));
        }
        return;
    }

    sim.reset(seed);
    std::vector<std::pair<std::size_t, Evaluator::Suspended>> pending;
    auto settle = [&](std::size_t cell, Evaluator::Outcome o) {
        if (o.value) out[cell] = number(*o.value, cellLabel(cell));
        else pending.emplace_back(cell, std::move(*o.suspended));
    };
    for (std::size_t cell : active) settle(cell, ev.start(*targets_[cell / values_.size()], envFor(cell)));
    while (!pending.empty()) {
        sim.next();
        auto round = std::move(pending);
        pending.clear();
        for (auto& [cell, s] : round) settle(cell, ev.resume(std::move(s)));
    }
}

QueryProbes::QueryProbes(std::shared_ptr<const QueryAst> ast) : ast_(std::move(ast)) {
    if (!isSteadyCommand(ast_->command.kind)) throw ConfigError("not a steady-state query");
    for (const auto& t : ast_->command.targets) {
        labels_.push_back(print(*t));
        direct_.push_back(staticObservable(*ast_, *t));
    }
}

analysis::ProbeReader QueryProbes::bind(Simulator& sim) const {
    struct State {
        std::vector<ObservableSlot> slots;
        std::unique_ptr<Evaluator> ev;
    };
    auto state = std::make_shared<State>();
    state->ev = std::make_unique<Evaluator>(*ast_, sim);
    for (const auto& name : direct_) state->slots.push_back(name ? sim.resolve(*name) : ObservableSlot{});
    const auto& targets = ast_->command.targets;
    return [state, &sim, &targets, this](std::span<double> out) {
        const Env empty;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (direct_[i]) {
                out[i] = sim.read(state->slots[i]);
            } else {
                out[i] = state->ev->evaluateNumber(*targets[i], empty);
            }
        }
    };
}

BoundQuery bindQuery(std::shared_ptr<const QueryAst> ast, std::uint64_t budget) {
    BoundQuery bound;
    bound.kind = ast->command.kind;
    if (bound.kind == CommandKind::AutoIR) {
        bound.transient = std::make_shared<QueryTransientProgram>(ast, budget);
        return bound;
    }
    const auto& numbers = ast->command.numbers;
    if (bound.kind == CommandKind::ManualRD) {
        if (numbers.size() != 2) throw ConfigError("manualRD needs warmup and horizon");
        bound.warmup = requireCount(numbers[0], "manualRD warmup");
        bound.horizon = requireCount(numbers[1], "manualRD horizon");
        if (bound.warmup >= bound.horizon) throw ConfigError("manualRD warmup must be below the horizon");
    } else if (bound.kind == CommandKind::ManualBM) {
        if (numbers.size() != 1) throw ConfigError("manualBM needs a warmup");
        bound.warmup = requireCount(numbers[0], "manualBM warmup");
    }
    bound.probes = std::make_shared<QueryProbes>(std::move(ast));
    return bound;
}

}  // namespace smc::query
