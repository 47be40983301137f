#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "smc/query/ast.hpp"
#include "smc/sim/simulator.hpp"

namespace smc::query {

/// Operator parameters are untyped: a number or a string.
using Value = std::variant<double, std::string>;

/// Name -> value bindings for the expression being evaluated.
struct Env {
    const std::vector<std::string>* names = nullptr;
    std::vector<Value> values;

    const Value* lookup(std::string_view name) const;
};

/// Type errors and runaway recursion during evaluation.
class QueryRuntimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operator kept unfolding past the budget (a non-terminating query).
class UnfoldingBudgetError : public QueryRuntimeError {
public:
    UnfoldingBudgetError(std::string op, std::uint64_t budget, std::uint64_t steps);
    const std::string& op() const { return op_; }
    std::uint64_t steps() const { return steps_; }

private:
    std::string op_;
    std::uint64_t steps_;
};

inline constexpr std::uint64_t kDefaultUnfoldingBudget = std::uint64_t{1} << 24;

/// Small-step evaluator bound to one simulator. `next(f(...))` advances the
/// simulator once and then evaluates f in the new state; calls in tail
/// position are iterated rather than recursed.
class Evaluator {
public:
    Evaluator(const QueryAst& ast, Simulator& sim, std::uint64_t budget = kDefaultUnfoldingBudget);

    /// Evaluate a target (a Call or Next node) to completion.
    Value evaluate(const Expr& target, const Env& env);
    double evaluateNumber(const Expr& target, const Env& env);

    /// A computation paused at a `next` in tail position.
    struct Suspended {
        const Call* call = nullptr;
        Env env;
        std::uint64_t unfoldings = 0;
    };
    struct Outcome {
        std::optional<Value> value;
        std::optional<Suspended> suspended;
    };

    /// Evaluate until a value or a tail-position `next`; the caller steps the
    /// simulator and calls resume(). Non-tail subexpressions must not step.
    Outcome start(const Expr& target, const Env& env);
    Outcome resume(Suspended s);

private:
    struct Run {
        std::uint64_t unfoldings = 0;
        const std::string* lastOperator = nullptr;
    };

    Outcome run(const Expr* e, const Env* env, bool suspend, Run& r, int depth);
    Value value(const Expr& e, const Env& env, Run& r, int depth);
    const Expr* enter(const Call& call, const Env& env, Env& into, Run& r, int depth);
    double observe(const Value& name);

    const QueryAst& ast_;
    Simulator& sim_;
    std::uint64_t budget_;
    std::unordered_map<std::string, const OperatorDef*> ops_;
    std::unordered_map<std::string, ObservableSlot> slots_;
};

/// Observable name for an s.eval argument: strings verbatim, numbers via
/// formatNumber (so 0 becomes "0").
std::string observableName(const Value& v);

/// True when every `next` reachable from the targets is in tail position
/// and no non-tail call can step, so all targets of one replication can be
/// evaluated on a single shared trajectory.
bool supportsLockstep(const QueryAst& ast);

/// If evaluating `target` with no bindings is exactly s.eval of a fixed
/// name (e.g. obs("price") with obs(o) = s.eval(o)), that name.
std::optional<std::string> staticObservable(const QueryAst& ast, const Expr& target);

}  // namespace smc::query
