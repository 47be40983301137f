#include "smc/query/evaluator.hpp"

#include <cmath>
#include <functional>
#include <set>

#include "smc/query/parser.hpp"

namespace smc::query {

namespace {

constexpr int kMaxDepth = 10000;

std::string where(const SourcePos& p) { return std::to_string(p.line) + ":" + std::to_string(p.column); }

double asNumber(const Value& v, const SourcePos& pos, const char* context) {
    if (const double* d = std::get_if<double>(&v)) return *d;
    throw QueryRuntimeError(where(pos) + ": " + context + " needs a number, got string \"" +
                            std::get<std::string>(v) + "\"");
}

}  // namespace

const Value* Env::lookup(std::string_view name) const {
    if (!names) return nullptr;
    for (std::size_t i = 0; i < names->size(); ++i)
        if ((*names)[i] == name) return &values[i];
    return nullptr;
}

UnfoldingBudgetError::UnfoldingBudgetError(std::string op, std::uint64_t budget, std::uint64_t steps)
    : QueryRuntimeError("operator '" + op + "' exceeded the unfolding budget of " + std::to_string(budget) +
                        " after " + std::to_string(steps) + " simulation steps"),
      op_(std::move(op)),
      steps_(steps) {}

std::string observableName(const Value& v) {
    if (const double* d = std::get_if<double>(&v)) return formatNumber(*d);
    return std::get<std::string>(v);
}

Evaluator::Evaluator(const QueryAst& ast, Simulator& sim, std::uint64_t budget)
    : ast_(ast), sim_(sim), budget_(budget) {
    for (const auto& op : ast_.operators) ops_.emplace(op.name, &op);
}

double Evaluator::observe(const Value& name) {
    const std::string key = observableName(name);
    auto it = slots_.find(key);
    if (it == slots_.end()) it = slots_.emplace(key, sim_.resolve(key)).first;
    return sim_.read(it->second);
}

const Expr* Evaluator::enter(const Call& call, const Env& env, Env& into, Run& r, int depth) {
    auto it = ops_.find(call.name);
    if (it == ops_.end()) throw QueryRuntimeError(where(call.pos) + ": undefined operator '" + call.name + "'");
    const OperatorDef& op = *it->second;
    if (op.params.size() != call.args.size())
        throw QueryRuntimeError(where(call.pos) + ": arity mismatch calling '" + call.name + "'");
    Env next;
    next.names = &op.params;
    next.values.reserve(call.args.size());
    for (const auto& a : call.args) next.values.push_back(value(*a, env, r, depth + 1));
    into = std::move(next);
    if (++r.unfoldings > budget_) throw UnfoldingBudgetError(op.name, budget_, sim_.stepCount());
    r.lastOperator = &op.name;
    return op.body.get();
}

Value Evaluator::value(const Expr& e, const Env& env, Run& r, int depth) {
    Outcome o = run(&e, &env, false, r, depth);
    return std::move(*o.value);
}

Evaluator::Outcome Evaluator::run(const Expr* e, const Env* outer, bool suspend, Run& r, int depth) {
    // Bindings are copied only when a call is entered; until then the
    // caller's environment is used in place.
    Env owned;
    const Env* envp = outer;
    if (depth > kMaxDepth)
        throw QueryRuntimeError(where(e->pos) + ": expression nesting exceeds " + std::to_string(kMaxDepth) +
                                " levels (recursion outside tail position?)");
    for (;;) {
        switch (e->kind) {
            case Expr::Kind::Number:
                return {Value{e->number}, std::nullopt};
            case Expr::Kind::String:
                return {Value{e->text}, std::nullopt};
            case Expr::Kind::Ident: {
                const Value* v = envp->lookup(e->text);
                if (!v) throw QueryRuntimeError(where(e->pos) + ": unknown identifier '" + e->text + "'");
                return {*v, std::nullopt};
            }
            case Expr::Kind::Eval: {
                const Expr& operand = *e->operand;
                if (operand.kind == Expr::Kind::String) return {Value{observe(Value{operand.text})}, std::nullopt};
                const Value* v = envp->lookup(operand.text);
                if (!v) throw QueryRuntimeError(where(operand.pos) + ": unknown identifier '" + operand.text + "'");
                return {Value{observe(*v)}, std::nullopt};
            }
            case Expr::Kind::Binary: {
                const double a = asNumber(value(*e->lhs, *envp, r, depth + 1), e->pos, "arithmetic");
                const double b = asNumber(value(*e->rhs, *envp, r, depth + 1), e->pos, "arithmetic");
                double out = 0.0;
                switch (e->binaryOp) {
                    case BinaryOp::Add: out = a + b; break;
                    case BinaryOp::Sub: out = a - b; break;
                    case BinaryOp::Mul: out = a * b; break;
                    case BinaryOp::Div: out = a / b; break;
                }
                return {Value{out}, std::nullopt};
            }
            case Expr::Kind::If: {
                const Value a = value(*e->lhs, *envp, r, depth + 1);
                const Value b = value(*e->rhs, *envp, r, depth + 1);
                bool holds = false;
                if (a.index() != b.index()) {
                    if (e->compareOp != CompareOp::Eq)
                        throw QueryRuntimeError(where(e->pos) + ": cannot order a number against a string");
                } else if (e->compareOp == CompareOp::Eq) {
                    holds = a == b;
                } else {
                    const double x = asNumber(a, e->pos, "ordering");
                    const double y = asNumber(b, e->pos, "ordering");
                    switch (e->compareOp) {
                        case CompareOp::Lt: holds = x < y; break;
                        case CompareOp::Gt: holds = x > y; break;
                        case CompareOp::Le: holds = x <= y; break;
                        case CompareOp::Ge: holds = x >= y; break;
                        default: break;
                    }
                }
                e = holds ? e->thenBranch.get() : e->elseBranch.get();
                continue;
            }
            case Expr::Kind::Call:
                e = enter(e->call, *envp, owned, r, depth);
                envp = &owned;
                continue;
            case Expr::Kind::Next:
                if (suspend) {
                    Env saved = envp == &owned ? std::move(owned) : *envp;
                    return {std::nullopt, Suspended{&e->call, std::move(saved), r.unfoldings}};
                }
                sim_.next();
                e = enter(e->call, *envp, owned, r, depth);
                envp = &owned;
                continue;
        }
    }
}

Value Evaluator::evaluate(const Expr& target, const Env& env) {
    Run r;
    return value(target, env, r, 0);
}

double Evaluator::evaluateNumber(const Expr& target, const Env& env) {
    return asNumber(evaluate(target, env), target.pos, "a query target");
}

Evaluator::Outcome Evaluator::start(const Expr& target, const Env& env) {
    Run r;
    return run(&target, &env, true, r, 0);
}

Evaluator::Outcome Evaluator::resume(Suspended s) {
    Run r;
    r.unfoldings = s.unfoldings;
    Env env;
    const Expr* body = enter(*s.call, s.env, env, r, 0);
    return run(body, &env, true, r, 0);
}

bool supportsLockstep(const QueryAst& ast) {
    const auto steppingList = steppingOperators(ast);
    const std::set<std::string> stepping(steppingList.begin(), steppingList.end());
    bool ok = true;
    std::function<void(const Expr&, bool)> visit = [&](const Expr& e, bool tail) {
        switch (e.kind) {
            case Expr::Kind::Next:
                if (!tail) ok = false;
                for (const auto& a : e.call.args) visit(*a, false);
                break;
            case Expr::Kind::Call:
                if (!tail && stepping.contains(e.call.name)) ok = false;
                for (const auto& a : e.call.args) visit(*a, false);
                break;
            case Expr::Kind::Binary:
                visit(*e.lhs, false);
                visit(*e.rhs, false);
                break;
            case Expr::Kind::If:
                visit(*e.lhs, false);
                visit(*e.rhs, false);
                visit(*e.thenBranch, tail);
                visit(*e.elseBranch, tail);
                break;
            default:
                break;
        }
    };
    for (const auto& op : ast.operators) visit(*op.body, true);
    for (const auto& t : ast.command.targets) visit(*t, true);
    return ok;
}

std::optional<std::string> staticObservable(const QueryAst& ast, const Expr& target) {
    if (target.kind != Expr::Kind::Call) return std::nullopt;
    const OperatorDef* op = ast.findOperator(target.call.name);
    if (!op || op->params.size() != target.call.args.size() || op->body->kind != Expr::Kind::Eval)
        return std::nullopt;
    const Expr& operand = *op->body->operand;
    if (operand.kind == Expr::Kind::String) return operand.text;
    for (std::size_t i = 0; i < op->params.size(); ++i) {
        if (op->params[i] != operand.text) continue;
        const Expr& arg = *target.call.args[i];
        if (arg.kind == Expr::Kind::String) return arg.text;
        if (arg.kind == Expr::Kind::Number) return formatNumber(arg.number);
        return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace smc::query
