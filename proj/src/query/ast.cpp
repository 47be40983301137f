#include "smc/query/ast.hpp"

#include <cmath>
#include <cstdio>

namespace smc::query {

std::string_view toString(CommandKind kind) {
    switch (kind) {
        case CommandKind::AutoIR: return "autoIR";
        case CommandKind::Warmup: return "warmup";
        case CommandKind::AutoBM: return "autoBM";
        case CommandKind::AutoRD: return "autoRD";
        case CommandKind::ManualRD: return "manualRD";
        case CommandKind::ManualBM: return "manualBM";
    }
    return "?";
}

std::optional<CommandKind> parseCommandKind(std::string_view name) {
    for (CommandKind k : {CommandKind::AutoIR, CommandKind::Warmup, CommandKind::AutoBM, CommandKind::AutoRD,
                          CommandKind::ManualRD, CommandKind::ManualBM})
        if (toString(k) == name) return k;
    return std::nullopt;
}

bool isSteadyCommand(CommandKind kind) { return kind != CommandKind::AutoIR; }

const OperatorDef* QueryAst::findOperator(std::string_view name) const {
    for (const auto& op : operators)
        if (op.name == name) return &op;
    return nullptr;
}

namespace {

bool equalPtr(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return equalModuloPositions(*a, *b);
}

bool equalCall(const Call& a, const Call& b) {
    if (a.name != b.name || a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!equalPtr(a.args[i], b.args[i])) return false;
    return true;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

const char* symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
    }
    return "?";
}

const char* symbol(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "==";
        case CompareOp::Lt: return "<";
        case CompareOp::Gt: return ">";
        case CompareOp::Le: return "<=";
        case CompareOp::Ge: return ">=";
    }
    return "?";
}

}  // namespace

bool equalModuloPositions(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::Number:
            return a.number == b.number || (std::isnan(a.number) && std::isnan(b.number));
        case Expr::Kind::String:
        case Expr::Kind::Ident:
            return a.text == b.text;
        case Expr::Kind::Eval:
            return equalPtr(a.operand, b.operand);
        case Expr::Kind::Call:
        case Expr::Kind::Next:
            return equalCall(a.call, b.call);
        case Expr::Kind::Binary:
            return a.binaryOp == b.binaryOp && equalPtr(a.lhs, b.lhs) && equalPtr(a.rhs, b.rhs);
        case Expr::Kind::If:
            return a.compareOp == b.compareOp && equalPtr(a.lhs, b.lhs) && equalPtr(a.rhs, b.rhs) &&
                   equalPtr(a.thenBranch, b.thenBranch) && equalPtr(a.elseBranch, b.elseBranch);
    }
    return false;
}

bool equalModuloPositions(const QueryAst& a, const QueryAst& b) {
    if (a.operators.size() != b.operators.size()) return false;
    for (std::size_t i = 0; i < a.operators.size(); ++i) {
        const auto& x = a.operators[i];
        const auto& y = b.operators[i];
        if (x.name != y.name || x.params != y.params || !equalPtr(x.body, y.body)) return false;
    }
    const auto& c = a.command;
    const auto& d = b.command;
    if (c.kind != d.kind || c.targets.size() != d.targets.size() || c.numbers != d.numbers) return false;
    for (std::size_t i = 0; i < c.targets.size(); ++i)
        if (!equalPtr(c.targets[i], d.targets[i])) return false;
    if (c.range.has_value() != d.range.has_value()) return false;
    if (c.range) {
        const auto& r = *c.range;
        const auto& s = *d.range;
        if (r.variable != s.variable || r.from != s.from || r.step != s.step || r.to != s.to) return false;
    }
    return true;
}

std::string formatNumber(double v) {
    char buf[64];
    if (std::isfinite(v) && v == std::trunc(v) && std::fabs(v) < 9.007199254740992e15) {
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
    } else {
        std::snprintf(buf, sizeof buf, "%.17g", v);
    }
    return buf;
}

std::string print(const Call& c) {
    std::string out = c.name + "(";
    for (std::size_t i = 0; i < c.args.size(); ++i) {
        if (i > 0) out += ", ";
        out += print(*c.args[i]);
    }
    return out + ")";
}

std::string print(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Number: return formatNumber(e.number);
        case Expr::Kind::String: return quote(e.text);
        case Expr::Kind::Ident: return e.text;
        case Expr::Kind::Eval: return "s.eval(" + print(*e.operand) + ")";
        case Expr::Kind::Call: return print(e.call);
        case Expr::Kind::Next: return "next(" + print(e.call) + ")";
        case Expr::Kind::Binary:
            return "(" + print(*e.lhs) + " " + symbol(e.binaryOp) + " " + print(*e.rhs) + ")";
        case Expr::Kind::If:
            return "if (" + print(*e.lhs) + " " + symbol(e.compareOp) + " " + print(*e.rhs) + ") then " +
                   print(*e.thenBranch) + " else " + print(*e.elseBranch) + " fi";
    }
    return "";
}

std::string print(const QueryAst& ast) {
    std::string out;
    for (const auto& op : ast.operators) {
        out += op.name + "(";
        for (std::size_t i = 0; i < op.params.size(); ++i) {
            if (i > 0) out += ", ";
            out += op.params[i];
        }
        out += ") = " + print(*op.body) + " ;\n";
    }
    const auto& c = ast.command;
    out += "eval " + std::string(toString(c.kind)) + "(";
    for (std::size_t i = 0; i < c.targets.size(); ++i) {
        if (i > 0) out += ", ";
        out += "E[ " + print(*c.targets[i]) + " ]";
    }
    if (c.range) {
        out += ", " + c.range->variable + ", " + formatNumber(c.range->from) + ", " + formatNumber(c.range->step) +
               ", " + formatNumber(c.range->to);
    }
    for (double v : c.numbers) out += ", " + formatNumber(v);
    out += ") ;\n";
    return out;
}

}  // namespace smc::query
