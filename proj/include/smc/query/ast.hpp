#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smc::query {

struct SourcePos {
    int line = 1;
    int column = 1;
};

enum class BinaryOp { Add, Sub, Mul, Div };
enum class CompareOp { Eq, Lt, Gt, Le, Ge };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Call {
    std::string name;
    std::vector<ExprPtr> args;
    SourcePos pos;
};

/// Expression node. Which fields are meaningful depends on `kind`:
///   Number: number          String: text        Ident: text
///   Eval: operand (a String or Ident node)      Call / Next: call
///   Binary: binaryOp, lhs, rhs
///   If: compareOp, lhs, rhs (the condition), thenBranch, elseBranch
struct Expr {
    enum class Kind { Number, String, Ident, Eval, Call, Next, Binary, If };

    Kind kind = Kind::Number;
    SourcePos pos;
    double number = 0.0;
    std::string text;
    ExprPtr operand;
    Call call;
    BinaryOp binaryOp = BinaryOp::Add;
    CompareOp compareOp = CompareOp::Eq;
    ExprPtr lhs;
    ExprPtr rhs;
    ExprPtr thenBranch;
    ExprPtr elseBranch;
};

struct OperatorDef {
    std::string name;
    std::vector<std::string> params;
    ExprPtr body;
    SourcePos pos;
};

enum class CommandKind { AutoIR, Warmup, AutoBM, AutoRD, ManualRD, ManualBM };

std::string_view toString(CommandKind kind);
std::optional<CommandKind> parseCommandKind(std::string_view name);
/// Commands whose targets are evaluated on single states (no `next`).
bool isSteadyCommand(CommandKind kind);

struct RangeSpec {
    std::string variable;
    double from = 0.0;
    double step = 1.0;
    double to = 0.0;
};

struct EvalCommand {
    CommandKind kind = CommandKind::AutoIR;
    /// Each target is a Call or a Next node.
    std::vector<ExprPtr> targets;
    /// autoIR only.
    std::optional<RangeSpec> range;
    /// manualRD: (w, m); manualBM: (w).
    std::vector<double> numbers;
    SourcePos pos;
};

struct QueryAst {
    std::vector<OperatorDef> operators;
    EvalCommand command;

    const OperatorDef* findOperator(std::string_view name) const;
};

/// Structural equality, ignoring source positions.
bool equalModuloPositions(const Expr& a, const Expr& b);
bool equalModuloPositions(const QueryAst& a, const QueryAst& b);

/// Canonical source text; parses back to an equal AST.
std::string print(const Expr& e);
std::string print(const Call& c);
std::string print(const QueryAst& ast);

/// Number literal text: integers without exponent or fraction, otherwise %.17g.
std::string formatNumber(double v);

}  // namespace smc::query
