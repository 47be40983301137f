#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "smc/error.hpp"
#include "smc/query/ast.hpp"

namespace smc::query {

struct Diagnostic {
    SourcePos pos;
    std::string message;
};

/// Lexical, syntactic or semantic problems with a query. Syntax errors stop
/// at the first problem; semantic checking reports every violation.
class QueryError : public ConfigError {
public:
    explicit QueryError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
    static std::string render(const std::vector<Diagnostic>& diagnostics);
    std::vector<Diagnostic> diagnostics_;
};

/// Syntax only: builds the AST with positions.
QueryAst parseSyntax(std::string_view source);

/// Static checks: duplicate definitions, unknown identifiers, undefined
/// operators, arity, `next` reachable from steady-state targets, range
/// variable clashes and command argument shapes.
std::vector<Diagnostic> checkQuery(const QueryAst& ast);

/// parseSyntax followed by checkQuery; throws QueryError on any problem.
QueryAst parseQuery(std::string_view source);

/// Operators whose evaluation may advance the simulator (directly or through
/// calls).
std::vector<std::string> steppingOperators(const QueryAst& ast);

}  // namespace smc::query
