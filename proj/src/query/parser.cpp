#include "smc/query/parser.hpp"

#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <set>

namespace smc::query {

QueryError::QueryError(std::vector<Diagnostic> diagnostics)
    : ConfigError(render(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::string QueryError::render(const std::vector<Diagnostic>& diagnostics) {
    std::string out;
    for (const auto& d : diagnostics) {
        if (!out.empty()) out += '\n';
        out += std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) + ": " + d.message;
    }
    return out;
}

namespace {

enum class Tok {
    Ident, Number, String, LParen, RParen, LBracket, RBracket, Comma, Semicolon, Assign,
    Eq, Lt, Gt, Le, Ge, Plus, Minus, Star, Slash, SEval, End
};

struct Token {
    Tok kind;
    std::string text;
    double number = 0.0;
    SourcePos pos;
};

[[noreturn]] void fail(SourcePos pos, std::string message) { throw QueryError({{pos, std::move(message)}}); }

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    int line = 1;
    int col = 1;
    auto advance = [&](std::size_t k) {
        for (std::size_t j = 0; j < k; ++j) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    auto isIdentStart = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto isIdentChar = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };

    while (i < src.size()) {
        const char c = src[i];
        const SourcePos pos{line, col};
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (isIdentStart(c)) {
            std::size_t j = i;
            while (j < src.size() && isIdentChar(src[j])) ++j;
            std::string word(src.substr(i, j - i));
            if (word == "s" && src.substr(j, 5) == ".eval" && (j + 5 >= src.size() || !isIdentChar(src[j + 5]))) {
                advance(j + 5 - i);
                out.push_back({Tok::SEval, "s.eval", 0.0, pos});
                continue;
            }
            advance(j - i);
            out.push_back({Tok::Ident, std::move(word), 0.0, pos});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() &&
                                                             std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    j = k;
                    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                }
            }
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(src.data() + i, src.data() + j, v);
            if (ec != std::errc() || ptr != src.data() + j)
                fail(pos, "malformed number '" + std::string(src.substr(i, j - i)) + "'");
            advance(j - i);
            out.push_back({Tok::Number, "", v, pos});
            continue;
        }
        if (c == '"') {
            std::string text;
            advance(1);
            while (true) {
                if (i >= src.size() || src[i] == '\n') fail(pos, "unterminated string literal");
                if (src[i] == '"') {
                    advance(1);
                    break;
                }
                if (src[i] == '\\') {
                    if (i + 1 >= src.size()) fail(pos, "unterminated string literal");
                    const char e = src[i + 1];
                    if (e != '"' && e != '\\') fail({line, col}, std::string("unknown escape \\") + e);
                    text += e;
                    advance(2);
                    continue;
                }
                text += src[i];
                advance(1);
            }
            out.push_back({Tok::String, std::move(text), 0.0, pos});
            continue;
        }
        auto two = [&](char second) { return i + 1 < src.size() && src[i + 1] == second; };
        Tok kind;
        std::size_t width = 1;
        switch (c) {
            case '(': kind = Tok::LParen; break;
            case ')': kind = Tok::RParen; break;
            case '[': kind = Tok::LBracket; break;
            case ']': kind = Tok::RBracket; break;
            case ',': kind = Tok::Comma; break;
            case ';': kind = Tok::Semicolon; break;
            case '+': kind = Tok::Plus; break;
            case '-': kind = Tok::Minus; break;
            case '*': kind = Tok::Star; break;
            case '/': kind = Tok::Slash; break;
            case '=':
                if (two('=')) {
                    kind = Tok::Eq;
                    width = 2;
                } else {
                    kind = Tok::Assign;
                }
                break;
            case '<':
                kind = two('=') ? Tok::Le : Tok::Lt;
                width = two('=') ? 2 : 1;
                break;
            case '>':
                kind = two('=') ? Tok::Ge : Tok::Gt;
                width = two('=') ? 2 : 1;
                break;
            default:
                fail(pos, std::string("unexpected character '") + c + "'");
        }
        out.push_back({kind, std::string(src.substr(i, width)), 0.0, pos});
        advance(width);
    }
    out.push_back({Tok::End, "", 0.0, {line, col}});
    return out;
}

const char* describe(Tok t) {
    switch (t) {
        case Tok::Ident: return "identifier";
        case Tok::Number: return "number";
        case Tok::String: return "string";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::Comma: return "','";
        case Tok::Semicolon: return "';'";
        case Tok::Assign: return "'='";
        case Tok::Eq: return "'=='";
        case Tok::Lt: return "'<'";
        case Tok::Gt: return "'>'";
        case Tok::Le: return "'<='";
        case Tok::Ge: return "'>='";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::Slash: return "'/'";
        case Tok::SEval: return "'s.eval'";
        case Tok::End: return "end of input";
    }
    return "token";
}

bool isKeyword(const std::string& w) {
    return w == "if" || w == "then" || w == "else" || w == "fi" || w == "next" || w == "eval";
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    QueryAst parseQuery() {
        QueryAst ast;
        bool haveCommand = false;
        while (peek().kind != Tok::End) {
            if (isWord("eval")) {
                if (haveCommand) fail(peek().pos, "a query has exactly one eval command");
                ast.command = parseEvalCommand();
                haveCommand = true;
            } else {
                if (haveCommand) fail(peek().pos, "operator definitions must precede the eval command");
                ast.operators.push_back(parseOperator());
            }
        }
        if (!haveCommand) fail(peek().pos, "missing eval command");
        return ast;
    }

private:
    const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool isWord(const char* w) const { return peek().kind == Tok::Ident && peek().text == w; }
    Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    Token expect(Tok kind, const char* context) {
        if (peek().kind != kind)
            fail(peek().pos, std::string("expected ") + describe(kind) + " " + context + ", found " + found());
        return take();
    }

    void expectWord(const char* w) {
        if (!isWord(w)) fail(peek().pos, std::string("expected '") + w + "', found " + found());
        take();
    }

    std::string found() const {
        const Token& t = peek();
        if (t.kind == Tok::Ident || t.kind == Tok::String) return std::string(describe(t.kind)) + " '" + t.text + "'";
        return describe(t.kind);
    }

    std::string expectName(const char* context) {
        if (peek().kind != Tok::Ident || isKeyword(peek().text))
            fail(peek().pos, std::string("expected a name ") + context + ", found " + found());
        return take().text;
    }

    OperatorDef parseOperator() {
        OperatorDef op;
        op.pos = peek().pos;
        op.name = expectName("for an operator definition");
        expect(Tok::LParen, "after operator name");
        if (peek().kind != Tok::RParen) {
            op.params.push_back(expectName("for a parameter"));
            while (peek().kind == Tok::Comma) {
                take();
                op.params.push_back(expectName("for a parameter"));
            }
        }
        expect(Tok::RParen, "to close the parameter list");
        expect(Tok::Assign, "in operator definition");
        op.body = parseExpr();
        expect(Tok::Semicolon, "after operator body");
        return op;
    }

    EvalCommand parseEvalCommand() {
        EvalCommand cmd;
        cmd.pos = peek().pos;
        expectWord("eval");
        const Token name = expect(Tok::Ident, "naming the analysis");
        auto kind = parseCommandKind(name.text);
        if (!kind)
            fail(name.pos, "unknown analysis '" + name.text +
                               "' (expected autoIR, warmup, autoBM, autoRD, manualRD or manualBM)");
        cmd.kind = *kind;
        expect(Tok::LParen, "after the analysis name");
        cmd.targets.push_back(parseTarget());
        while (peek().kind == Tok::Comma) {
            take();
            if (isWord("E") && peek(1).kind == Tok::LBracket) {
                cmd.targets.push_back(parseTarget());
                continue;
            }
            parseTail(cmd);
            break;
        }
        expect(Tok::RParen, "to close the eval command");
        expect(Tok::Semicolon, "after the eval command");
        return cmd;
    }

    ExprPtr parseTarget() {
        expectWord("E");
        expect(Tok::LBracket, "after E");
        if (peek().kind != Tok::Ident || (isKeyword(peek().text) && peek().text != "next") ||
            peek(1).kind != Tok::LParen)
            fail(peek().pos, "expected an operator call inside E[ ], found " + found());
        ExprPtr target = parseFactor();
        expect(Tok::RBracket, "to close E[");
        return target;
    }

    // Trailing arguments: an optional range variable, then numbers.
    void parseTail(EvalCommand& cmd) {
        std::optional<std::pair<std::string, SourcePos>> variable;
        if (peek().kind == Tok::Ident) {
            variable = std::pair{peek().text, peek().pos};
            take();
            if (peek().kind == Tok::Comma) take();
        }
        std::vector<double> numbers;
        while (peek().kind == Tok::Number || peek().kind == Tok::Minus) {
            numbers.push_back(parseSignedNumber());
            if (peek().kind != Tok::Comma) break;
            take();
        }
        if (variable) {
            if (numbers.size() != 3)
                fail(variable->second, "a range needs a variable and three numbers: from, step, to");
            cmd.range = RangeSpec{variable->first, numbers[0], numbers[1], numbers[2]};
        } else {
            cmd.numbers = std::move(numbers);
        }
    }

    double parseSignedNumber() {
        double sign = 1.0;
        if (peek().kind == Tok::Minus) {
            take();
            sign = -1.0;
        }
        return sign * expect(Tok::Number, "in the eval command arguments").number;
    }

    Call parseCall() {
        Call c;
        c.pos = peek().pos;
        c.name = take().text;
        expect(Tok::LParen, "after operator name");
        if (peek().kind != Tok::RParen) {
            c.args.push_back(parseExpr());
            while (peek().kind == Tok::Comma) {
                take();
                c.args.push_back(parseExpr());
            }
        }
        expect(Tok::RParen, "to close the argument list");
        return c;
    }

    ExprPtr parseExpr() {
        ExprPtr left = parseTerm();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            const Token op = take();
            left = binary(op.kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub, op.pos, left, parseTerm());
        }
        return left;
    }

    ExprPtr parseTerm() {
        ExprPtr left = parseFactor();
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            const Token op = take();
            left = binary(op.kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div, op.pos, left, parseFactor());
        }
        return left;
    }

    static ExprPtr binary(BinaryOp op, SourcePos pos, ExprPtr l, ExprPtr r) {
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::Binary;
        e->pos = pos;
        e->binaryOp = op;
        e->lhs = std::move(l);
        e->rhs = std::move(r);
        return e;
    }

    ExprPtr parseFactor() {
        const Token& t = peek();
        auto e = std::make_shared<Expr>();
        e->pos = t.pos;
        switch (t.kind) {
            case Tok::Number:
                e->kind = Expr::Kind::Number;
                e->number = take().number;
                return e;
            case Tok::String:
                e->kind = Expr::Kind::String;
                e->text = take().text;
                return e;
            case Tok::Minus: {
                take();
                if (peek().kind == Tok::Number) {
                    e->kind = Expr::Kind::Number;
                    e->number = -take().number;
                    return e;
                }
                auto zero = std::make_shared<Expr>();
                zero->pos = t.pos;
                return binary(BinaryOp::Sub, t.pos, zero, parseFactor());
            }
            case Tok::LParen: {
                take();
                ExprPtr inner = parseExpr();
                expect(Tok::RParen, "to close the parenthesis");
                return inner;
            }
            case Tok::SEval: {
                take();
                expect(Tok::LParen, "after s.eval");
                auto operand = std::make_shared<Expr>();
                operand->pos = peek().pos;
                if (peek().kind == Tok::String) {
                    operand->kind = Expr::Kind::String;
                } else if (peek().kind == Tok::Ident && !isKeyword(peek().text)) {
                    operand->kind = Expr::Kind::Ident;
                } else {
                    fail(peek().pos, "s.eval takes a string or a parameter name, found " + found());
                }
                operand->text = take().text;
                expect(Tok::RParen, "to close s.eval");
                e->kind = Expr::Kind::Eval;
                e->operand = operand;
                return e;
            }
            case Tok::Ident:
                break;
            default:
                fail(t.pos, "expected an expression, found " + found());
        }
        if (t.text == "if") return parseIf();
        if (t.text == "next") {
            take();
            expect(Tok::LParen, "after next");
            if (peek().kind != Tok::Ident || isKeyword(peek().text))
                fail(peek().pos, "next takes an operator call, found " + found());
            e->kind = Expr::Kind::Next;
            e->call = parseCall();
            expect(Tok::RParen, "to close next");
            return e;
        }
        if (isKeyword(t.text)) fail(t.pos, "unexpected keyword '" + t.text + "'");
        if (peek(1).kind == Tok::LParen) {
            e->kind = Expr::Kind::Call;
            e->call = parseCall();
            return e;
        }
        e->kind = Expr::Kind::Ident;
        e->text = take().text;
        return e;
    }

    ExprPtr parseIf() {
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::If;
        e->pos = peek().pos;
        expectWord("if");
        expect(Tok::LParen, "after if");
        e->lhs = parseExpr();
        switch (peek().kind) {
            case Tok::Eq: e->compareOp = CompareOp::Eq; break;
            case Tok::Lt: e->compareOp = CompareOp::Lt; break;
            case Tok::Gt: e->compareOp = CompareOp::Gt; break;
            case Tok::Le: e->compareOp = CompareOp::Le; break;
            case Tok::Ge: e->compareOp = CompareOp::Ge; break;
            default: fail(peek().pos, "expected a comparison (==, <, >, <=, >=), found " + found());
        }
        take();
        e->rhs = parseExpr();
        expect(Tok::RParen, "to close the condition");
        expectWord("then");
        e->thenBranch = parseExpr();
        expectWord("else");
        e->elseBranch = parseExpr();
        expectWord("fi");
        return e;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

// Visits every expression node, calling f(node).
void walk(const Expr& e, const std::function<void(const Expr&)>& f) {
    f(e);
    switch (e.kind) {
        case Expr::Kind::Eval: walk(*e.operand, f); break;
        case Expr::Kind::Call:
        case Expr::Kind::Next:
            for (const auto& a : e.call.args) walk(*a, f);
            break;
        case Expr::Kind::Binary:
            walk(*e.lhs, f);
            walk(*e.rhs, f);
            break;
        case Expr::Kind::If:
            walk(*e.lhs, f);
            walk(*e.rhs, f);
            walk(*e.thenBranch, f);
            walk(*e.elseBranch, f);
            break;
        default: break;
    }
}

}  // namespace

QueryAst parseSyntax(std::string_view source) { return Parser(lex(source)).parseQuery(); }

std::vector<std::string> steppingOperators(const QueryAst& ast) {
    std::set<std::string> stepping;
    std::map<std::string, std::set<std::string>> callees;
    for (const auto& op : ast.operators) {
        walk(*op.body, [&](const Expr& e) {
            if (e.kind == Expr::Kind::Next) stepping.insert(op.name);
            if (e.kind == Expr::Kind::Call || e.kind == Expr::Kind::Next) callees[op.name].insert(e.call.name);
        });
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& [name, called] : callees) {
            if (stepping.contains(name)) continue;
            for (const auto& c : called)
                if (stepping.contains(c)) {
                    stepping.insert(name);
                    changed = true;
                    break;
                }
        }
    }
    return {stepping.begin(), stepping.end()};
}

std::vector<Diagnostic> checkQuery(const QueryAst& ast) {
    std::vector<Diagnostic> out;
    std::map<std::string, const OperatorDef*> defs;
    if (ast.operators.empty()) out.push_back({ast.command.pos, "a query needs at least one operator definition"});
    for (const auto& op : ast.operators) {
        auto [it, inserted] = defs.emplace(op.name, &op);
        if (!inserted)
            out.push_back({op.pos, "operator '" + op.name + "' is already defined at line " +
                                       std::to_string(it->second->pos.line)});
        std::set<std::string> seen;
        for (const auto& p : op.params)
            if (!seen.insert(p).second)
                out.push_back({op.pos, "operator '" + op.name + "' repeats parameter '" + p + "'"});
    }

    auto checkCall = [&](const Call& c) {
        auto it = defs.find(c.name);
        if (it == defs.end()) {
            out.push_back({c.pos, "call to undefined operator '" + c.name + "'"});
        } else if (it->second->params.size() != c.args.size()) {
            out.push_back({c.pos, "operator '" + c.name + "' takes " + std::to_string(it->second->params.size()) +
                                      " argument(s), given " + std::to_string(c.args.size())});
        }
    };
    auto checkExpr = [&](const Expr& root, const std::set<std::string>& scope, const std::string& where) {
        walk(root, [&](const Expr& e) {
            if (e.kind == Expr::Kind::Ident && !scope.contains(e.text))
                out.push_back({e.pos, "unknown identifier '" + e.text + "' in " + where});
            if (e.kind == Expr::Kind::Call || e.kind == Expr::Kind::Next) checkCall(e.call);
        });
    };

    for (const auto& op : ast.operators)
        checkExpr(*op.body, {op.params.begin(), op.params.end()}, "operator '" + op.name + "'");

    const auto stepping = steppingOperators(ast);
    const std::set<std::string> steppingSet(stepping.begin(), stepping.end());
    const EvalCommand& cmd = ast.command;
    std::set<std::string> targetScope;
    if (cmd.range) {
        const auto& r = *cmd.range;
        if (defs.contains(r.variable))
            out.push_back({cmd.pos, "range variable '" + r.variable + "' clashes with an operator name"});
        targetScope.insert(r.variable);
    }
    for (const auto& target : cmd.targets) {
        const Call& call = target->call;
        checkCall(call);
        for (const auto& a : call.args) checkExpr(*a, targetScope, "eval target");
        for (const auto& a : call.args)
            walk(*a, [&](const Expr& e) {
                if (e.kind == Expr::Kind::Next ||
                    (e.kind == Expr::Kind::Call && steppingSet.contains(e.call.name)))
                    out.push_back({e.pos, "eval target arguments must not advance the simulation"});
            });
    }

    switch (cmd.kind) {
        case CommandKind::AutoIR:
            if (!cmd.range)
                out.push_back({cmd.pos, "autoIR needs a range tail: <variable>, <from>, <step>, <to>"});
            break;
        case CommandKind::ManualRD:
            if (cmd.range || cmd.numbers.size() != 2)
                out.push_back({cmd.pos, "manualRD takes two trailing numbers: warmup and horizon"});
            break;
        case CommandKind::ManualBM:
            if (cmd.range || cmd.numbers.size() != 1)
                out.push_back({cmd.pos, "manualBM takes one trailing number: the warmup"});
            break;
        default:
            if (cmd.range || !cmd.numbers.empty())
                out.push_back({cmd.pos, std::string(toString(cmd.kind)) + " takes no trailing arguments"});
            break;
    }
    if (isSteadyCommand(cmd.kind)) {
        for (const auto& target : cmd.targets) {
            if (target->kind == Expr::Kind::Next)
                out.push_back({target->pos, "next is not allowed in a steady-state query (" +
                                                std::string(toString(cmd.kind)) + " targets must be next-free)"});
            else if (steppingSet.contains(target->call.name))
                out.push_back({target->pos, std::string(toString(cmd.kind)) + " targets must be next-free, but '" +
                                                target->call.name + "' can advance the simulation"});
        }
    }
    return out;
}

QueryAst parseQuery(std::string_view source) {
    QueryAst ast = parseSyntax(source);
    auto problems = checkQuery(ast);
    if (!problems.empty()) throw QueryError(std::move(problems));
    return ast;
}

}  // namespace smc::query
