#pragma once

// Arithmetic expression language: parser, immutable AST, evaluator.
// Scenarios define scalar fields, vector fields and coordinate maps as text;
// everything downstream (differentiation, quadrature, verifiers) consumes the
// FieldExpr / MapExpr values built here.
//
// Grammar (precedence low to high): '+' '-'  <  '*' '/'  <  unary '-'  <  '^'
// with '^' right-associative and binding tighter than unary minus, so
// "-x1^2" parses as -(x1^2).  Function calls are name(arg, ...).

#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hyperflux {

enum class Builtin { sin, cos, tan, exp, log, sqrt, abs, min, max, piecewise };

struct BuiltinInfo {
    const char* name;
    Builtin fn;
    int arity;
};

inline constexpr BuiltinInfo builtin_table[] = {
    {"sin", Builtin::sin, 1},   {"cos", Builtin::cos, 1},
    {"tan", Builtin::tan, 1},   {"exp", Builtin::exp, 1},
    {"log", Builtin::log, 1},   {"sqrt", Builtin::sqrt, 1},
    {"abs", Builtin::abs, 1},   {"min", Builtin::min, 2},
    {"max", Builtin::max, 2},   {"piecewise", Builtin::piecewise, 3},
};

inline const BuiltinInfo* find_builtin(std::string_view name) {
    for (const auto& b : builtin_table)
        if (name == b.name) return &b;
    return nullptr;
}

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { number, variable, neg, add, sub, mul, div, pow, call };

    Kind kind;
    double value = 0.0;            // number
    int var = -1;                  // variable index
    Builtin fn = Builtin::sin;     // call
    std::vector<NodePtr> args;     // children
};

inline NodePtr make_number(double v) {
    assert(std::isfinite(v));
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::number;
    n->value = v;
    return n;
}

inline NodePtr make_variable(int index) {
    assert(index >= 0);
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::variable;
    n->var = index;
    return n;
}

inline NodePtr make_unary(Node::Kind kind, NodePtr a) {
    assert(kind == Node::Kind::neg);
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->args = {std::move(a)};
    return n;
}

inline NodePtr make_binary(Node::Kind kind, NodePtr a, NodePtr b) {
    assert(kind == Node::Kind::add || kind == Node::Kind::sub ||
           kind == Node::Kind::mul || kind == Node::Kind::div ||
           kind == Node::Kind::pow);
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->args = {std::move(a), std::move(b)};
    return n;
}

inline NodePtr make_call(Builtin fn, std::vector<NodePtr> args) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::call;
    n->fn = fn;
    n->args = std::move(args);
    return n;
}

/// Parse failure; `offset` is the byte position in the source text.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& what)
        : std::runtime_error("syntax error at offset " + std::to_string(offset) + ": " + what),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

namespace detail {

// x^k for integer k >= 0 by binary exponentiation; keeps small integer powers
// exact and bit-deterministic.
inline double pow_uint(double x, unsigned k) {
    double acc = 1.0;
    double base = x;
    while (k != 0) {
        if (k & 1u) acc *= base;
        base *= base;
        k >>= 1u;
    }
    return acc;
}

inline double eval_pow(double a, double b) {
    double bi;
    if (std::modf(b, &bi) == 0.0 && bi >= 0.0 && bi <= 64.0)
        return pow_uint(a, static_cast<unsigned>(bi));
    return std::pow(a, b);
}

inline double eval_call(Builtin fn, std::span<const double> a) {
    switch (fn) {
        case Builtin::sin: return std::sin(a[0]);
        case Builtin::cos: return std::cos(a[0]);
        case Builtin::tan: return std::tan(a[0]);
        case Builtin::exp: return std::exp(a[0]);
        case Builtin::log: return std::log(a[0]);
        case Builtin::sqrt: return std::sqrt(a[0]);
        case Builtin::abs: return std::abs(a[0]);
        case Builtin::min: return std::fmin(a[0], a[1]);
        case Builtin::max: return std::fmax(a[0], a[1]);
        default: return std::numeric_limits<double>::quiet_NaN();
    }
}

inline double eval_node(const Node& n, std::span<const double> point) {
    switch (n.kind) {
        case Node::Kind::number: return n.value;
        case Node::Kind::variable: return point[static_cast<std::size_t>(n.var)];
        case Node::Kind::neg: return -eval_node(*n.args[0], point);
        case Node::Kind::add: return eval_node(*n.args[0], point) + eval_node(*n.args[1], point);
        case Node::Kind::sub: return eval_node(*n.args[0], point) - eval_node(*n.args[1], point);
        case Node::Kind::mul: return eval_node(*n.args[0], point) * eval_node(*n.args[1], point);
        case Node::Kind::div: return eval_node(*n.args[0], point) / eval_node(*n.args[1], point);
        case Node::Kind::pow:
            return eval_pow(eval_node(*n.args[0], point), eval_node(*n.args[1], point));
        case Node::Kind::call: {
            if (n.fn == Builtin::piecewise) {
                // piecewise(c, then, else): c > 0 selects then, c <= 0 selects else.
                const double c = eval_node(*n.args[0], point);
                if (std::isnan(c)) return c;
                return c > 0.0 ? eval_node(*n.args[1], point) : eval_node(*n.args[2], point);
            }
            double a[3];
            for (std::size_t i = 0; i < n.args.size(); ++i) a[i] = eval_node(*n.args[i], point);
            return eval_call(n.fn, {a, n.args.size()});
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

inline int max_var_index(const Node& n) {
    if (n.kind == Node::Kind::variable) return n.var;
    int m = -1;
    for (const auto& a : n.args) m = std::max(m, max_var_index(*a));
    return m;
}

}  // namespace detail

/// A parsed scalar field over an ordered list of named variables.
/// Immutable after construction; evaluation is pure and reentrant.
class FieldExpr {
public:
    FieldExpr(NodePtr root, std::vector<std::string> vars)
        : root_(std::move(root)), vars_(std::move(vars)) {
        if (!root_) throw std::invalid_argument("FieldExpr: null root");
        if (detail::max_var_index(*root_) >= static_cast<int>(vars_.size()))
            throw std::invalid_argument("FieldExpr: variable index out of range");
    }

    int arity_in() const { return static_cast<int>(vars_.size()); }
    const std::vector<std::string>& vars() const { return vars_; }
    const NodePtr& root() const { return root_; }

    double operator()(std::span<const double> point) const {
        assert(point.size() == vars_.size());
        return detail::eval_node(*root_, point);
    }

private:
    NodePtr root_;
    std::vector<std::string> vars_;
};

/// IEEE double evaluation of the tree. Division by zero and domain errors
/// produce non-finite values rather than exceptions; callers flag them.
inline double eval(const FieldExpr& f, std::span<const double> point) { return f(point); }

/// A vector-valued map R^k -> R^n: components share one variable list.
class MapExpr {
public:
    explicit MapExpr(std::vector<FieldExpr> components)
        : comps_(std::move(components)) {
        if (comps_.empty()) throw std::invalid_argument("MapExpr: needs at least one component");
        for (const auto& c : comps_)
            if (c.arity_in() != comps_.front().arity_in())
                throw std::invalid_argument("MapExpr: components disagree on arity");
    }

    int arity_in() const { return comps_.front().arity_in(); }
    int dim_out() const { return static_cast<int>(comps_.size()); }
    const std::vector<std::string>& vars() const { return comps_.front().vars(); }
    const FieldExpr& component(int i) const { return comps_[static_cast<std::size_t>(i)]; }
    const std::vector<FieldExpr>& components() const { return comps_; }

    void eval_into(std::span<const double> point, std::span<double> out) const {
        assert(out.size() == comps_.size());
        for (std::size_t i = 0; i < comps_.size(); ++i) out[i] = comps_[i](point);
    }

    std::vector<double> operator()(std::span<const double> point) const {
        std::vector<double> out(comps_.size());
        eval_into(point, out);
        return out;
    }

private:
    std::vector<FieldExpr> comps_;
};

namespace detail {

struct Token {
    enum class Type { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end };
    Type type;
    std::size_t offset;
    double value = 0.0;     // number
    std::string_view text;  // ident
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        tok_.offset = pos_;
        if (pos_ >= src_.size()) {
            tok_.type = Token::Type::end;
            return;
        }
        const char c = src_[pos_];
        switch (c) {
            case '+': tok_.type = Token::Type::plus; ++pos_; return;
            case '-': tok_.type = Token::Type::minus; ++pos_; return;
            case '*': tok_.type = Token::Type::star; ++pos_; return;
            case '/': tok_.type = Token::Type::slash; ++pos_; return;
            case '^': tok_.type = Token::Type::caret; ++pos_; return;
            case '(': tok_.type = Token::Type::lparen; ++pos_; return;
            case ')': tok_.type = Token::Type::rparen; ++pos_; return;
            case ',': tok_.type = Token::Type::comma; ++pos_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
                ++end;
            tok_.type = Token::Type::ident;
            tok_.text = src_.substr(pos_, end - pos_);
            pos_ = end;
            return;
        }
        throw ParseError(pos_, std::string("unexpected character '") + c + "'");
    }

    void lex_number() {
        std::size_t end = pos_;
        while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
        if (end < src_.size() && src_[end] == '.') {
            ++end;
            while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
        }
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t e = end + 1;
            if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
            if (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) {
                while (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) ++e;
                end = e;
            }
        }
        double v = 0.0;
        auto [p, ec] = std::from_chars(src_.data() + pos_, src_.data() + end, v);
        if (ec != std::errc{} || p != src_.data() + end)
            throw ParseError(pos_, "malformed number");
        tok_.type = Token::Type::number;
        tok_.value = v;
        pos_ = end;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token tok_{};
};

class Parser {
public:
    Parser(std::string_view src, const std::vector<std::string>& vars)
        : lex_(src), vars_(vars) {}

    NodePtr parse() {
        NodePtr e = parse_expr();
        const Token& t = lex_.peek();
        if (t.type != Token::Type::end)
            throw ParseError(t.offset, "unexpected trailing input");
        return e;
    }

private:
    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            const Token& t = lex_.peek();
            if (t.type == Token::Type::plus) {
                lex_.next();
                lhs = make_binary(Node::Kind::add, std::move(lhs), parse_term());
            } else if (t.type == Token::Type::minus) {
                lex_.next();
                lhs = make_binary(Node::Kind::sub, std::move(lhs), parse_term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_factor();
        for (;;) {
            const Token& t = lex_.peek();
            if (t.type == Token::Type::star) {
                lex_.next();
                lhs = make_binary(Node::Kind::mul, std::move(lhs), parse_factor());
            } else if (t.type == Token::Type::slash) {
                lex_.next();
                lhs = make_binary(Node::Kind::div, std::move(lhs), parse_factor());
            } else {
                return lhs;
            }
        }
    }

    // factor := '-' factor | power; power := atom ('^' factor)?
    // so '^' binds tighter than unary minus and is right-associative.
    NodePtr parse_factor() {
        if (lex_.peek().type == Token::Type::minus) {
            lex_.next();
            return make_unary(Node::Kind::neg, parse_factor());
        }
        NodePtr base = parse_atom();
        if (lex_.peek().type == Token::Type::caret) {
            lex_.next();
            return make_binary(Node::Kind::pow, std::move(base), parse_factor());
        }
        return base;
    }

    NodePtr parse_atom() {
        Token t = lex_.next();
        switch (t.type) {
            case Token::Type::number:
                return make_number(t.value);
            case Token::Type::lparen: {
                NodePtr e = parse_expr();
                expect_rparen();
                return e;
            }
            case Token::Type::ident:
                return parse_ident(t);
            case Token::Type::end:
                throw ParseError(t.offset, "unexpected end of input");
            default:
                throw ParseError(t.offset, "expected a number, variable, or '('");
        }
    }

    NodePtr parse_ident(const Token& t) {
        if (lex_.peek().type == Token::Type::lparen) {
            const BuiltinInfo* b = find_builtin(t.text);
            if (!b)
                throw ParseError(t.offset, "unknown function '" + std::string(t.text) + "'");
            lex_.next();
            std::vector<NodePtr> args;
            args.push_back(parse_expr());
            while (lex_.peek().type == Token::Type::comma) {
                lex_.next();
                args.push_back(parse_expr());
            }
            expect_rparen();
            if (static_cast<int>(args.size()) != b->arity)
                throw ParseError(t.offset, std::string(t.text) + " expects " +
                                               std::to_string(b->arity) + " argument(s), got " +
                                               std::to_string(args.size()));
            return make_call(b->fn, std::move(args));
        }
        // Declared variables shadow the named constants.
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == t.text) return make_variable(static_cast<int>(i));
        if (t.text == "pi") return make_number(std::numbers::pi);
        if (t.text == "e") return make_number(std::numbers::e);
        throw ParseError(t.offset, "unknown identifier '" + std::string(t.text) + "'");
    }

    void expect_rparen() {
        const Token& t = lex_.peek();
        if (t.type != Token::Type::rparen) throw ParseError(t.offset, "expected ')'");
        lex_.next();
    }

    Lexer lex_;
    const std::vector<std::string>& vars_;
};

}  // namespace detail

/// Parse a scalar expression over the given ordered variable names.
/// Throws ParseError with the byte offset on malformed input and on
/// identifiers that are neither declared variables, constants, nor builtins.
inline FieldExpr parse_scalar(std::string_view source, std::vector<std::string> vars) {
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i].empty()) throw std::invalid_argument("parse_scalar: empty variable name");
        for (std::size_t j = i + 1; j < vars.size(); ++j)
            if (vars[i] == vars[j])
                throw std::invalid_argument("parse_scalar: duplicate variable name '" + vars[i] + "'");
    }
    detail::Parser p(source, vars);
    NodePtr root = p.parse();  // must complete before vars is moved from
    return FieldExpr(std::move(root), std::move(vars));
}

/// Componentwise parse_scalar over a shared variable list. Component parse
/// errors are rethrown annotated with the 1-based component index.
inline MapExpr parse_map(const std::vector<std::string>& sources, std::vector<std::string> vars) {
    if (sources.empty()) throw std::invalid_argument("parse_map: no components");
    std::vector<FieldExpr> comps;
    comps.reserve(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
        try {
            comps.push_back(parse_scalar(sources[i], vars));
        } catch (const ParseError& e) {
            throw ParseError(e.offset(), "component " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return MapExpr(std::move(comps));
}

inline bool structurally_equal(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Node::Kind::number: {
            // bit comparison: round-trip equality, and NaN never equals itself
            std::uint64_t ba, bb;
            std::memcpy(&ba, &a.value, sizeof ba);
            std::memcpy(&bb, &b.value, sizeof bb);
            return ba == bb;
        }
        case Node::Kind::variable:
            return a.var == b.var;
        case Node::Kind::call:
            if (a.fn != b.fn) return false;
            [[fallthrough]];
        default:
            if (a.args.size() != b.args.size()) return false;
            for (std::size_t i = 0; i < a.args.size(); ++i)
                if (!structurally_equal(*a.args[i], *b.args[i])) return false;
            return true;
    }
}

inline bool structurally_equal(const FieldExpr& a, const FieldExpr& b) {
    return a.vars() == b.vars() && structurally_equal(*a.root(), *b.root());
}

namespace detail {

inline void format_number(std::string& out, double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    assert(ec == std::errc{});
    out.append(buf, p);
}

// Precedence levels for printing: add/sub 1, mul/div 2, neg 3, pow 4, atoms 5.
inline int print_prec(const Node& n) {
    switch (n.kind) {
        case Node::Kind::add:
        case Node::Kind::sub: return 1;
        case Node::Kind::mul:
        case Node::Kind::div: return 2;
        case Node::Kind::neg: return 3;
        case Node::Kind::number: return n.value < 0.0 ? 3 : 5;
        case Node::Kind::pow: return 4;
        default: return 5;
    }
}

inline void print_node(std::string& out, const Node& n, const std::vector<std::string>& vars);

inline void print_child(std::string& out, const Node& c, const std::vector<std::string>& vars,
                        int min_prec) {
    if (print_prec(c) < min_prec) {
        out += '(';
        print_node(out, c, vars);
        out += ')';
    } else {
        print_node(out, c, vars);
    }
}

inline void print_node(std::string& out, const Node& n, const std::vector<std::string>& vars) {
    switch (n.kind) {
        case Node::Kind::number:
            format_number(out, n.value);
            return;
        case Node::Kind::variable:
            out += vars[static_cast<std::size_t>(n.var)];
            return;
        case Node::Kind::neg:
            out += '-';
            print_child(out, *n.args[0], vars, 3);
            return;
        case Node::Kind::add:
            print_child(out, *n.args[0], vars, 1);
            out += " + ";
            print_child(out, *n.args[1], vars, 2);
            return;
        case Node::Kind::sub:
            print_child(out, *n.args[0], vars, 1);
            out += " - ";
            print_child(out, *n.args[1], vars, 2);
            return;
        case Node::Kind::mul:
            print_child(out, *n.args[0], vars, 2);
            out += "*";
            print_child(out, *n.args[1], vars, 3);
            return;
        case Node::Kind::div:
            print_child(out, *n.args[0], vars, 2);
            out += "/";
            print_child(out, *n.args[1], vars, 3);
            return;
        case Node::Kind::pow:
            print_child(out, *n.args[0], vars, 5);
            out += "^";
            // right operand of '^' is a factor: neg and pow reparse unparenthesized
            print_child(out, *n.args[1], vars, 3);
            return;
        case Node::Kind::call:
            for (const auto& b : builtin_table)
                if (b.fn == n.fn) {
                    out += b.name;
                    break;
                }
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ", ";
                print_node(out, *n.args[i], vars);
            }
            out += ')';
            return;
    }
}

}  // namespace detail

/// Render an expression so that re-parsing yields a structurally identical AST.
inline std::string to_string(const FieldExpr& f) {
    std::string out;
    detail::print_node(out, *f.root(), f.vars());
    return out;
}

/// Simultaneously substitute every variable i by replacement[i].
/// This is AST-level composition; used to assemble boundary charts.
inline NodePtr substitute_vars(const NodePtr& n, std::span<const NodePtr> replacement) {
    switch (n->kind) {
        case Node::Kind::number:
            return n;
        case Node::Kind::variable:
            assert(static_cast<std::size_t>(n->var) < replacement.size());
            return replacement[static_cast<std::size_t>(n->var)];
        default: {
            auto copy = std::make_shared<Node>(*n);
            for (auto& a : copy->args) a = substitute_vars(a, replacement);
            return copy;
        }
    }
}

}  // namespace hyperflux
