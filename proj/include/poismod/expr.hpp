#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "poismod/error.hpp"

namespace poismod {

using Rational = boost::multiprecision::cpp_rational;

enum class ExprKind {
    Number,  // exact rational constant
    PiConst, // the circle constant
    Var,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,     // rational exponent only
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
};

class Expr;

namespace detail {
struct ExprNode {
    ExprKind kind;
    Rational value;          // Number
    std::string name;        // Var
    Rational exponent;       // Pow
    std::vector<Expr> args;  // operands, in order
};
}  // namespace detail

// Immutable symbolic expression with value semantics; nodes are shared, copies are cheap.
// Construction folds exact rational subtrees and identity elements (0+x, 1*x, x^1, ...),
// but no general simplification is attempted.
class Expr {
public:
    Expr();  // the literal 0

    static Expr number(Rational v);
    static Expr integer(long long v) { return number(Rational(v)); }
    static Expr variable(std::string name);
    static Expr pi();

    ExprKind kind() const { return node_->kind; }
    const Rational& number_value() const { return node_->value; }
    const std::string& var_name() const { return node_->name; }
    const Rational& pow_exponent() const { return node_->exponent; }
    const std::vector<Expr>& args() const { return node_->args; }

    bool is_number() const { return node_->kind == ExprKind::Number; }
    bool is_literal(long long v) const {
        return is_number() && node_->value == Rational(v);
    }

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);

    Expr& operator+=(const Expr& b) { *this = *this + b; return *this; }
    Expr& operator-=(const Expr& b) { *this = *this - b; return *this; }
    Expr& operator*=(const Expr& b) { *this = *this * b; return *this; }

private:
    explicit Expr(std::shared_ptr<const detail::ExprNode> n) : node_(std::move(n)) {}
    static Expr make(detail::ExprNode n);
    std::shared_ptr<const detail::ExprNode> node_;

    friend Expr pow(const Expr& base, const Rational& exponent);
    friend Expr exp(const Expr& a);
    friend Expr log(const Expr& a);
    friend Expr sqrt(const Expr& a);
    friend Expr sin(const Expr& a);
    friend Expr cos(const Expr& a);
};

Expr pow(const Expr& base, const Rational& exponent);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sqrt(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);

bool structurally_equal(const Expr& a, const Expr& b);

// Canonical printer; parse(to_string(e)) reproduces e up to canonical rational form.
std::string to_string(const Expr& e);

// Recursive-descent parser for the expression grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ['-'] atom ['^' rational]
//   atom   := number | ident | '(' expr ')' | func '(' expr ')'
//   func   := exp | log | sqrt | sin | cos
// Rational exponents may be parenthesized: x^(1/2). Decimal literals become exact
// rationals. Errors carry the byte offset of the offending token.
Expr parse_expr(const std::string& text);

// Exact symbolic derivative with respect to `var`.
Expr differentiate(const Expr& e, const std::string& var);

// Simultaneous substitution of variables by expressions.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& repl);

std::set<std::string> free_variables(const Expr& e);

using Point = std::map<std::string, double>;

double evaluate(const Expr& e, const Point& at);

struct EvalWithScale {
    double value = 0.0;
    double scale = 0.0;  // max |v| over all subexpression values
};
EvalWithScale evaluate_with_scale(const Expr& e, const Point& at);

// A coordinate chart: ordered coordinate names plus an optional guard expression
// whose positivity delimits the domain.
struct Chart {
    std::vector<std::string> coords;
    std::optional<Expr> guard;

    std::size_t dim() const { return coords.size(); }
    int index_of(const std::string& name) const;  // -1 if absent
};

// Same coordinate names in the same order, and structurally equal guards.
bool charts_equal(const Chart& a, const Chart& b);

struct ZeroTestOptions {
    double tol = 1e-9;
    int trials = 32;
    std::uint64_t seed = 0;  // mixed with the operation/chart-derived seed
};

// Deterministic seed from an operation name and the chart (mixed with a user seed).
std::uint64_t derive_seed(std::string_view op, const Chart& chart, std::uint64_t user_seed);

// Draw a point with coordinates in [-2,-1/2] u [1/2,2]; if the chart guard rejects
// the box, the box is progressively shifted in the positive direction.
Point sample_point(const Chart& chart, std::mt19937_64& rng);

// Randomized zero test: true iff |e(p)| <= tol * (1 + scale(p)) at every trial point.
bool is_zero(const Expr& e, const Chart& chart, const ZeroTestOptions& opt = {});

// Largest |e(p)| / (1 + scale(p)) over the trial points; the residual that
// is_zero compares against tol.
double max_relative_residual(const Expr& e, const Chart& chart, const ZeroTestOptions& opt = {});

}  // namespace poismod
