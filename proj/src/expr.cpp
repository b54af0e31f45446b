#include "poismod/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <utility>

namespace poismod {

using detail::ExprNode;

Expr Expr::make(ExprNode n) {
    return Expr(std::make_shared<const ExprNode>(std::move(n)));
}

Expr::Expr() : node_() { *this = number(Rational(0)); }

Expr Expr::number(Rational v) {
    ExprNode n;
    n.kind = ExprKind::Number;
    n.value = std::move(v);
    return make(std::move(n));
}

Expr Expr::variable(std::string name) {
    ExprNode n;
    n.kind = ExprKind::Var;
    n.name = std::move(name);
    return make(std::move(n));
}

Expr Expr::pi() {
    ExprNode n;
    n.kind = ExprKind::PiConst;
    return make(std::move(n));
}

// ---------------------------------------------------------------------------
// Construction with light canonicalization: exact rational folding and
// identity-element elimination. Anything beyond that is out of scope.

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_number() && b.is_number())
        return Expr::number(a.number_value() + b.number_value());
    if (a.is_literal(0)) return b;
    if (b.is_literal(0)) return a;
    if (a.kind() == ExprKind::Neg && structurally_equal(a.args()[0], b))
        return Expr::number(Rational(0));
    if (b.kind() == ExprKind::Neg && structurally_equal(a, b.args()[0]))
        return Expr::number(Rational(0));
    ExprNode n;
    n.kind = ExprKind::Add;
    n.args = {a, b};
    return Expr::make(std::move(n));
}

Expr operator-(const Expr& a, const Expr& b) {
    if (a.is_number() && b.is_number())
        return Expr::number(a.number_value() - b.number_value());
    if (b.is_literal(0)) return a;
    if (a.is_literal(0)) return -b;
    if (structurally_equal(a, b)) return Expr::number(Rational(0));
    ExprNode n;
    n.kind = ExprKind::Sub;
    n.args = {a, b};
    return Expr::make(std::move(n));
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_number() && b.is_number())
        return Expr::number(a.number_value() * b.number_value());
    if (a.is_literal(0) || b.is_literal(0)) return Expr::number(Rational(0));
    if (a.is_literal(1)) return b;
    if (b.is_literal(1)) return a;
    ExprNode n;
    n.kind = ExprKind::Mul;
    n.args = {a, b};
    return Expr::make(std::move(n));
}

Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_number()) {
        if (b.number_value() == 0)
            throw DomainError("division by exact zero", to_string(a) + "/0");
        if (a.is_number()) return Expr::number(a.number_value() / b.number_value());
        if (b.is_literal(1)) return a;
    }
    ExprNode n;
    n.kind = ExprKind::Div;
    n.args = {a, b};
    return Expr::make(std::move(n));
}

Expr operator-(const Expr& a) {
    if (a.is_number()) return Expr::number(-a.number_value());
    if (a.kind() == ExprKind::Neg) return a.args()[0];
    ExprNode n;
    n.kind = ExprKind::Neg;
    n.args = {a};
    return Expr::make(std::move(n));
}

namespace {
bool is_integer(const Rational& r) { return boost::multiprecision::denominator(r) == 1; }

// exact a^k for integer k (k may be negative when a != 0)
Rational rational_ipow(const Rational& a, const boost::multiprecision::cpp_int& k) {
    using boost::multiprecision::cpp_int;
    cpp_int e = k < 0 ? -k : k;
    Rational acc(1), base = a;
    while (e > 0) {
        if ((e & 1) != 0) acc *= base;
        base *= base;
        e >>= 1;
    }
    if (k < 0) acc = Rational(1) / acc;
    return acc;
}
}  // namespace

Expr pow(const Expr& base, const Rational& exponent) {
    if (exponent == 0) return Expr::integer(1);
    if (exponent == 1) return base;
    if (base.is_number() && is_integer(exponent)) {
        const Rational& v = base.number_value();
        if (v != 0 || exponent > 0)
            return Expr::number(rational_ipow(v, boost::multiprecision::numerator(exponent)));
    }
    ExprNode n;
    n.kind = ExprKind::Pow;
    n.args = {base};
    n.exponent = exponent;
    return Expr::make(std::move(n));
}

Expr exp(const Expr& a) {
    ExprNode n;
    n.kind = ExprKind::Exp;
    n.args = {a};
    return Expr::make(std::move(n));
}

Expr log(const Expr& a) {
    ExprNode n;
    n.kind = ExprKind::Log;
    n.args = {a};
    return Expr::make(std::move(n));
}

Expr sqrt(const Expr& a) {
    ExprNode n;
    n.kind = ExprKind::Sqrt;
    n.args = {a};
    return Expr::make(std::move(n));
}

Expr sin(const Expr& a) {
    ExprNode n;
    n.kind = ExprKind::Sin;
    n.args = {a};
    return Expr::make(std::move(n));
}

Expr cos(const Expr& a) {
    ExprNode n;
    n.kind = ExprKind::Cos;
    n.args = {a};
    return Expr::make(std::move(n));
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case ExprKind::Number: return a.number_value() == b.number_value();
        case ExprKind::PiConst: return true;
        case ExprKind::Var: return a.var_name() == b.var_name();
        case ExprKind::Pow:
            if (a.pow_exponent() != b.pow_exponent()) return false;
            break;
        default: break;
    }
    if (a.args().size() != b.args().size()) return false;
    for (std::size_t i = 0; i < a.args().size(); ++i)
        if (!structurally_equal(a.args()[i], b.args()[i])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Printing. Precedence: Add/Sub < Mul/Div < Neg < Pow < atoms.

namespace {
enum Prec { PREC_ADD = 1, PREC_MUL = 2, PREC_NEG = 3, PREC_POW = 4, PREC_ATOM = 5 };

int precedence_of(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::Add:
        case ExprKind::Sub: return PREC_ADD;
        case ExprKind::Mul:
        case ExprKind::Div: return PREC_MUL;
        case ExprKind::Neg: return PREC_NEG;
        case ExprKind::Pow: return PREC_POW;
        case ExprKind::Number:
            // negative or fractional literals need protection in tight contexts
            return (e.number_value() < 0 || !is_integer(e.number_value())) ? PREC_NEG : PREC_ATOM;
        default: return PREC_ATOM;
    }
}

std::string rational_str(const Rational& r) { return r.str(); }

void print_rec(std::ostringstream& out, const Expr& e, int min_prec) {
    const bool need_parens = precedence_of(e) < min_prec;
    if (need_parens) out << '(';
    switch (e.kind()) {
        case ExprKind::Number: out << rational_str(e.number_value()); break;
        case ExprKind::PiConst: out << "pi"; break;
        case ExprKind::Var: out << e.var_name(); break;
        case ExprKind::Add:
            print_rec(out, e.args()[0], PREC_ADD);
            out << " + ";
            print_rec(out, e.args()[1], PREC_ADD);
            break;
        case ExprKind::Sub:
            print_rec(out, e.args()[0], PREC_ADD);
            out << " - ";
            print_rec(out, e.args()[1], PREC_ADD + 1);
            break;
        case ExprKind::Mul:
            print_rec(out, e.args()[0], PREC_MUL);
            out << "*";
            print_rec(out, e.args()[1], PREC_MUL);
            break;
        case ExprKind::Div:
            print_rec(out, e.args()[0], PREC_MUL);
            out << "/";
            print_rec(out, e.args()[1], PREC_MUL + 1);
            break;
        case ExprKind::Neg:
            out << "-";
            print_rec(out, e.args()[0], PREC_NEG);
            break;
        case ExprKind::Pow: {
            print_rec(out, e.args()[0], PREC_POW + 1);
            const Rational& ex = e.pow_exponent();
            if (is_integer(ex) && ex > 0)
                out << "^" << rational_str(ex);
            else
                out << "^(" << rational_str(ex) << ")";
            break;
        }
        case ExprKind::Exp: out << "exp("; print_rec(out, e.args()[0], 0); out << ")"; break;
        case ExprKind::Log: out << "log("; print_rec(out, e.args()[0], 0); out << ")"; break;
        case ExprKind::Sqrt: out << "sqrt("; print_rec(out, e.args()[0], 0); out << ")"; break;
        case ExprKind::Sin: out << "sin("; print_rec(out, e.args()[0], 0); out << ")"; break;
        case ExprKind::Cos: out << "cos("; print_rec(out, e.args()[0], 0); out << ")"; break;
    }
    if (need_parens) out << ')';
}
}  // namespace

std::string to_string(const Expr& e) {
    std::ostringstream out;
    print_rec(out, e, 0);
    return out.str();
}

// ---------------------------------------------------------------------------
// Parser.

namespace {

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    Expr parse() {
        Expr e = parse_expr_level();
        skip_ws();
        if (pos_ != s_.size())
            throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool peek_char(char c) {
        skip_ws();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    bool consume_char(char c) {
        if (peek_char(c)) { ++pos_; return true; }
        return false;
    }

    Expr parse_expr_level() {
        Expr e = parse_term();
        for (;;) {
            if (consume_char('+')) e = e + parse_term();
            else if (consume_char('-')) e = e - parse_term();
            else return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        for (;;) {
            if (consume_char('*')) e = e * parse_factor();
            else if (consume_char('/')) e = e / parse_factor();
            else return e;
        }
    }

    Expr parse_factor() {
        skip_ws();
        if (consume_char('-')) {
            // unary minus applies to the whole power, as in -x^2 == -(x^2)
            return -parse_factor();
        }
        Expr base = parse_atom();
        skip_ws();
        if (consume_char('^')) {
            Rational ex = parse_exponent();
            return pow(base, ex);
        }
        return base;
    }

    // rational := ['-'] int ['/' int], optionally wrapped in parentheses
    Rational parse_exponent() {
        skip_ws();
        const bool parens = consume_char('(');
        skip_ws();
        bool neg = consume_char('-');
        boost::multiprecision::cpp_int num = parse_int();
        boost::multiprecision::cpp_int den = 1;
        // Greedy: '/' only belongs to the exponent when digits follow,
        // so x^1/2 is x^(1/2) but x^2/y is (x^2)/y.
        std::size_t save = pos_;
        if (consume_char('/')) {
            skip_ws();
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                den = parse_int();
                if (den == 0) throw ParseError("zero denominator in exponent", pos_);
            } else {
                pos_ = save;
            }
        }
        if (parens && !consume_char(')'))
            throw ParseError("expected ')' after exponent", pos_);
        Rational r(num, den);
        return neg ? -r : r;
    }

    boost::multiprecision::cpp_int parse_int() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == start) throw ParseError("expected integer", start);
        return boost::multiprecision::cpp_int(s_.substr(start, pos_ - start));
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr_level();
            if (!consume_char(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr parse_number() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        boost::multiprecision::cpp_int ipart(s_.substr(start, pos_ - start));
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            std::size_t fstart = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (pos_ == fstart) throw ParseError("expected digits after decimal point", fstart);
            std::string frac = s_.substr(fstart, pos_ - fstart);
            boost::multiprecision::cpp_int fpart(frac);
            boost::multiprecision::cpp_int scale = 1;
            for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
            return Expr::number(Rational(ipart * scale + fpart, scale));
        }
        return Expr::number(Rational(ipart));
    }

    Expr parse_ident() {
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        std::string name = s_.substr(start, pos_ - start);
        if (name == "pi") return Expr::pi();
        static const char* funcs[] = {"exp", "log", "sqrt", "sin", "cos"};
        for (const char* f : funcs) {
            if (name == f) {
                if (!consume_char('('))
                    throw ParseError("expected '(' after function name '" + name + "'", pos_);
                Expr arg = parse_expr_level();
                if (!consume_char(')'))
                    throw ParseError("expected ')' closing call to '" + name + "'", pos_);
                if (name == "exp") return exp(arg);
                if (name == "log") return log(arg);
                if (name == "sqrt") return sqrt(arg);
                if (name == "sin") return sin(arg);
                return cos(arg);
            }
        }
        return Expr::variable(std::move(name));
    }
};

}  // namespace

Expr parse_expr(const std::string& text) {
    Parser p(text);
    return p.parse();
}

// ---------------------------------------------------------------------------
// Differentiation.

Expr differentiate(const Expr& e, const std::string& var) {
    switch (e.kind()) {
        case ExprKind::Number:
        case ExprKind::PiConst:
            return Expr::integer(0);
        case ExprKind::Var:
            return Expr::integer(e.var_name() == var ? 1 : 0);
        case ExprKind::Add:
            return differentiate(e.args()[0], var) + differentiate(e.args()[1], var);
        case ExprKind::Sub:
            return differentiate(e.args()[0], var) - differentiate(e.args()[1], var);
        case ExprKind::Mul: {
            const Expr& f = e.args()[0];
            const Expr& g = e.args()[1];
            return differentiate(f, var) * g + f * differentiate(g, var);
        }
        case ExprKind::Div: {
            const Expr& f = e.args()[0];
            const Expr& g = e.args()[1];
            return (differentiate(f, var) * g - f * differentiate(g, var)) / (g * g);
        }
        case ExprKind::Neg:
            return -differentiate(e.args()[0], var);
        case ExprKind::Pow: {
            const Expr& f = e.args()[0];
            const Rational& p = e.pow_exponent();
            return Expr::number(p) * pow(f, p - 1) * differentiate(f, var);
        }
        case ExprKind::Exp:
            return e * differentiate(e.args()[0], var);
        case ExprKind::Log:
            return differentiate(e.args()[0], var) / e.args()[0];
        case ExprKind::Sqrt:
            return differentiate(e.args()[0], var) / (Expr::integer(2) * e);
        case ExprKind::Sin:
            return cos(e.args()[0]) * differentiate(e.args()[0], var);
        case ExprKind::Cos:
            return -(sin(e.args()[0]) * differentiate(e.args()[0], var));
    }
    throw Error("unhandled expression kind in differentiate");
}

// ---------------------------------------------------------------------------
// Substitution.

Expr substitute(const Expr& e, const std::map<std::string, Expr>& repl) {
    switch (e.kind()) {
        case ExprKind::Number:
        case ExprKind::PiConst:
            return e;
        case ExprKind::Var: {
            auto it = repl.find(e.var_name());
            return it == repl.end() ? e : it->second;
        }
        default: break;
    }
    std::vector<Expr> sub;
    sub.reserve(e.args().size());
    for (const Expr& a : e.args()) sub.push_back(substitute(a, repl));
    switch (e.kind()) {
        case ExprKind::Add: return sub[0] + sub[1];
        case ExprKind::Sub: return sub[0] - sub[1];
        case ExprKind::Mul: return sub[0] * sub[1];
        case ExprKind::Div: return sub[0] / sub[1];
        case ExprKind::Neg: return -sub[0];
        case ExprKind::Pow: return pow(sub[0], e.pow_exponent());
        case ExprKind::Exp: return exp(sub[0]);
        case ExprKind::Log: return log(sub[0]);
        case ExprKind::Sqrt: return sqrt(sub[0]);
        case ExprKind::Sin: return sin(sub[0]);
        case ExprKind::Cos: return cos(sub[0]);
        default: break;
    }
    throw Error("unhandled expression kind in substitute");
}

namespace {
void collect_vars(const Expr& e, std::set<std::string>& out) {
    if (e.kind() == ExprKind::Var) out.insert(e.var_name());
    for (const Expr& a : e.args()) collect_vars(a, out);
}
}  // namespace

std::set<std::string> free_variables(const Expr& e) {
    std::set<std::string> out;
    collect_vars(e, out);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace {

double eval_rec(const Expr& e, const Point& at, double& scale) {
    auto track = [&scale](double v) {
        double a = std::fabs(v);
        if (a > scale) scale = a;
        return v;
    };
    switch (e.kind()) {
        case ExprKind::Number:
            return track(static_cast<double>(e.number_value()));
        case ExprKind::PiConst:
            return track(M_PI);
        case ExprKind::Var: {
            auto it = at.find(e.var_name());
            if (it == at.end())
                throw InputError("unbound variable '" + e.var_name() + "' in evaluation");
            return track(it->second);
        }
        case ExprKind::Add:
            return track(eval_rec(e.args()[0], at, scale) + eval_rec(e.args()[1], at, scale));
        case ExprKind::Sub:
            return track(eval_rec(e.args()[0], at, scale) - eval_rec(e.args()[1], at, scale));
        case ExprKind::Mul:
            return track(eval_rec(e.args()[0], at, scale) * eval_rec(e.args()[1], at, scale));
        case ExprKind::Div: {
            double num = eval_rec(e.args()[0], at, scale);
            double den = eval_rec(e.args()[1], at, scale);
            if (den == 0.0) throw DomainError("division by zero", to_string(e));
            return track(num / den);
        }
        case ExprKind::Neg:
            return track(-eval_rec(e.args()[0], at, scale));
        case ExprKind::Pow: {
            double base = eval_rec(e.args()[0], at, scale);
            const Rational& ex = e.pow_exponent();
            if (is_integer(ex)) {
                if (base == 0.0 && ex < 0)
                    throw DomainError("zero raised to negative power", to_string(e));
            } else if (base < 0.0) {
                throw DomainError("fractional power of negative argument", to_string(e));
            } else if (base == 0.0 && ex < 0) {
                throw DomainError("zero raised to negative power", to_string(e));
            }
            double v = std::pow(base, static_cast<double>(ex));
            if (!std::isfinite(v)) throw DomainError("non-finite power", to_string(e));
            return track(v);
        }
        case ExprKind::Exp: {
            double v = std::exp(eval_rec(e.args()[0], at, scale));
            if (!std::isfinite(v)) throw DomainError("exp overflow", to_string(e));
            return track(v);
        }
        case ExprKind::Log: {
            double a = eval_rec(e.args()[0], at, scale);
            if (a <= 0.0) throw DomainError("log of non-positive argument", to_string(e));
            return track(std::log(a));
        }
        case ExprKind::Sqrt: {
            double a = eval_rec(e.args()[0], at, scale);
            if (a < 0.0) throw DomainError("sqrt of negative argument", to_string(e));
            return track(std::sqrt(a));
        }
        case ExprKind::Sin:
            return track(std::sin(eval_rec(e.args()[0], at, scale)));
        case ExprKind::Cos:
            return track(std::cos(eval_rec(e.args()[0], at, scale)));
    }
    throw Error("unhandled expression kind in evaluate");
}

}  // namespace

double evaluate(const Expr& e, const Point& at) {
    double scale = 0.0;
    return eval_rec(e, at, scale);
}

EvalWithScale evaluate_with_scale(const Expr& e, const Point& at) {
    EvalWithScale r;
    r.value = eval_rec(e, at, r.scale);
    return r;
}

// ---------------------------------------------------------------------------
// Chart, sampling, randomized zero test.

int Chart::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < coords.size(); ++i)
        if (coords[i] == name) return static_cast<int>(i);
    return -1;
}

bool charts_equal(const Chart& a, const Chart& b) {
    if (a.coords != b.coords) return false;
    if (a.guard.has_value() != b.guard.has_value()) return false;
    if (a.guard && !structurally_equal(*a.guard, *b.guard)) return false;
    return true;
}

std::uint64_t derive_seed(std::string_view op, const Chart& chart, std::uint64_t user_seed) {
    // FNV-1a over the operation name, coordinate names and guard text
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0xff;
        h *= 1099511628211ull;
    };
    mix(op);
    for (const auto& c : chart.coords) mix(c);
    if (chart.guard) mix(to_string(*chart.guard));
    return h ^ user_seed;
}

Point sample_point(const Chart& chart, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    std::uniform_int_distribution<int> sign(0, 1);
    // Shift amounts applied when the guard keeps rejecting the standard box.
    static const double shifts[] = {0.0, 1.0, 2.0, 4.0, 8.0};
    for (double shift : shifts) {
        for (int attempt = 0; attempt < 200; ++attempt) {
            Point p;
            for (const auto& c : chart.coords) {
                double v = mag(rng);
                if (shift == 0.0 && sign(rng)) v = -v;
                p[c] = v + shift;
            }
            if (!chart.guard) return p;
            try {
                if (evaluate(*chart.guard, p) > 0.0) return p;
            } catch (const NumericalError&) {
                // guard undefined here; treat as rejection
            }
        }
    }
    throw SamplingError("could not sample a point satisfying the chart guard");
}

namespace {
// Evaluate e at a guard-respecting sample; retries on evaluation domain errors
// at guard-valid points, which indicate an under-protective guard.
EvalWithScale sample_and_eval(const Expr& e, const Chart& chart, std::mt19937_64& rng) {
    for (int attempt = 0; attempt < 32; ++attempt) {
        Point p = sample_point(chart, rng);
        try {
            return evaluate_with_scale(e, p);
        } catch (const DomainError&) {
            if (attempt == 31) throw;
        }
    }
    throw SamplingError("expression undefined at all sampled points");
}
}  // namespace

bool is_zero(const Expr& e, const Chart& chart, const ZeroTestOptions& opt) {
    if (e.is_number()) {
        double v = std::fabs(static_cast<double>(e.number_value()));
        return v <= opt.tol * (1.0 + v);
    }
    std::mt19937_64 rng(derive_seed("is_zero", chart, opt.seed));
    for (int t = 0; t < opt.trials; ++t) {
        EvalWithScale r = sample_and_eval(e, chart, rng);
        if (!(std::fabs(r.value) <= opt.tol * (1.0 + r.scale))) return false;
    }
    return true;
}

double max_relative_residual(const Expr& e, const Chart& chart, const ZeroTestOptions& opt) {
    if (e.is_number()) {
        double v = std::fabs(static_cast<double>(e.number_value()));
        return v / (1.0 + v);
    }
    std::mt19937_64 rng(derive_seed("is_zero", chart, opt.seed));
    double worst = 0.0;
    for (int t = 0; t < opt.trials; ++t) {
        EvalWithScale r = sample_and_eval(e, chart, rng);
        worst = std::max(worst, std::fabs(r.value) / (1.0 + r.scale));
    }
    return worst;
}

}  // namespace poismod
