#include "poismod/polycanon.hpp"

#include <set>

namespace poismod::polycanon {

namespace {

void insert_term(Polynomial& p, const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto it = p.find(m);
    if (it == p.end()) {
        p.emplace(m, c);
        return;
    }
    it->second += c;
    if (it->second == 0) p.erase(it);
}

bool is_plain_polynomial(const Polynomial& p, const std::vector<Generator>& table) {
    for (const auto& [m, c] : p) {
        for (const auto& [gen, exp] : m) {
            GenKind k = table[gen].kind;
            if (exp < 0) return false;
            if (k != GenKind::Var && k != GenKind::PiConst) return false;
        }
    }
    return true;
}

}  // namespace

Canonicalizer::Canonicalizer(const Chart& chart) : chart_(chart) {}

int Canonicalizer::var_generator(const std::string& name) {
    for (std::size_t i = 0; i < table_.size(); ++i)
        if (table_[i].kind == GenKind::Var && table_[i].var_name == name)
            return static_cast<int>(i);
    if (chart_.index_of(name) < 0)
        throw NonPolynomialInput("variable '" + name + "' is not a chart coordinate");
    table_.push_back({GenKind::Var, name, {}});
    return static_cast<int>(table_.size()) - 1;
}

int Canonicalizer::atom_generator(GenKind kind, Polynomial arg) {
    for (std::size_t i = 0; i < table_.size(); ++i)
        if (table_[i].kind == kind && table_[i].arg == arg) return static_cast<int>(i);
    table_.push_back({kind, {}, std::move(arg)});
    return static_cast<int>(table_.size()) - 1;
}

Polynomial Canonicalizer::add(const Polynomial& a, const Polynomial& b) {
    Polynomial out = a;
    for (const auto& [m, c] : b) insert_term(out, m, c);
    return out;
}

Polynomial Canonicalizer::negate(const Polynomial& a) {
    Polynomial out;
    for (const auto& [m, c] : a) out.emplace(m, -c);
    return out;
}

Polynomial Canonicalizer::mono_multiply(const Polynomial& p, const Monomial& m,
                                        const Rational& coeff) {
    Polynomial out;
    if (coeff == 0) return out;
    for (const auto& [pm, pc] : p) {
        Monomial merged = pm;
        for (const auto& [gen, exp] : m) {
            int& e = merged[gen];
            e += exp;
            if (e == 0) merged.erase(gen);
        }
        // fold radical squares: s^2 = radicand (may split the term)
        Polynomial piece{{merged, pc * coeff}};
        for (;;) {
            bool folded = false;
            Polynomial next;
            for (const auto& [qm, qc] : piece) {
                int rad_gen = -1;
                for (const auto& [gen, exp] : qm) {
                    if (table_[gen].kind == GenKind::Radical && exp >= 2) {
                        rad_gen = gen;
                        break;
                    }
                }
                if (rad_gen < 0) {
                    insert_term(next, qm, qc);
                    continue;
                }
                folded = true;
                Monomial reduced = qm;
                reduced[rad_gen] -= 2;
                if (reduced[rad_gen] == 0) reduced.erase(rad_gen);
                for (const auto& [am, ac] : table_[rad_gen].arg) {
                    Monomial combined = reduced;
                    for (const auto& [gen, exp] : am) {
                        int& e = combined[gen];
                        e += exp;
                        if (e == 0) combined.erase(gen);
                    }
                    insert_term(next, combined, qc * ac);
                }
            }
            piece = std::move(next);
            if (!folded) break;
        }
        for (const auto& [qm, qc] : piece) insert_term(out, qm, qc);
    }
    return out;
}

Polynomial Canonicalizer::multiply(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    for (const auto& [m, c] : b) {
        Polynomial part = mono_multiply(a, m, c);
        for (const auto& [pm, pc] : part) insert_term(out, pm, pc);
    }
    return out;
}

Polynomial Canonicalizer::power(const Polynomial& base, long long exponent) {
    Polynomial acc{{Monomial{}, Rational(1)}};
    Polynomial b = base;
    long long e = exponent;
    while (e > 0) {
        if (e & 1) acc = multiply(acc, b);
        b = multiply(b, b);
        e >>= 1;
    }
    return acc;
}

Polynomial Canonicalizer::invert_monomial(const Polynomial& p) {
    if (p.size() != 1)
        throw NonPolynomialInput("division by a multi-term expression");
    const auto& [m, c] = *p.begin();
    Monomial inv;
    for (const auto& [gen, exp] : m) inv.emplace(gen, -exp);
    return Polynomial{{inv, Rational(1) / c}};
}

Polynomial Canonicalizer::radical_power(const Expr& base, const Rational& exponent) {
    using boost::multiprecision::cpp_int;
    cpp_int num = boost::multiprecision::numerator(exponent);
    cpp_int den = boost::multiprecision::denominator(exponent);
    if (den != 2) throw NonPolynomialInput("only square roots are supported");
    Polynomial arg = canon(base);
    if (!is_plain_polynomial(arg, table_))
        throw NonPolynomialInput("nested radical or transcendental under a square root");
    int gen = atom_generator(GenKind::Radical, std::move(arg));
    // s^num with s^2 = radicand: split num = 2q + r
    cpp_int q = num / 2, r = num % 2;  // C++ truncation: r has num's sign
    if (r < 0) {
        r += 2;
        q -= 1;
    }
    Polynomial out{{Monomial{}, Rational(1)}};
    if (r == 1) out = Polynomial{{Monomial{{gen, 1}}, Rational(1)}};
    if (q > 0) {
        out = multiply(out, power(table_[gen].arg, static_cast<long long>(q)));
    } else if (q < 0) {
        Polynomial inv = invert_monomial(table_[gen].arg);
        out = multiply(out, power(inv, static_cast<long long>(-q)));
    }
    return out;
}

Polynomial Canonicalizer::canon(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::Number:
            return e.number_value() == 0 ? Polynomial{}
                                         : Polynomial{{Monomial{}, e.number_value()}};
        case ExprKind::PiConst: {
            int gen = atom_generator(GenKind::PiConst, {});
            return Polynomial{{Monomial{{gen, 1}}, Rational(1)}};
        }
        case ExprKind::Var: {
            int gen = var_generator(e.var_name());
            return Polynomial{{Monomial{{gen, 1}}, Rational(1)}};
        }
        case ExprKind::Add:
            return add(canon(e.args()[0]), canon(e.args()[1]));
        case ExprKind::Sub:
            return add(canon(e.args()[0]), negate(canon(e.args()[1])));
        case ExprKind::Neg:
            return negate(canon(e.args()[0]));
        case ExprKind::Mul:
            return multiply(canon(e.args()[0]), canon(e.args()[1]));
        case ExprKind::Div:
            return multiply(canon(e.args()[0]), invert_monomial(canon(e.args()[1])));
        case ExprKind::Pow: {
            const Rational& ex = e.pow_exponent();
            if (boost::multiprecision::denominator(ex) == 1) {
                long long p = static_cast<long long>(boost::multiprecision::numerator(ex));
                if (p >= 0) return power(canon(e.args()[0]), p);
                return power(invert_monomial(canon(e.args()[0])), -p);
            }
            return radical_power(e.args()[0], ex);
        }
        case ExprKind::Sqrt:
            return radical_power(e.args()[0], Rational(1, 2));
        case ExprKind::Exp:
        case ExprKind::Log:
        case ExprKind::Sin:
        case ExprKind::Cos: {
            GenKind k = e.kind() == ExprKind::Exp   ? GenKind::Exp
                        : e.kind() == ExprKind::Log ? GenKind::Log
                        : e.kind() == ExprKind::Sin ? GenKind::Sin
                                                    : GenKind::Cos;
            Polynomial arg = canon(e.args()[0]);
            if (!is_plain_polynomial(arg, table_))
                throw NonPolynomialInput("transcendental of a non-polynomial argument");
            int gen = atom_generator(k, std::move(arg));
            return Polynomial{{Monomial{{gen, 1}}, Rational(1)}};
        }
    }
    throw NonPolynomialInput("unhandled expression kind");
}

void Canonicalizer::clear_negative_exponents(std::vector<Polynomial*>& equation) {
    std::map<int, int> min_exp;
    for (const Polynomial* p : equation)
        for (const auto& [m, c] : *p)
            for (const auto& [gen, exp] : m) {
                auto it = min_exp.find(gen);
                if (it == min_exp.end())
                    min_exp.emplace(gen, exp);
                else
                    it->second = std::min(it->second, exp);
            }
    Monomial clearing;
    for (const auto& [gen, exp] : min_exp)
        if (exp < 0) clearing.emplace(gen, -exp);
    if (clearing.empty()) return;
    for (Polynomial* p : equation) *p = mono_multiply(*p, clearing, Rational(1));
}

void Canonicalizer::validate(const std::vector<const Polynomial*>& system) const {
    std::set<int> radicals, exps, logs;
    std::set<Polynomial> trig_args;
    for (const Polynomial* p : system) {
        for (const auto& [m, c] : *p) {
            for (const auto& [gen, exp] : m) {
                if (exp < 0)
                    throw NonPolynomialInput(
                        "negative exponent survived denominator clearing");
                switch (table_[gen].kind) {
                    case GenKind::Radical: radicals.insert(gen); break;
                    case GenKind::Exp: exps.insert(gen); break;
                    case GenKind::Log: logs.insert(gen); break;
                    case GenKind::Sin:
                    case GenKind::Cos:
                        if (exp > 1)
                            throw NonPolynomialInput(
                                "sin/cos powers above 1 are not supported");
                        trig_args.insert(table_[gen].arg);
                        break;
                    default: break;
                }
            }
        }
    }
    if (radicals.size() > 1)
        throw NonPolynomialInput("multiple distinct radicals are not supported");
    if (exps.size() > 1)
        throw NonPolynomialInput("multiple distinct exponentials are not supported");
    if (logs.size() > 1)
        throw NonPolynomialInput("multiple distinct logarithms are not supported");
    if (trig_args.size() > 1)
        throw NonPolynomialInput("multiple distinct trig arguments are not supported");
}

}  // namespace poismod::polycanon
