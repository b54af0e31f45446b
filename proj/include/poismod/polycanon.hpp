#pragma once

#include <map>
#include <string>
#include <vector>

#include "poismod/expr.hpp"

namespace poismod {

// Raised when an expression falls outside the exactly-canonicalizable fragment
// used by the witness search (division by multi-term expressions, roots of
// index > 2, nested radicals, mixed transcendental generators, ...).
struct NonPolynomialInput : InputError {
    using InputError::InputError;
};

namespace polycanon {

// Everything here is exact rational arithmetic. Expressions are canonicalized
// as Laurent polynomials over a table of generators: chart variables, the
// circle constant, at most one square-root radical, and opaque transcendental
// atoms (exp/log/sin/cos of polynomial arguments). Radical squares fold into
// the radicand; the independence restrictions enforced by validate() keep
// "no solution" conclusions of the linear solver trustworthy.

enum class GenKind { Var, PiConst, Radical, Exp, Log, Sin, Cos };

using Monomial = std::map<int, int>;            // generator id -> exponent, nonzero
using Polynomial = std::map<Monomial, Rational>; // monomial -> coefficient, nonzero

struct Generator {
    GenKind kind;
    std::string var_name;  // Var only
    Polynomial arg;        // Radical/Exp/Log/Sin/Cos: canonical form of the argument
};

class Canonicalizer {
public:
    explicit Canonicalizer(const Chart& chart);

    // Canonical form of `e`; extends the generator table as needed.
    Polynomial canon(const Expr& e);

    Polynomial multiply(const Polynomial& a, const Polynomial& b);
    // p * coeff * monomial, folding radical squares into the radicand.
    Polynomial mono_multiply(const Polynomial& p, const Monomial& m, const Rational& coeff);

    static Polynomial add(const Polynomial& a, const Polynomial& b);
    static Polynomial negate(const Polynomial& a);

    // Multiplies every polynomial of one equation by the same monomial so that
    // no generator appears with a negative exponent anywhere in the equation.
    void clear_negative_exponents(std::vector<Polynomial*>& equation);

    // Enforces the independence rules across the whole system:
    // no negative exponents, at most one radical / exp / log generator,
    // a single trig argument with sin/cos exponents at most 1.
    void validate(const std::vector<const Polynomial*>& system) const;

    const std::vector<Generator>& generators() const { return table_; }

private:
    const Chart& chart_;
    std::vector<Generator> table_;

    int var_generator(const std::string& name);
    int atom_generator(GenKind kind, Polynomial arg);
    Polynomial power(const Polynomial& base, long long exponent);
    Polynomial invert_monomial(const Polynomial& p);
    Polynomial radical_power(const Expr& base, const Rational& exponent);
};

}  // namespace polycanon
}  // namespace poismod
