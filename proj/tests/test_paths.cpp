#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "poismod/paths.hpp"

using namespace poismod;

namespace {

Chart r2ab() { return Chart{{"a", "b"}, std::nullopt}; }
Chart r2xy() { return Chart{{"x", "y"}, std::nullopt}; }
Chart r4xyzw() { return Chart{{"x", "y", "z", "w"}, std::nullopt}; }

PoissonStructure symplectic_r2() {
    MultiVectorField b(r2xy(), 2);
    b.add_term({0, 1}, Expr::integer(1));
    return make_poisson(b);
}

PoissonStructure symplectic_r4() {
    MultiVectorField b(r4xyzw(), 2);
    b.add_term({0, 1}, Expr::integer(1));
    b.add_term({2, 3}, Expr::integer(1));
    return make_poisson(b);
}

PoissonStructure linear_ab() {
    MultiVectorField b(r2ab(), 2);
    b.add_term({0, 1}, Expr::variable("a"));
    return make_poisson(b);
}

SmoothMap basic_map() {
    return SmoothMap(r4xyzw(), r2ab(), {parse_expr("y"), parse_expr("z*w - x*y")});
}

VolumeDensity lebesgue(const Chart& c) { return make_volume(c, Expr::integer(1)); }

std::vector<Expr> parse_all(const std::vector<std::string>& ss) {
    std::vector<Expr> out;
    out.reserve(ss.size());
    for (const auto& s : ss) out.push_back(parse_expr(s));
    return out;
}

// unit-speed circle on the symplectic plane with its matching covector
CotangentPath circle_path() {
    return CotangentPath(r2xy(), parse_all({"cos(2*pi*t)", "sin(2*pi*t)"}),
                         parse_all({"2*pi*cos(2*pi*t)", "2*pi*sin(2*pi*t)"}), true);
}

// open parabola arc from (0,0) to (1,1)
CotangentPath parabola_path() {
    return CotangentPath(r2xy(), parse_all({"t", "t^2"}), parse_all({"2*t", "-1"}));
}

// path over the target of the quartic fixture map: base drifts along the
// symplectic leaf coordinates, covector rides over the plane chart
CotangentPath character_path() {
    return CotangentPath(
        r4xyzw(),
        parse_all({"0", "0", "exp(-t/2 - (3/10)*sin(2*pi*t))",
                   "exp(t/2 + (3/10)*sin(2*pi*t))"}),
        parse_all({"0", "1/2 + (3/5)*pi*cos(2*pi*t)"}));
}

// same dynamics started where character_path ends
CotangentPath character_path_second_leg() {
    return CotangentPath(
        r4xyzw(),
        parse_all({"0", "0", "exp(-1/2 - t/2 - (3/10)*sin(2*pi*t))",
                   "exp(1/2 + t/2 + (3/10)*sin(2*pi*t))"}),
        parse_all({"0", "1/2 + (3/5)*pi*cos(2*pi*t)"}));
}

}  // namespace

TEST_CASE("path construction validates shape and free variables") {
    CHECK_THROWS_AS(CotangentPath(r2xy(), parse_all({"t"}), parse_all({"1", "0"})), InputError);
    CHECK_THROWS_AS(CotangentPath(r2xy(), parse_all({"t", "x"}), parse_all({"1", "0"})),
                    InputError);
    CHECK_THROWS_AS(CotangentPath(r2xy(), parse_all({"t", "t"}), std::vector<Expr>{}),
                    InputError);
}

TEST_CASE("compatibility check accepts matched pairs and rejects mismatches") {
    CHECK(validate(circle_path(), symplectic_r2()));
    CHECK(validate(parabola_path(), symplectic_r2()));

    // over the zero locus of the bivector any covector covers a constant base
    CotangentPath frozen(r2ab(), parse_all({"0", "0"}), parse_all({"t^2", "1 + sin(2*pi*t)^2"}));
    CHECK(validate(frozen, linear_ab()));

    CotangentPath bad(r2xy(), parse_all({"t", "0"}), parse_all({"0", "0"}));
    CHECK_FALSE(validate(bad, symplectic_r2()));

    CotangentPath open_marked_loop(r2xy(), parse_all({"t", "t^2"}), parse_all({"2*t", "-1"}), true);
    CHECK_FALSE(validate(open_marked_loop, symplectic_r2()));

    CHECK_THROWS_AS(validate(circle_path(), linear_ab()), InputError);
}

TEST_CASE("integral of the zero field vanishes identically") {
    QuadratureResult q = path_integral(MultiVectorField(r2xy(), 1), circle_path());
    CHECK(q.value == 0.0);
    CHECK(q.error_estimate == 0.0);
}

TEST_CASE("hamiltonian integrands only see the endpoints") {
    PoissonStructure pi = symplectic_r2();
    Expr h = parse_expr("x^2*y + 3*y");
    MultiVectorField xh = hamiltonian_vf(pi, h);

    QuadratureResult loop = path_integral(xh, circle_path());
    CHECK(std::abs(loop.value) < 1e-8);

    // with X_h = sharp(dh) and the compatibility sharp(a) = velocity, the
    // integrand is -d/dt h(gamma), so the integral telescopes to
    // h(start) - h(end)
    QuadratureResult open = path_integral(xh, parabola_path());
    // h(0,0) - h(1,1) = -4
    CHECK(std::abs(open.value + 4.0) < 1e-8);

    // across a concatenation corner the sum still telescopes
    CotangentPath second(r2xy(), parse_all({"1 + t", "(1 + t)^2"}),
                         parse_all({"2*(1 + t)", "-1"}));
    CHECK(validate(second, pi));
    QuadratureResult both = path_integral(xh, concat(parabola_path(), second));
    // h(0,0) - h(2,4) = -28
    CHECK(std::abs(both.value + 28.0) < 1e-8);
}

TEST_CASE("integral over a frozen base reduces to a time integral") {
    CotangentPath frozen(r2ab(), parse_all({"0", "0"}),
                         parse_all({"0", "1 + sin(2*pi*t)^2"}));
    MultiVectorField db = MultiVectorField::vector(r2ab(), {Expr::integer(0), Expr::integer(1)});
    QuadratureResult q = path_integral(db, frozen);
    CHECK(std::abs(q.value - 1.5) < 1e-12);
    CHECK(q.error_estimate < 1e-12);
}

TEST_CASE("path integrals are reparametrization invariant") {
    PoissonStructure pi = symplectic_r2();
    MultiVectorField x = MultiVectorField::vector(r2xy(), {parse_expr("x^2"), parse_expr("x*y")});

    // smoothstep change of clock: tau = 3t^2 - 2t^3, covector picks up tau'
    CotangentPath direct = parabola_path();
    Expr tau = parse_expr("3*t^2 - 2*t^3");
    Expr dtau = parse_expr("6*t - 6*t^2");
    std::map<std::string, Expr> clock{{"t", tau}};
    CotangentPath slow(r2xy(),
                       {substitute(parse_expr("t"), clock), substitute(parse_expr("t^2"), clock)},
                       {substitute(parse_expr("2*t"), clock) * dtau,
                        substitute(parse_expr("-1"), clock) * dtau});
    CHECK(validate(slow, pi));
    QuadratureResult a = path_integral(x, direct);
    QuadratureResult b = path_integral(x, slow);
    CHECK(std::abs(a.value - b.value) < 1e-8);
}

TEST_CASE("quadrature order is restricted to the stocked rules") {
    CHECK_THROWS_AS(path_integral(MultiVectorField(r2xy(), 1), circle_path(), 64, 6), InputError);
    CHECK_THROWS_AS(path_integral(MultiVectorField(r2xy(), 1), circle_path(), 0, 8), InputError);
    // lower stocked orders agree on smooth integrands
    PoissonStructure pi = symplectic_r2();
    MultiVectorField xh = hamiltonian_vf(pi, parse_expr("x^2*y"));
    QuadratureResult lo = path_integral(xh, parabola_path(), 64, 4);
    QuadratureResult hi = path_integral(xh, parabola_path(), 64, 8);
    CHECK(std::abs(lo.value - hi.value) < 1e-10);
}

TEST_CASE("pullback compatibility holds for the character fixture") {
    CotangentPath a = character_path();
    CHECK(validate_pullback(a, basic_map(), symplectic_r4()));
    // the same data is not an ordinary path: covector dimension differs
    CHECK_THROWS_AS(validate(a, symplectic_r4()), InputError);
    CHECK_THROWS_AS(path_integral(hamiltonian_vf(symplectic_r4(), parse_expr("x")), a),
                    InputError);
}

TEST_CASE("modular character of the fixture map") {
    SmoothMap phi = basic_map();
    PoissonStructure pm = symplectic_r4();
    PoissonStructure pn = linear_ab();
    VolumeDensity lm = lebesgue(r4xyzw());
    VolumeDensity ln = lebesgue(r2ab());

    CharacterResult c = modular_character(phi, pm, pn, lm, ln, character_path());
    CHECK(std::abs(c.integral - 0.5) < 1e-10);
    CHECK(std::abs(c.character - std::exp(1.0)) < 1e-9);

    // identity fixture: the modular fields match, so every character is 1
    PoissonStructure p2 = linear_ab();
    CotangentPath frozen(r2ab(), parse_all({"0", "0"}), parse_all({"0", "1 + sin(2*pi*t)^2"}));
    CharacterResult id_c = modular_character(identity_map(r2ab()), p2, p2, ln, ln, frozen);
    CHECK(std::abs(id_c.character - 1.0) < 1e-9);
}

TEST_CASE("characters multiply under concatenation and invert under reversal") {
    SmoothMap phi = basic_map();
    PoissonStructure pm = symplectic_r4();
    PoissonStructure pn = linear_ab();
    VolumeDensity lm = lebesgue(r4xyzw());
    VolumeDensity ln = lebesgue(r2ab());

    CotangentPath leg1 = character_path();
    CotangentPath leg2 = character_path_second_leg();
    const double c1 = modular_character(phi, pm, pn, lm, ln, leg1).character;
    const double c2 = modular_character(phi, pm, pn, lm, ln, leg2).character;

    CotangentPath joined = concat(leg1, leg2);
    CHECK(validate_pullback(joined, phi, pm));
    const double c12 = modular_character(phi, pm, pn, lm, ln, joined).character;
    CHECK(std::abs(c12 - c1 * c2) < 1e-9);

    CotangentPath back = reverse(leg1);
    CHECK(validate_pullback(back, phi, pm));
    const double cr = modular_character(phi, pm, pn, lm, ln, back).character;
    CHECK(std::abs(cr - 1.0 / c1) < 1e-9);

    const double cc = modular_character(phi, pm, pn, lm, ln, concat(leg1, back)).character;
    CHECK(std::abs(cc - 1.0) < 1e-9);
}

TEST_CASE("reversal is an involution and concatenation needs matching endpoints") {
    PoissonStructure pi = symplectic_r2();
    MultiVectorField x = MultiVectorField::vector(r2xy(), {parse_expr("x^2"), parse_expr("x*y")});
    CotangentPath a = parabola_path();
    CHECK(validate(reverse(a), pi));
    QuadratureResult twice = path_integral(x, reverse(reverse(a)));
    QuadratureResult once = path_integral(x, a);
    CHECK(std::abs(twice.value - once.value) < 1e-12);
    QuadratureResult rev = path_integral(x, reverse(a));
    CHECK(std::abs(rev.value + once.value) < 1e-12);

    CHECK_THROWS_AS(concat(parabola_path(), circle_path()), InputError);
}
