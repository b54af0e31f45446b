#include "poismod/poisson.hpp"

#include <algorithm>
#include <sstream>

namespace poismod {

using polycanon::Canonicalizer;
using polycanon::Monomial;
using polycanon::Polynomial;

// ---------------------------------------------------------------------------
// Structure validation.

PoissonStructure make_poisson(const MultiVectorField& b, const ZeroTestOptions& opt) {
    if (b.degree() != 2) throw InputError("a Poisson bivector must have degree 2");
    MultiVectorField obstruction = schouten(b, b);
    double residual = max_relative_residual(obstruction, opt);
    if (!is_zero(obstruction, opt)) {
        // locate a sample point where some component is visibly nonzero
        std::mt19937_64 rng(derive_seed("make_poisson", b.chart(), opt.seed));
        Point best;
        double worst = -1.0;
        for (int t = 0; t < opt.trials; ++t) {
            Point p = sample_point(b.chart(), rng);
            for (const auto& [idx, c] : obstruction.terms()) {
                try {
                    EvalWithScale r = evaluate_with_scale(c, p);
                    double rel = std::fabs(r.value) / (1.0 + r.scale);
                    if (rel > worst) {
                        worst = rel;
                        best = p;
                    }
                } catch (const NumericalError&) {
                }
            }
        }
        std::ostringstream msg;
        msg << "Jacobi identity fails: worst [pi,pi] residual " << residual;
        throw JacobiFailed(msg.str(), std::move(best));
    }
    return PoissonStructure(b, residual);
}

VolumeDensity make_volume(Chart chart, Expr rho, const ZeroTestOptions& opt) {
    std::mt19937_64 rng(derive_seed("make_volume", chart, opt.seed));
    for (int t = 0; t < opt.trials; ++t) {
        Point p = sample_point(chart, rng);
        double v;
        try {
            v = evaluate(rho, p);
        } catch (const NumericalError& err) {
            throw InputError(std::string("volume density undefined on the domain: ") +
                             err.what());
        }
        if (!(v > 0.0))
            throw InputError("volume density is not positive at a sample point (value " +
                             std::to_string(v) + ")");
    }
    return VolumeDensity{std::move(chart), std::move(rho)};
}

// ---------------------------------------------------------------------------
// Brackets and derived fields.

Expr poisson_bracket(const PoissonStructure& pi, const Expr& f, const Expr& g) {
    const Chart& chart = pi.chart();
    return pair(wedge(differential(chart, f), differential(chart, g)), pi.bivector());
}

MultiVectorField hamiltonian_vf(const PoissonStructure& pi, const Expr& h) {
    const Chart& chart = pi.chart();
    MultiVectorField out(chart, 1);
    for (const auto& [idx, c] : pi.bivector().terms()) {
        const int i = idx[0], j = idx[1];
        out.add_term({j}, c * differentiate(h, chart.coords[i]));
        out.add_term({i}, -(c * differentiate(h, chart.coords[j])));
    }
    return out;
}

MultiVectorField sharp(const PoissonStructure& pi, const DifferentialForm& alpha) {
    if (alpha.degree() != 1) throw InputError("sharp expects a 1-form");
    if (!charts_equal(alpha.chart(), pi.chart())) throw InputError("charts do not match");
    MultiVectorField out(pi.chart(), 1);
    for (const auto& [idx, c] : pi.bivector().terms()) {
        const int i = idx[0], j = idx[1];
        // (sharp a)^k = sum_i pi^{ik} a_i
        out.add_term({j}, c * alpha.component({i}));
        out.add_term({i}, -(c * alpha.component({j})));
    }
    return out;
}

DifferentialForm bracket_1forms(const PoissonStructure& pi, const DifferentialForm& a,
                                const DifferentialForm& b) {
    if (a.degree() != 1 || b.degree() != 1)
        throw InputError("bracket_1forms expects 1-forms");
    Expr pab = pair(wedge(a, b), pi.bivector());
    return lie_derivative(sharp(pi, a), b) - lie_derivative(sharp(pi, b), a) -
           differential(pi.chart(), pab);
}

namespace {

// (1/rho) sum_j d_j(rho X^j) for a vector field X.
Expr weighted_divergence(const Chart& chart, const Expr& rho, const MultiVectorField& x) {
    Expr sum = Expr::integer(0);
    for (const auto& [idx, c] : x.terms())
        sum += differentiate(rho * c, chart.coords[idx[0]]);
    return sum / rho;
}

}  // namespace

MultiVectorField modular_vf(const PoissonStructure& pi, const VolumeDensity& mu,
                            const ZeroTestOptions& opt) {
    const Chart& chart = pi.chart();
    if (!charts_equal(chart, mu.chart)) throw InputError("charts do not match");
    const Expr& rho = mu.rho;
    MultiVectorField out(chart, 1);
    // X^i = (1/rho) sum_j d_j(rho pi^{ij}), expanded over the stored terms
    for (const auto& [idx, c] : pi.bivector().terms()) {
        const int i = idx[0], j = idx[1];
        out.add_term({i}, differentiate(rho * c, chart.coords[j]) / rho);
        out.add_term({j}, -(differentiate(rho * c, chart.coords[i]) / rho));
    }
    // The full operator applied to f is first-order: the second-order part
    // cancels by antisymmetry. Spot-check this on quadratics.
    const int n = static_cast<int>(chart.dim());
    int checked = 0;
    for (int p = 0; p < n && checked < 10; ++p) {
        for (int q = p; q < n && checked < 10; ++q, ++checked) {
            Expr f = Expr::variable(chart.coords[p]) * Expr::variable(chart.coords[q]);
            Expr full = weighted_divergence(chart, rho, hamiltonian_vf(pi, f));
            Expr first_order = Expr::integer(0);
            for (const auto& [idx, c] : out.terms())
                first_order += c * differentiate(f, chart.coords[idx[0]]);
            if (!is_zero(full - first_order, chart, opt))
                throw SecondOrderResidue(
                    "second-order part of the modular operator does not vanish on " +
                    to_string(f));
        }
    }
    return out;
}

MultiVectorField d_pi(const PoissonStructure& pi, const MultiVectorField& a) {
    return schouten(pi.bivector(), a);
}

// ---------------------------------------------------------------------------
// Lie algebra data and linear structures.

LieAlgebraData::LieAlgebraData(int dim,
                               const std::vector<std::tuple<int, int, int, Rational>>& entries)
    : dim_(dim), c_(static_cast<std::size_t>(dim) * dim * dim, Rational(0)) {
    if (dim < 0) throw InputError("Lie algebra dimension must be nonnegative");
    std::vector<char> set(c_.size(), 0);
    auto at = [this](int i, int j, int k) -> std::size_t {
        return (static_cast<std::size_t>(i) * dim_ + j) * dim_ + k;
    };
    for (const auto& [i, j, k, v] : entries) {
        if (i < 0 || i >= dim || j < 0 || j >= dim || k < 0 || k >= dim)
            throw InputError("structure constant index out of range");
        if (i == j && v != 0)
            throw InputError("antisymmetry requires c^k_{ii} = 0");
        for (auto [a, b, val] :
             {std::tuple<int, int, Rational>{i, j, v}, std::tuple<int, int, Rational>{j, i, Rational(-v)}}) {
            std::size_t pos = at(a, b, k);
            if (set[pos] && c_[pos] != val)
                throw InputError("conflicting structure constants for the same indices");
            c_[pos] = val;
            set[pos] = 1;
        }
    }
    // exact Jacobi identity
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j)
            for (int k = j + 1; k < dim; ++k)
                for (int l = 0; l < dim; ++l) {
                    Rational sum(0);
                    for (int m = 0; m < dim; ++m)
                        sum += c_[at(i, j, m)] * c_[at(m, k, l)] +
                               c_[at(j, k, m)] * c_[at(m, i, l)] +
                               c_[at(k, i, m)] * c_[at(m, j, l)];
                    if (sum != 0)
                        throw JacobiFailed(
                            "structure constants violate the Jacobi identity", {});
                }
}

const Rational& LieAlgebraData::c(int i, int j, int k) const {
    if (i < 0 || i >= dim_ || j < 0 || j >= dim_ || k < 0 || k >= dim_)
        throw InputError("structure constant index out of range");
    return c_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k];
}

PoissonStructure linear_poisson(const LieAlgebraData& g, const Chart& dual_chart) {
    if (static_cast<int>(dual_chart.dim()) != g.dim())
        throw InputError("dual chart dimension must equal the Lie algebra dimension");
    MultiVectorField b(dual_chart, 2);
    for (int i = 0; i < g.dim(); ++i)
        for (int j = i + 1; j < g.dim(); ++j) {
            Expr comp = Expr::integer(0);
            for (int k = 0; k < g.dim(); ++k) {
                if (g.c(i, j, k) == 0) continue;
                comp += Expr::number(g.c(i, j, k)) * Expr::variable(dual_chart.coords[k]);
            }
            b.add_term({i, j}, comp);
        }
    return make_poisson(b);
}

std::vector<Rational> adjoint_character(const LieAlgebraData& g) {
    std::vector<Rational> theta(g.dim(), Rational(0));
    for (int i = 0; i < g.dim(); ++i)
        for (int j = 0; j < g.dim(); ++j) theta[i] += g.c(i, j, j);
    return theta;
}

// ---------------------------------------------------------------------------
// Bounded-degree witness search.

namespace {

void enumerate_exponents(int n, int remaining, std::vector<int>& cur,
                         std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == n) {
        out.push_back(cur);
        return;
    }
    for (int e = 0; e <= remaining; ++e) {
        cur.push_back(e);
        enumerate_exponents(n, remaining - e, cur, out);
        cur.pop_back();
    }
}

// All monomials of total degree 1..cap, ordered by degree then lexicographically.
std::vector<Expr> ansatz_monomials(const Chart& chart, int cap) {
    const int n = static_cast<int>(chart.dim());
    std::vector<std::vector<int>> exps;
    std::vector<int> cur;
    enumerate_exponents(n, cap, cur, exps);
    std::stable_sort(exps.begin(), exps.end(),
                     [](const std::vector<int>& a, const std::vector<int>& b) {
                         int da = 0, db = 0;
                         for (int v : a) da += v;
                         for (int v : b) db += v;
                         return da < db;
                     });
    std::vector<Expr> out;
    for (const auto& alpha : exps) {
        int total = 0;
        for (int v : alpha) total += v;
        if (total == 0) continue;
        Expr m = Expr::integer(1);
        for (int i = 0; i < n; ++i)
            if (alpha[i] > 0) m = m * pow(Expr::variable(chart.coords[i]), Rational(alpha[i]));
        out.push_back(m);
    }
    return out;
}

}  // namespace

WitnessResult solve_linear_witness(const Chart& chart, int degree_cap,
                                   const std::function<std::vector<Expr>(const Expr&)>& op,
                                   const std::vector<Expr>& target) {
    if (degree_cap < 1) throw InputError("witness degree cap must be at least 1");
    const std::size_t n_eq = target.size();
    std::vector<Expr> monomials = ansatz_monomials(chart, degree_cap);
    const std::size_t M = monomials.size();

    Canonicalizer canon(chart);
    // columns[m][k]: canonical form of component k of op applied to monomial m
    std::vector<std::vector<Polynomial>> columns(M);
    for (std::size_t m = 0; m < M; ++m) {
        std::vector<Expr> img = op(monomials[m]);
        if (img.size() != n_eq)
            throw InputError("witness operator returned the wrong number of components");
        for (const Expr& e : img) columns[m].push_back(canon.canon(e));
    }
    std::vector<Polynomial> rhs;
    for (const Expr& e : target) rhs.push_back(canon.canon(e));

    for (std::size_t k = 0; k < n_eq; ++k) {
        std::vector<Polynomial*> eq{&rhs[k]};
        for (std::size_t m = 0; m < M; ++m) eq.push_back(&columns[m][k]);
        canon.clear_negative_exponents(eq);
    }
    {
        std::vector<const Polynomial*> all;
        for (std::size_t k = 0; k < n_eq; ++k) all.push_back(&rhs[k]);
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = 0; k < n_eq; ++k) all.push_back(&columns[m][k]);
        canon.validate(all);
    }

    // one linear equation per (component, canonical monomial)
    std::map<std::pair<std::size_t, Monomial>, std::size_t> row_of;
    auto row_index = [&row_of](std::size_t k, const Monomial& mon) {
        return row_of.emplace(std::make_pair(k, mon), row_of.size()).first->second;
    };
    for (std::size_t k = 0; k < n_eq; ++k) {
        for (const auto& [mon, c] : rhs[k]) row_index(k, mon);
        for (std::size_t m = 0; m < M; ++m)
            for (const auto& [mon, c] : columns[m][k]) row_index(k, mon);
    }
    const std::size_t R = row_of.size();
    std::vector<std::vector<Rational>> a(R, std::vector<Rational>(M + 1, Rational(0)));
    for (std::size_t k = 0; k < n_eq; ++k) {
        for (const auto& [mon, c] : rhs[k]) a[row_index(k, mon)][M] = c;
        for (std::size_t m = 0; m < M; ++m)
            for (const auto& [mon, c] : columns[m][k]) a[row_index(k, mon)][m] = c;
    }

    // exact Gauss-Jordan elimination
    std::vector<std::size_t> pivot_col;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < M && rank < R; ++col) {
        std::size_t piv = rank;
        while (piv < R && a[piv][col] == 0) ++piv;
        if (piv == R) continue;
        std::swap(a[rank], a[piv]);
        Rational inv = Rational(1) / a[rank][col];
        for (auto& v : a[rank]) v *= inv;
        for (std::size_t r = 0; r < R; ++r) {
            if (r == rank || a[r][col] == 0) continue;
            Rational f = a[r][col];
            for (std::size_t cidx = col; cidx <= M; ++cidx) a[r][cidx] -= f * a[rank][cidx];
        }
        pivot_col.push_back(col);
        ++rank;
    }
    for (std::size_t r = rank; r < R; ++r)
        if (a[r][M] != 0) return WitnessResult{std::nullopt, degree_cap};

    std::vector<Rational> coeff(M, Rational(0));
    for (std::size_t r = 0; r < rank; ++r) coeff[pivot_col[r]] = a[r][M];
    Expr h = Expr::integer(0);
    for (std::size_t m = 0; m < M; ++m)
        if (coeff[m] != 0) h += Expr::number(coeff[m]) * monomials[m];
    return WitnessResult{h, degree_cap};
}

WitnessResult hamiltonian_witness(const PoissonStructure& pi, const MultiVectorField& x,
                                  int degree_cap) {
    if (x.degree() != 1) throw InputError("witness target must be a vector field");
    if (!charts_equal(x.chart(), pi.chart())) throw InputError("charts do not match");
    auto op = [&pi](const Expr& h) { return hamiltonian_vf(pi, h).dense_components(); };
    return solve_linear_witness(pi.chart(), degree_cap, op, x.dense_components());
}

}  // namespace poismod
