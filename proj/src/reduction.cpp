#include "poismod/reduction.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <utility>

#include "poismod/maps.hpp"

namespace poismod {

namespace {

using ExprMatrix = std::vector<std::vector<Expr>>;

std::string point_string(const Point& p) {
    std::ostringstream os;
    os << "(";
    bool first = true;
    for (const auto& [name, value] : p) {
        if (!first) os << ", ";
        os << name << " = " << value;
        first = false;
    }
    os << ")";
    return os.str();
}

// Determinant by cofactor expansion along the first row; intended for the
// small frames that show up here (a handful of coordinates).
Expr sym_det(const ExprMatrix& m) {
    const std::size_t n = m.size();
    if (n == 0) return Expr::integer(1);
    if (n == 1) return m[0][0];
    if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    Expr acc;
    for (std::size_t col = 0; col < n; ++col) {
        ExprMatrix minor;
        minor.reserve(n - 1);
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<Expr> row;
            row.reserve(n - 1);
            for (std::size_t c = 0; c < n; ++c)
                if (c != col) row.push_back(m[r][c]);
            minor.push_back(std::move(row));
        }
        Expr term = m[0][col] * sym_det(minor);
        acc = (col % 2 == 0) ? acc + term : acc - term;
    }
    return acc;
}

// adj(m) with m * adj(m) = det(m) * I.
ExprMatrix sym_adjugate(const ExprMatrix& m) {
    const std::size_t n = m.size();
    ExprMatrix out(n, std::vector<Expr>(n));
    if (n == 1) {
        out[0][0] = Expr::integer(1);
        return out;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            ExprMatrix minor;
            minor.reserve(n - 1);
            for (std::size_t r = 0; r < n; ++r) {
                if (r == j) continue;
                std::vector<Expr> row;
                row.reserve(n - 1);
                for (std::size_t c = 0; c < n; ++c)
                    if (c != i) row.push_back(m[r][c]);
                minor.push_back(std::move(row));
            }
            Expr d = sym_det(minor);
            out[i][j] = ((i + j) % 2 == 0) ? d : -d;
        }
    return out;
}

void require_components_on_chart(const std::vector<Expr>& comps, const Chart& chart,
                                 const std::string& what) {
    for (const Expr& e : comps)
        for (const std::string& v : free_variables(e))
            if (chart.index_of(v) < 0)
                throw InputError(what + " uses unknown variable '" + v + "'");
}

void require_action_shape(const GroupAction& act) {
    const std::size_t n = act.ambient.dim();
    if (n == 0) throw InputError("group action needs a nonempty ambient chart");
    if (static_cast<int>(act.generators.size()) != act.algebra.dim())
        throw InputError("group action needs one generator per algebra basis element");
    for (const auto& gen : act.generators) {
        if (gen.size() != n)
            throw InputError("generator components must match the ambient dimension");
        require_components_on_chart(gen, act.ambient, "generator");
    }
    require_components_on_chart({act.pairing}, act.ambient, "frame pairing");
    if (!charts_equal(act.quotient_map.source(), act.ambient))
        throw InputError("quotient map must start at the ambient chart");
    if (!charts_equal(act.quotient_map.target(), act.quotient_poisson.chart()))
        throw InputError("quotient structure must live on the quotient chart");
}

void require_on_ambient(const GroupAction& act, const PoissonStructure& pi) {
    if (!charts_equal(pi.chart(), act.ambient))
        throw InputError("bivector must live on the ambient chart");
}

MultiVectorField gen_field(const GroupAction& act, int i) {
    return MultiVectorField::vector(act.ambient, act.generators[i]);
}

struct WorstSample {
    double residual = 0.0;
    Point at;
};

// Worst scale-normalized residual over sample points, remembering where it
// occurred so failures can name a witness.
WorstSample worst_residual(const std::vector<Expr>& exprs, const Chart& chart,
                           std::string_view op, const ZeroTestOptions& opt) {
    std::mt19937_64 rng(derive_seed(op, chart, opt.seed));
    WorstSample w;
    for (int t = 0; t < opt.trials; ++t) {
        Point p = sample_point(chart, rng);
        if (w.at.empty()) w.at = p;
        for (const Expr& e : exprs) {
            EvalWithScale ev = evaluate_with_scale(e, p);
            double r = std::abs(ev.value) / (1.0 + ev.scale);
            if (r > w.residual) {
                w.residual = r;
                w.at = p;
            }
        }
    }
    return w;
}

std::vector<Expr> flatten(const MultiVectorField& a) {
    std::vector<Expr> out;
    for (const auto& [idx, e] : a.terms()) out.push_back(e);
    return out;
}

// Fixes the overall orientation of a computed density: frame ordering can
// flip the sign globally without changing the modular field, so a density
// that is negative at every sample point is negated. Mixed signs or values
// that are numerically zero mean the construction degenerated.
Expr orient_density(Expr rho, const Chart& chart, std::string_view op, const ZeroTestOptions& opt,
                    const std::string& what) {
    std::mt19937_64 rng(derive_seed(op, chart, opt.seed));
    int positive = 0;
    int negative = 0;
    Point witness;
    for (int t = 0; t < opt.trials; ++t) {
        Point p = sample_point(chart, rng);
        EvalWithScale ev = evaluate_with_scale(rho, p);
        if (std::abs(ev.value) <= 1e-12 * (1.0 + ev.scale))
            throw NonPositiveDensity(what + " vanishes at " + point_string(p));
        if (ev.value > 0)
            ++positive;
        else {
            ++negative;
            witness = p;
        }
    }
    if (positive > 0 && negative > 0)
        throw NonPositiveDensity(what + " changes sign; negative at " + point_string(witness));
    return negative > 0 ? -rho : rho;
}

}  // namespace

ActionValidation validate_action(const GroupAction& act, const PoissonStructure& pi,
                                 const ZeroTestOptions& opt) {
    require_action_shape(act);
    require_on_ambient(act, pi);
    const int d = act.algebra.dim();
    const std::size_t n = act.ambient.dim();

    ActionValidation out;
    auto note = [&out](const std::string& name, const WorstSample& w, double tol) {
        out.residuals[name] = w.residual;
        if (w.residual > tol && out.valid) {
            out.valid = false;
            out.failure = name;
            out.witness = w.at;
        }
    };

    std::vector<MultiVectorField> gens;
    gens.reserve(d);
    for (int i = 0; i < d; ++i) gens.push_back(gen_field(act, i));

    // Generators realize the structure constants: [xi_i, xi_j] + sum_k c^k_ij xi_k = 0.
    {
        std::vector<Expr> exprs;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                MultiVectorField resid = lie_derivative(gens[i], gens[j]);
                for (int k = 0; k < d; ++k)
                    resid = resid + gens[k].scaled(Expr::number(act.algebra.c(i, j, k)));
                for (Expr& e : flatten(resid)) exprs.push_back(std::move(e));
            }
        note("structure_constants", worst_residual(exprs, act.ambient, "action_structure", opt),
             opt.tol);
    }

    // The bivector is invariant along every generator.
    {
        std::vector<Expr> exprs;
        for (int i = 0; i < d; ++i)
            for (Expr& e : flatten(lie_derivative(gens[i], pi.bivector())))
                exprs.push_back(std::move(e));
        note("invariant_bivector", worst_residual(exprs, act.ambient, "action_bivector", opt),
             opt.tol);
    }

    // Generators are tangent to the quotient fibers.
    {
        std::vector<Expr> exprs;
        for (int i = 0; i < d; ++i) {
            VectorFieldAlongMap push = pushforward(act.quotient_map, gens[i]);
            for (Expr& e : push.components) exprs.push_back(std::move(e));
        }
        note("invariant_map", worst_residual(exprs, act.ambient, "action_map", opt), opt.tol);
    }

    // The quotient map intertwines the two brackets.
    {
        const Chart& target = act.quotient_map.target();
        const std::vector<Expr>& comps = act.quotient_map.components();
        std::map<std::string, Expr> table;
        for (std::size_t a = 0; a < target.dim(); ++a) table[target.coords[a]] = comps[a];
        std::vector<Expr> exprs;
        for (std::size_t a = 0; a < target.dim(); ++a)
            for (std::size_t b = a + 1; b < target.dim(); ++b) {
                IndexTuple idx{static_cast<int>(a), static_cast<int>(b)};
                exprs.push_back(substitute(act.quotient_poisson.bivector().component(idx), table) -
                                poisson_bracket(pi, comps[a], comps[b]));
            }
        note("poisson_map", worst_residual(exprs, act.ambient, "action_poisson_map", opt), opt.tol);
    }

    // Pointwise independence of the generator frame.
    if (d > 0) {
        std::mt19937_64 rng(derive_seed("action_independence", act.ambient, opt.seed));
        double min_sv = std::numeric_limits<double>::infinity();
        Point arg;
        for (int t = 0; t < opt.trials; ++t) {
            Point p = sample_point(act.ambient, rng);
            Eigen::MatrixXd cols(n, d);
            for (std::size_t r = 0; r < n; ++r)
                for (int c = 0; c < d; ++c) cols(r, c) = evaluate(act.generators[c][r], p);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(cols);
            double sv = svd.singularValues().minCoeff();
            if (sv < min_sv) {
                min_sv = sv;
                arg = p;
            }
        }
        out.residuals["independence"] = min_sv;
        if (min_sv < 1e-6 && out.valid) {
            out.valid = false;
            out.failure = "independence";
            out.witness = arg;
        }
    }

    return out;
}

VolumeDensity quotient_volume(const GroupAction& act, const VolumeDensity& nu,
                              const ZeroTestOptions& opt) {
    require_action_shape(act);
    if (!charts_equal(nu.chart, act.quotient_map.target()))
        throw InputError("quotient volume input must live on the quotient chart");
    const int d = act.algebra.dim();
    const std::size_t n = act.ambient.dim();
    const std::size_t q = act.quotient_map.target().dim();
    if (static_cast<std::size_t>(d) + q != n)
        throw InputError(
            "algebra dimension plus quotient dimension must equal the ambient dimension");

    for (int i = 0; i < d; ++i) {
        VectorFieldAlongMap push = pushforward(act.quotient_map, gen_field(act, i));
        for (const Expr& c : push.components)
            if (!is_zero(c, act.ambient, opt))
                throw InputError("generators must be tangent to the quotient fibers");
    }

    // Gram matrix of the quotient differentials and the full frame
    // [generators | gradient rows]; the density is
    // (rho_nu o phi) * det(J J^T) / det[P | J^T].
    ExprMatrix jj(q, std::vector<Expr>(q));
    for (std::size_t a = 0; a < q; ++a)
        for (std::size_t b = 0; b < q; ++b) {
            Expr acc;
            for (std::size_t i = 0; i < n; ++i)
                acc += act.quotient_map.jacobian(static_cast<int>(a), static_cast<int>(i)) *
                       act.quotient_map.jacobian(static_cast<int>(b), static_cast<int>(i));
            jj[a][b] = acc;
        }
    Expr det_jj = sym_det(jj);

    ExprMatrix frame(n, std::vector<Expr>(n));
    for (std::size_t r = 0; r < n; ++r) {
        for (int c = 0; c < d; ++c) frame[r][c] = act.generators[c][r];
        for (std::size_t c = 0; c < q; ++c)
            frame[r][d + c] = act.quotient_map.jacobian(static_cast<int>(c), static_cast<int>(r));
    }
    Expr det_frame = sym_det(frame);

    {
        std::mt19937_64 rng(derive_seed("quotient_frame", act.ambient, opt.seed));
        for (int t = 0; t < opt.trials; ++t) {
            Point p = sample_point(act.ambient, rng);
            for (const Expr* det : {&det_frame, &det_jj}) {
                EvalWithScale ev = evaluate_with_scale(*det, p);
                if (std::abs(ev.value) <= 1e-8 * (1.0 + ev.scale))
                    throw DegenerateFrame("generator/gradient frame degenerates at " +
                                          point_string(p));
            }
        }
    }

    Expr rho = pullback(act.quotient_map, nu.rho) * det_jj / det_frame;
    {
        std::mt19937_64 rng(derive_seed("quotient_positive", act.ambient, opt.seed));
        for (int t = 0; t < opt.trials; ++t) {
            Point p = sample_point(act.ambient, rng);
            if (evaluate(rho, p) <= 0)
                throw NonPositiveDensity("assembled density is not positive at " +
                                         point_string(p));
        }
    }
    return make_volume(act.ambient, rho, opt);
}

ActionModularReport action_modular_rep(const GroupAction& act, const PoissonStructure& pi,
                                       const VolumeDensity& nu, const ZeroTestOptions& opt) {
    require_on_ambient(act, pi);
    VolumeDensity mu = quotient_volume(act, nu, opt);
    MultiVectorField x_mu = modular_vf(pi, mu, opt);

    double proj = 0.0;
    for (int i = 0; i < act.algebra.dim(); ++i) {
        VectorFieldAlongMap push =
            pushforward(act.quotient_map, lie_derivative(gen_field(act, i), x_mu));
        proj = std::max(proj, max_relative_residual(push, opt));
    }
    VectorFieldAlongMap along =
        map_modular_vf(act.quotient_map, pi, act.quotient_poisson, mu, nu, opt);
    double rel = max_relative_residual(along, opt);

    ActionModularReport out{std::move(mu), std::move(x_mu), proj, rel,
                            proj <= opt.tol, rel <= opt.tol};
    return out;
}

bool check_moment(const GroupAction& act, const MomentMap& kappa, const PoissonStructure& pi,
                  const ZeroTestOptions& opt) {
    require_action_shape(act);
    require_on_ambient(act, pi);
    if (kappa.components.size() != act.generators.size())
        throw InputError("moment map needs one component per algebra basis element");
    require_components_on_chart(kappa.components, act.ambient, "moment component");
    for (int i = 0; i < act.algebra.dim(); ++i) {
        MultiVectorField diff =
            gen_field(act, i) - sharp(pi, differential(act.ambient, kappa.components[i]));
        if (!is_zero(diff, opt)) return false;
    }
    return true;
}

MomentModularReport moment_modular_residual(const MomentMap& kappa, const PoissonStructure& pi,
                                            const VolumeDensity& rho_invariant,
                                            const LieAlgebraData& g, const ZeroTestOptions& opt,
                                            int degree_cap) {
    const Chart& chart = pi.chart();
    if (!charts_equal(rho_invariant.chart, chart))
        throw InputError("volume must live on the chart of the bivector");
    const int d = g.dim();
    if (static_cast<int>(kappa.components.size()) != d)
        throw InputError("moment map needs one component per algebra basis element");
    require_components_on_chart(kappa.components, chart, "moment component");

    // Flows generated by the moment components.
    std::vector<std::vector<Expr>> flows;
    flows.reserve(d);
    for (int i = 0; i < d; ++i)
        flows.push_back(sharp(pi, differential(chart, kappa.components[i])).dense_components());

    // The density must be invariant: the divergence of rho * flow vanishes.
    for (int i = 0; i < d; ++i) {
        Expr div;
        for (std::size_t j = 0; j < chart.dim(); ++j)
            div += differentiate(rho_invariant.rho * flows[i][j], chart.coords[j]);
        if (!is_zero(div, chart, opt))
            throw NonInvariantDensity("volume is not invariant under the moment flows");
    }

    // The components must realize the structure constants:
    // {kappa_i, kappa_j} + sum_k c^k_ij kappa_k = 0.
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            Expr resid = poisson_bracket(pi, kappa.components[i], kappa.components[j]);
            for (int k = 0; k < d; ++k)
                resid += Expr::number(g.c(i, j, k)) * kappa.components[k];
            if (!is_zero(resid, chart, opt))
                throw InputError("moment components do not realize the structure constants");
        }

    MultiVectorField x_mu = modular_vf(pi, rho_invariant, opt);
    MomentModularReport out;
    out.theta0 = adjoint_character(g);
    out.constant_residual = true;
    bool unimodular = true;
    for (int i = 0; i < d; ++i) {
        Expr r = apply_vector_field(x_mu, kappa.components[i]) - Expr::number(out.theta0[i]);
        if (!r.is_number()) out.constant_residual = false;
        if (out.theta0[i] != 0) unimodular = false;
        out.residual.push_back(std::move(r));
    }

    if (unimodular && d > 0) {
        Chart dual;
        for (int i = 0; i < d; ++i) dual.coords.push_back("m" + std::to_string(i + 1));
        SmoothMap kmap(chart, dual, kappa.components);
        VectorFieldAlongMap resid{kmap, out.residual};
        out.exactness = map_hamiltonian_witness(kmap, pi, resid, degree_cap);
    }
    return out;
}

HamQuotientReport ham_quotient_verify(const GroupAction& act, const PoissonStructure& pi,
                                      const MomentMap& kappa,
                                      const std::vector<Expr>& kappa_quotient,
                                      const DifferentialForm& tau,
                                      const std::vector<double>& level, int min_points,
                                      const ZeroTestOptions& opt) {
    require_action_shape(act);
    require_on_ambient(act, pi);
    const int d = act.algebra.dim();
    const std::size_t n = act.ambient.dim();
    const Chart& qchart = act.quotient_map.target();
    if (static_cast<std::size_t>(d) + qchart.dim() != n)
        throw InputError(
            "algebra dimension plus quotient dimension must equal the ambient dimension");
    if (static_cast<int>(kappa.components.size()) != d ||
        static_cast<int>(kappa_quotient.size()) != d || static_cast<int>(level.size()) != d)
        throw InputError("moment data needs one entry per algebra basis element");
    if (!charts_equal(tau.chart(), qchart))
        throw InputError("reduced volume must live on the quotient chart");
    if (2 * d > static_cast<int>(n) || tau.degree() != static_cast<int>(n) - 2 * d)
        throw InputError("reduced volume must have degree ambient-dim minus twice the rank");
    if (min_points < 1) throw InputError("at least one level sample is required");
    require_components_on_chart(kappa_quotient, qchart, "quotient moment expression");

    ActionValidation valid = validate_action(act, pi, opt);
    if (!valid.valid) throw InputError("action invariants fail: " + valid.failure);
    if (!check_moment(act, kappa, pi, opt))
        throw InputError("generators are not generated by the moment components");
    for (int i = 0; i < d; ++i)
        if (!is_zero(pullback(act.quotient_map, kappa_quotient[i]) - kappa.components[i],
                     act.ambient, opt))
            throw InputError("quotient moment expressions do not pull back to the moment map");

    // Dual coframe of the generators from their Gram matrix; the ambiguity in
    // the choice dies against the basic factors of the wedge below.
    ExprMatrix gram(d, std::vector<Expr>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Expr acc;
            for (std::size_t r = 0; r < n; ++r)
                acc += act.generators[i][r] * act.generators[j][r];
            gram[i][j] = acc;
        }
    Expr det_gram = sym_det(gram);
    if (d > 0) {
        std::mt19937_64 rng(derive_seed("level_frame", act.ambient, opt.seed));
        for (int t = 0; t < opt.trials; ++t) {
            Point p = sample_point(act.ambient, rng);
            EvalWithScale ev = evaluate_with_scale(det_gram, p);
            if (std::abs(ev.value) <= 1e-8 * (1.0 + ev.scale))
                throw DegenerateFrame("generator frame degenerates at " + point_string(p));
        }
    }
    ExprMatrix adj = sym_adjugate(gram);

    DifferentialForm assembled = DifferentialForm::function(act.ambient, Expr::integer(1));
    for (int i = 0; i < d; ++i) {
        std::vector<Expr> row(n);
        for (std::size_t r = 0; r < n; ++r) {
            Expr acc;
            for (int j = 0; j < d; ++j) acc += adj[i][j] * act.generators[j][r];
            row[r] = acc / det_gram;
        }
        assembled = wedge(assembled, DifferentialForm::covector(act.ambient, row));
    }
    assembled = wedge(assembled, pullback(act.quotient_map, tau));
    for (int i = 0; i < d; ++i)
        assembled = wedge(assembled, differential(act.ambient, kappa.components[i]));

    IndexTuple top(n);
    for (std::size_t i = 0; i < n; ++i) top[i] = static_cast<int>(i);
    Expr rho_bar =
        orient_density(assembled.component(top), act.ambient, "level_volume", opt,
                       "level-adapted density");
    VolumeDensity mu_vol = make_volume(act.ambient, rho_bar, opt);
    MultiVectorField x_mu = modular_vf(pi, mu_vol, opt);

    // Reduced-side volume: tau wedged with the quotient moment differentials.
    DifferentialForm sigma = tau;
    for (int i = 0; i < d; ++i) sigma = wedge(sigma, differential(qchart, kappa_quotient[i]));
    IndexTuple qtop(qchart.dim());
    for (std::size_t i = 0; i < qchart.dim(); ++i) qtop[i] = static_cast<int>(i);
    Expr rho_sigma = orient_density(sigma.component(qtop), qchart, "reduced_volume", opt,
                                    "reduced density");
    MultiVectorField x_sigma =
        modular_vf(act.quotient_poisson, make_volume(qchart, rho_sigma, opt), opt);

    std::vector<Expr> tangency;
    for (int i = 0; i < d; ++i) tangency.push_back(apply_vector_field(x_mu, kappa.components[i]));
    std::map<std::string, Expr> table;
    for (std::size_t a = 0; a < qchart.dim(); ++a)
        table[qchart.coords[a]] = act.quotient_map.components()[a];
    std::vector<Expr> related;
    {
        std::vector<Expr> xs = x_sigma.dense_components();
        for (std::size_t a = 0; a < qchart.dim(); ++a)
            related.push_back(apply_vector_field(x_mu, act.quotient_map.components()[a]) -
                              substitute(xs[a], table));
    }

    std::vector<std::vector<Expr>> dk(d, std::vector<Expr>(n));
    for (int i = 0; i < d; ++i)
        for (std::size_t r = 0; r < n; ++r)
            dk[i][r] = differentiate(kappa.components[i], act.ambient.coords[r]);

    HamQuotientReport out;
    out.density = rho_bar;
    std::mt19937_64 rng(derive_seed("level_sampling", act.ambient, opt.seed));
    long attempts = 0;
    const long max_attempts = 200L * min_points;
    const double rank_tol = 1e-8;
    while (out.points < min_points) {
        if (++attempts > max_attempts)
            throw NumericalError("could not sample enough points on the moment level set");
        Point p = sample_point(act.ambient, rng);

        bool converged = (d == 0);
        for (int it = 0; it < 80 && !converged; ++it) {
            Eigen::VectorXd f(d);
            for (int i = 0; i < d; ++i) f(i) = evaluate(kappa.components[i], p) - level[i];
            if (f.lpNorm<Eigen::Infinity>() < 1e-12) {
                converged = true;
                break;
            }
            Eigen::MatrixXd jac(d, n);
            for (int i = 0; i < d; ++i)
                for (std::size_t r = 0; r < n; ++r) jac(i, r) = evaluate(dk[i][r], p);
            Eigen::MatrixXd jjt = jac * jac.transpose();
            Eigen::FullPivLU<Eigen::MatrixXd> lu(jjt);
            if (!lu.isInvertible()) break;
            Eigen::VectorXd step = jac.transpose() * lu.solve(f);
            for (std::size_t r = 0; r < n; ++r) p[act.ambient.coords[r]] -= step(r);
        }
        if (!converged) continue;
        if (act.ambient.guard && evaluate(*act.ambient.guard, p) <= 0) continue;

        if (d > 0) {
            Eigen::MatrixXd jac(d, n);
            for (int i = 0; i < d; ++i)
                for (std::size_t r = 0; r < n; ++r) jac(i, r) = evaluate(dk[i][r], p);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac * jac.transpose());
            if (es.eigenvalues().minCoeff() < rank_tol)
                throw RankDeficientLevel("moment level set is not regular near " +
                                         point_string(p));
        }

        for (int i = 0; i < d; ++i)
            out.level_residual = std::max(
                out.level_residual, std::abs(evaluate(kappa.components[i], p) - level[i]));
        for (const Expr& e : tangency)
            out.tangency_residual = std::max(out.tangency_residual, std::abs(evaluate(e, p)));
        for (const Expr& e : related)
            out.relatedness_residual =
                std::max(out.relatedness_residual, std::abs(evaluate(e, p)));
        ++out.points;
    }
    return out;
}

}  // namespace poismod
