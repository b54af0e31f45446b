#include "poismod/maps.hpp"

#include <sstream>
#include <utility>

namespace poismod {

namespace {

// Replacement table sending each target coordinate to the matching component.
std::map<std::string, Expr> composition_table(const SmoothMap& phi) {
    std::map<std::string, Expr> repl;
    for (std::size_t a = 0; a < phi.target().dim(); ++a)
        repl.emplace(phi.target().coords[a], phi.components()[a]);
    return repl;
}

void require_expr_over(const Expr& e, const Chart& chart, const char* what) {
    for (const auto& v : free_variables(e))
        if (chart.index_of(v) < 0)
            throw InputError(std::string(what) + " uses variable '" + v +
                             "' absent from the chart");
}

void require_source_structure(const SmoothMap& phi, const PoissonStructure& pi) {
    if (!charts_equal(pi.chart(), phi.source()))
        throw InputError("structure chart does not match the map source");
}

void require_target_structure(const SmoothMap& phi, const PoissonStructure& pi) {
    if (!charts_equal(pi.chart(), phi.target()))
        throw InputError("structure chart does not match the map target");
}

void require_target_form(const SmoothMap& phi, const DifferentialForm& alpha) {
    if (!charts_equal(alpha.chart(), phi.target()))
        throw InputError("form chart does not match the map target");
    if (alpha.degree() != 1) throw InputError("expected a 1-form");
}

void require_same_map(const SmoothMap& a, const SmoothMap& b) {
    bool ok = charts_equal(a.source(), b.source()) && charts_equal(a.target(), b.target());
    if (ok)
        for (std::size_t i = 0; i < a.components().size(); ++i)
            ok = ok && structurally_equal(a.components()[i], b.components()[i]);
    if (!ok) throw InputError("vector fields live along different maps");
}

// All componentwise defects (target bivector component) o phi - {phi^a, phi^b}.
std::vector<Expr> bracket_defect(const SmoothMap& phi, const PoissonStructure& pi_src,
                                 const PoissonStructure& pi_tgt) {
    require_source_structure(phi, pi_src);
    require_target_structure(phi, pi_tgt);
    const auto repl = composition_table(phi);
    const int n = static_cast<int>(phi.target().dim());
    std::vector<Expr> out;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            Expr lhs = substitute(pi_tgt.bivector().component({a, b}), repl);
            Expr rhs = poisson_bracket(pi_src, phi.components()[a], phi.components()[b]);
            out.push_back(lhs - rhs);
        }
    return out;
}

// <p, gamma o phi> for a target 1-form gamma.
Expr contract_along(const SmoothMap& phi, const VectorFieldAlongMap& p,
                    const DifferentialForm& gamma) {
    Expr acc = Expr::integer(0);
    const auto dense = gamma.dense_components();
    for (std::size_t a = 0; a < dense.size(); ++a) acc += pullback(phi, dense[a]) * p.components[a];
    return acc;
}

}  // namespace

SmoothMap::SmoothMap(Chart source, Chart target, std::vector<Expr> components)
    : source_(std::move(source)), target_(std::move(target)), components_(std::move(components)) {
    if (components_.size() != target_.dim())
        throw InputError("map has " + std::to_string(components_.size()) +
                         " components for a target of dimension " +
                         std::to_string(target_.dim()));
    for (const auto& c : components_) require_expr_over(c, source_, "map component");
    jac_.resize(components_.size());
    for (std::size_t a = 0; a < components_.size(); ++a) {
        jac_[a].reserve(source_.dim());
        for (const auto& x : source_.coords) jac_[a].push_back(differentiate(components_[a], x));
    }
}

SmoothMap identity_map(const Chart& chart) {
    std::vector<Expr> comps;
    comps.reserve(chart.dim());
    for (const auto& x : chart.coords) comps.push_back(Expr::variable(x));
    return SmoothMap(chart, chart, std::move(comps));
}

SmoothMap compose(const SmoothMap& phi, const SmoothMap& psi) {
    if (!charts_equal(phi.target(), psi.source()))
        throw InputError("composition charts do not line up");
    const auto repl = composition_table(phi);
    std::vector<Expr> comps;
    comps.reserve(psi.components().size());
    for (const auto& c : psi.components()) comps.push_back(substitute(c, repl));
    return SmoothMap(phi.source(), psi.target(), std::move(comps));
}

Expr pullback(const SmoothMap& phi, const Expr& f) {
    require_expr_over(f, phi.target(), "pullback argument");
    return substitute(f, composition_table(phi));
}

DifferentialForm pullback(const SmoothMap& phi, const DifferentialForm& alpha) {
    if (!charts_equal(alpha.chart(), phi.target()))
        throw InputError("form chart does not match the map target");
    DifferentialForm out(phi.source(), alpha.degree());
    for (const auto& [idx, c] : alpha.terms()) {
        DifferentialForm piece(phi.source(), 0);
        piece.add_term({}, pullback(phi, c));
        for (int a : idx) piece = wedge(piece, differential(phi.source(), phi.components()[a]));
        out = out + piece;
    }
    return out;
}

VectorFieldAlongMap operator+(const VectorFieldAlongMap& a, const VectorFieldAlongMap& b) {
    require_same_map(a.map, b.map);
    VectorFieldAlongMap out = a;
    for (std::size_t i = 0; i < out.components.size(); ++i)
        out.components[i] = out.components[i] + b.components[i];
    return out;
}

VectorFieldAlongMap operator-(const VectorFieldAlongMap& a, const VectorFieldAlongMap& b) {
    require_same_map(a.map, b.map);
    VectorFieldAlongMap out = a;
    for (std::size_t i = 0; i < out.components.size(); ++i)
        out.components[i] = out.components[i] - b.components[i];
    return out;
}

VectorFieldAlongMap operator-(const VectorFieldAlongMap& a) {
    VectorFieldAlongMap out = a;
    for (auto& c : out.components) c = -c;
    return out;
}

bool is_zero(const VectorFieldAlongMap& p, const ZeroTestOptions& opt) {
    for (const auto& c : p.components)
        if (!is_zero(c, p.map.source(), opt)) return false;
    return true;
}

double max_relative_residual(const VectorFieldAlongMap& p, const ZeroTestOptions& opt) {
    double worst = 0.0;
    for (const auto& c : p.components)
        worst = std::max(worst, max_relative_residual(c, p.map.source(), opt));
    return worst;
}

std::string to_string(const VectorFieldAlongMap& p) {
    std::string out;
    for (std::size_t a = 0; a < p.components.size(); ++a) {
        if (!out.empty()) out += " + ";
        out += "(" + to_string(p.components[a]) + ") e[" + p.map.target().coords[a] + "]";
    }
    return out.empty() ? "0" : out;
}

VectorFieldAlongMap pushforward(const SmoothMap& phi, const MultiVectorField& x) {
    if (x.degree() != 1) throw InputError("pushforward requires a degree-1 field");
    if (!charts_equal(x.chart(), phi.source()))
        throw InputError("field chart does not match the map source");
    std::vector<Expr> comps;
    comps.reserve(phi.target().dim());
    for (std::size_t a = 0; a < phi.target().dim(); ++a) {
        Expr acc = Expr::integer(0);
        for (const auto& [idx, c] : x.terms())
            acc += phi.jacobian(static_cast<int>(a), idx[0]) * c;
        comps.push_back(acc);
    }
    return {phi, std::move(comps)};
}

double poisson_map_residual(const SmoothMap& phi, const PoissonStructure& pi_src,
                            const PoissonStructure& pi_tgt, const ZeroTestOptions& opt) {
    double worst = 0.0;
    for (const auto& d : bracket_defect(phi, pi_src, pi_tgt))
        worst = std::max(worst, max_relative_residual(d, phi.source(), opt));
    return worst;
}

bool check_poisson_map(const SmoothMap& phi, const PoissonStructure& pi_src,
                       const PoissonStructure& pi_tgt, const ZeroTestOptions& opt) {
    for (const auto& d : bracket_defect(phi, pi_src, pi_tgt))
        if (!is_zero(d, phi.source(), opt)) return false;
    return true;
}

MultiVectorField pullback_anchor(const SmoothMap& phi, const PoissonStructure& pi_src,
                                 const DifferentialForm& alpha) {
    require_source_structure(phi, pi_src);
    require_target_form(phi, alpha);
    return sharp(pi_src, pullback(phi, alpha));
}

Expr algebroid_diff0(const SmoothMap& phi, const PoissonStructure& pi_src, const Expr& f,
                     const DifferentialForm& alpha) {
    require_expr_over(f, phi.source(), "function");
    return apply_vector_field(pullback_anchor(phi, pi_src, alpha), f);
}

Expr algebroid_diff1(const SmoothMap& phi, const PoissonStructure& pi_src,
                     const PoissonStructure& pi_tgt, const VectorFieldAlongMap& p,
                     const DifferentialForm& alpha, const DifferentialForm& beta) {
    require_same_map(phi, p.map);
    require_target_structure(phi, pi_tgt);
    require_target_form(phi, alpha);
    require_target_form(phi, beta);
    MultiVectorField ra = pullback_anchor(phi, pi_src, alpha);
    MultiVectorField rb = pullback_anchor(phi, pi_src, beta);
    DifferentialForm br = bracket_1forms(pi_tgt, alpha, beta);
    return apply_vector_field(ra, contract_along(phi, p, beta)) -
           apply_vector_field(rb, contract_along(phi, p, alpha)) - contract_along(phi, p, br);
}

VectorFieldAlongMap map_modular_vf(const SmoothMap& phi, const PoissonStructure& pi_src,
                                   const PoissonStructure& pi_tgt, const VolumeDensity& rho_src,
                                   const VolumeDensity& rho_tgt, const ZeroTestOptions& opt) {
    const double defect = poisson_map_residual(phi, pi_src, pi_tgt, opt);
    if (defect > opt.tol) {
        std::ostringstream os;
        os << "map is not Poisson (bracket defect residual " << defect << ")";
        throw NotPoissonMap(os.str());
    }
    MultiVectorField xm = modular_vf(pi_src, rho_src, opt);
    MultiVectorField xn = modular_vf(pi_tgt, rho_tgt, opt);
    VectorFieldAlongMap out = pushforward(phi, xm);
    const auto repl = composition_table(phi);
    const auto dense = xn.dense_components();
    for (std::size_t a = 0; a < dense.size(); ++a)
        out.components[a] = out.components[a] - substitute(dense[a], repl);
    return out;
}

VectorFieldAlongMap check_composition(const SmoothMap& phi, const SmoothMap& psi,
                                      const PoissonStructure& pi_m, const PoissonStructure& pi_n,
                                      const PoissonStructure& pi_q, const VolumeDensity& rho_m,
                                      const VolumeDensity& rho_n, const VolumeDensity& rho_q,
                                      const ZeroTestOptions& opt) {
    const SmoothMap chain = compose(phi, psi);
    VectorFieldAlongMap whole = map_modular_vf(chain, pi_m, pi_q, rho_m, rho_q, opt);
    VectorFieldAlongMap first = map_modular_vf(phi, pi_m, pi_n, rho_m, rho_n, opt);
    VectorFieldAlongMap second = map_modular_vf(psi, pi_n, pi_q, rho_n, rho_q, opt);
    const auto repl = composition_table(phi);
    VectorFieldAlongMap out = whole;
    for (std::size_t a = 0; a < out.components.size(); ++a) {
        Expr push = Expr::integer(0);
        for (std::size_t b = 0; b < first.components.size(); ++b)
            push += substitute(psi.jacobian(static_cast<int>(a), static_cast<int>(b)), repl) *
                    first.components[b];
        out.components[a] = out.components[a] - push - substitute(second.components[a], repl);
    }
    return out;
}

WitnessResult map_hamiltonian_witness(const SmoothMap& phi, const PoissonStructure& pi_src,
                                      const VectorFieldAlongMap& p, int degree_cap) {
    require_source_structure(phi, pi_src);
    require_same_map(phi, p.map);
    auto op = [&](const Expr& f) {
        VectorFieldAlongMap q = pushforward(phi, hamiltonian_vf(pi_src, f));
        for (auto& c : q.components) c = -c;
        return q.components;
    };
    return solve_linear_witness(phi.source(), degree_cap, op, p.components);
}

}  // namespace poismod
