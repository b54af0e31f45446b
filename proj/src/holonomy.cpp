#include "poismod/holonomy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

namespace poismod {

namespace {

void require_ambient(const SubmanifoldSpec& n) {
    std::set<std::string> seen;
    for (const auto& name : n.transverse) {
        if (n.ambient.index_of(name) < 0)
            throw InputError("transverse coordinate '" + name + "' is not in the ambient chart");
        if (!seen.insert(name).second)
            throw InputError("transverse coordinate '" + name + "' is listed twice");
    }
}

DifferentialForm coordinate_differential(const Chart& chart, int index) {
    DifferentialForm dx(chart, 1);
    dx.add_term({index}, Expr::integer(1));
    return dx;
}

std::string zero_set_string(const SubmanifoldSpec& n) {
    std::string out = "{";
    for (std::size_t k = 0; k < n.transverse.size(); ++k) {
        if (k) out += ", ";
        out += n.transverse[k] + "=0";
    }
    out += "}";
    return out;
}

Point segment_point(const Chart& chart, const PathSample& sample, double t) {
    Point p;
    for (std::size_t i = 0; i < chart.coords.size(); ++i) p[chart.coords[i]] = sample.base[i];
    p["t"] = t;
    return p;
}

// Symbolic data for one path leg: the connection matrix and the tangential
// components whose vanishing the transport must re-check pointwise.
struct LeakEntry {
    int tangential_index;  // ambient coordinate index
    int column;            // position of the conormal generator in `transverse`
    Expr value;
};

struct SegmentConnection {
    std::vector<std::vector<Expr>> gamma;  // gamma[row][col]
    std::vector<LeakEntry> leaks;
};

}  // namespace

std::vector<int> SubmanifoldSpec::transverse_indices() const {
    std::vector<int> out;
    out.reserve(transverse.size());
    for (const auto& name : transverse) out.push_back(ambient.index_of(name));
    return out;
}

std::vector<int> SubmanifoldSpec::tangential_indices() const {
    std::set<std::string> cut(transverse.begin(), transverse.end());
    std::vector<int> out;
    for (std::size_t i = 0; i < ambient.coords.size(); ++i)
        if (!cut.count(ambient.coords[i])) out.push_back(static_cast<int>(i));
    return out;
}

Chart SubmanifoldSpec::induced_chart() const {
    Chart induced;
    for (int i : tangential_indices()) induced.coords.push_back(ambient.coords[i]);
    if (ambient.guard) induced.guard = substitute(*ambient.guard, zero_section());
    return induced;
}

std::map<std::string, Expr> SubmanifoldSpec::zero_section() const {
    std::map<std::string, Expr> zeros;
    for (const auto& name : transverse) zeros[name] = Expr();
    return zeros;
}

void validate_submanifold(const PoissonStructure& pi, const SubmanifoldSpec& n,
                          const ZeroTestOptions& opt) {
    if (!charts_equal(pi.chart(), n.ambient))
        throw InputError("submanifold ambient chart does not match the structure chart");
    require_ambient(n);
    const Chart induced = n.induced_chart();
    const auto zeros = n.zero_section();
    const int dim = static_cast<int>(n.ambient.dim());
    for (int m : n.transverse_indices()) {
        for (int j = 0; j < dim; ++j) {
            if (j == m) continue;
            Expr restricted = substitute(pi.bivector().component({m, j}), zeros);
            if (!is_zero(restricted, induced, opt)) {
                throw NotPoissonSubmanifold(
                    "not a Poisson submanifold: bivector component (" + n.ambient.coords[m] +
                    "," + n.ambient.coords[j] + ") does not vanish on " + zero_set_string(n));
            }
        }
    }
}

PoissonStructure restrict_poisson(const PoissonStructure& pi, const SubmanifoldSpec& n,
                                  const ZeroTestOptions& opt) {
    validate_submanifold(pi, n, opt);
    const Chart induced = n.induced_chart();
    const auto zeros = n.zero_section();
    const auto tang = n.tangential_indices();
    std::vector<int> position(n.ambient.dim(), -1);
    for (std::size_t k = 0; k < tang.size(); ++k) position[tang[k]] = static_cast<int>(k);

    MultiVectorField b(induced, 2);
    for (const auto& [idx, coeff] : pi.bivector().terms()) {
        const int pi_ = position[idx[0]];
        const int pj = position[idx[1]];
        if (pi_ < 0 || pj < 0) continue;  // involves a transverse direction
        b.add_term({pi_, pj}, substitute(coeff, zeros));
    }
    return make_poisson(b, opt);
}

SmoothMap inclusion_map(const SubmanifoldSpec& n) {
    require_ambient(n);
    std::set<std::string> cut(n.transverse.begin(), n.transverse.end());
    std::vector<Expr> comps;
    comps.reserve(n.ambient.dim());
    for (const auto& name : n.ambient.coords)
        comps.push_back(cut.count(name) ? Expr() : Expr::variable(name));
    return SmoothMap(n.induced_chart(), n.ambient, comps);
}

VectorFieldAlongMap relative_modular_vf(const PoissonStructure& pi,
                                        const VolumeDensity& rho_ambient,
                                        const VolumeDensity& rho_induced,
                                        const SubmanifoldSpec& n,
                                        const ZeroTestOptions& opt) {
    validate_submanifold(pi, n, opt);
    if (!charts_equal(rho_ambient.chart, n.ambient))
        throw InputError("ambient volume lives on the wrong chart");
    const Chart induced = n.induced_chart();
    if (!charts_equal(rho_induced.chart, induced))
        throw InputError("induced volume lives on the wrong chart");

    const PoissonStructure pi_n = restrict_poisson(pi, n, opt);
    const auto x_mu = modular_vf(pi, rho_ambient, opt).dense_components();
    const auto x_nu = modular_vf(pi_n, rho_induced, opt).dense_components();
    const auto zeros = n.zero_section();
    const auto tang = n.tangential_indices();
    std::vector<int> position(n.ambient.dim(), -1);
    for (std::size_t k = 0; k < tang.size(); ++k) position[tang[k]] = static_cast<int>(k);

    std::vector<Expr> comps;
    comps.reserve(n.ambient.dim());
    for (std::size_t i = 0; i < n.ambient.dim(); ++i) {
        Expr c = substitute(x_mu[i], zeros);
        if (position[i] >= 0) c = c - x_nu[position[i]];
        comps.push_back(c);
    }
    return VectorFieldAlongMap{inclusion_map(n), std::move(comps)};
}

namespace {

PathExtension default_extension(const CotangentPath& a) {
    PathExtension ext;
    ext.reserve(a.segments().size());
    for (const auto& seg : a.segments()) ext.push_back(seg.covector);
    return ext;
}

void check_extension_shape(const SubmanifoldSpec& n, const CotangentPath& a,
                           const PathExtension& extension) {
    if (extension.size() != a.segments().size())
        throw InputError("extension must provide one block of components per path leg");
    std::set<std::string> allowed(n.ambient.coords.begin(), n.ambient.coords.end());
    allowed.insert("t");
    for (const auto& block : extension) {
        if (block.size() != n.ambient.dim())
            throw InputError("extension block must have one component per ambient coordinate");
        for (const auto& e : block)
            for (const auto& v : free_variables(e))
                if (!allowed.count(v))
                    throw InputError("extension component uses unknown symbol '" + v + "'");
    }
}

void check_path_on_submanifold(const SubmanifoldSpec& n, const CotangentPath& a, double tol) {
    const auto trans = n.transverse_indices();
    const int grid = 64;
    for (std::size_t s = 0; s < a.segments().size(); ++s) {
        for (int k = 0; k <= grid; ++k) {
            const PathSample smp = sample_path(a, s, static_cast<double>(k) / grid);
            for (int m : trans) {
                if (std::abs(smp.base[m]) > tol)
                    throw InputError("path base leaves the zero set " + zero_set_string(n));
            }
        }
    }
}

void check_extension_agreement(const SubmanifoldSpec& n, const CotangentPath& a,
                               const PathExtension& extension, double tol) {
    const int grid = 32;
    for (std::size_t s = 0; s < a.segments().size(); ++s) {
        for (int k = 0; k <= grid; ++k) {
            const double t = static_cast<double>(k) / grid;
            const PathSample smp = sample_path(a, s, t);
            const Point p = segment_point(n.ambient, smp, t);
            for (std::size_t i = 0; i < n.ambient.dim(); ++i) {
                const double ev = evaluate(extension[s][i], p);
                if (std::abs(ev - smp.covector[i]) > tol * (1.0 + std::abs(smp.covector[i])))
                    throw InputError("extension does not match the path covector along the base");
            }
        }
    }
}

std::vector<SegmentConnection> build_connections(const PoissonStructure& pi,
                                                 const SubmanifoldSpec& n,
                                                 const PathExtension& extension) {
    const auto trans = n.transverse_indices();
    const auto tang = n.tangential_indices();
    const int q = static_cast<int>(trans.size());
    std::vector<SegmentConnection> out;
    out.reserve(extension.size());
    for (const auto& block : extension) {
        SegmentConnection conn;
        conn.gamma.assign(q, std::vector<Expr>(q));
        const DifferentialForm alpha = DifferentialForm::covector(n.ambient, block);
        for (int c = 0; c < q; ++c) {
            const auto bracket =
                bracket_1forms(pi, alpha, coordinate_differential(n.ambient, trans[c]))
                    .dense_components();
            for (int r = 0; r < q; ++r) conn.gamma[r][c] = bracket[trans[r]];
            for (int j : tang)
                conn.leaks.push_back(LeakEntry{j, c, bracket[j]});
        }
        out.push_back(std::move(conn));
    }
    return out;
}

// Evaluates the connection matrix at leg-local time t, recording the worst
// tangential component and failing fast when it exceeds the tolerance.
Eigen::MatrixXd eval_connection(const SegmentConnection& conn, const SubmanifoldSpec& n,
                                const CotangentPath& a, std::size_t segment, double t,
                                double tol, double* max_leak) {
    const int q = static_cast<int>(conn.gamma.size());
    const PathSample smp = sample_path(a, segment, t);
    const Point p = segment_point(n.ambient, smp, t);
    for (const auto& leak : conn.leaks) {
        const double v = std::abs(evaluate(leak.value, p));
        *max_leak = std::max(*max_leak, v);
        if (v > tol) {
            std::ostringstream msg;
            msg << "conormal bracket leaks tangentially: pairing d"
                << n.transverse[leak.column] << " gives a d"
                << n.ambient.coords[leak.tangential_index] << " component of size " << v
                << " at t=" << t;
            throw ConormalLeak(msg.str());
        }
    }
    Eigen::MatrixXd g(q, q);
    for (int r = 0; r < q; ++r)
        for (int c = 0; c < q; ++c) g(r, c) = evaluate(conn.gamma[r][c], p);
    return g;
}

// Conormal frame transport over all legs: RK4 on U' = -Gamma(t) U from the
// identity, legs composed in order.
Eigen::MatrixXd integrate_frame(const std::vector<SegmentConnection>& conns,
                                const SubmanifoldSpec& n, const CotangentPath& a, int steps,
                                double tol, double* max_leak) {
    const int q = static_cast<int>(conns.front().gamma.size());
    Eigen::MatrixXd u = Eigen::MatrixXd::Identity(q, q);
    for (std::size_t s = 0; s < conns.size(); ++s) {
        const double h = 1.0 / steps;
        for (int k = 0; k < steps; ++k) {
            const double t0 = k * h;
            const Eigen::MatrixXd g1 = eval_connection(conns[s], n, a, s, t0, tol, max_leak);
            const Eigen::MatrixXd g2 =
                eval_connection(conns[s], n, a, s, t0 + 0.5 * h, tol, max_leak);
            const Eigen::MatrixXd g4 = eval_connection(conns[s], n, a, s, t0 + h, tol, max_leak);
            const Eigen::MatrixXd k1 = -g1 * u;
            const Eigen::MatrixXd k2 = -g2 * (u + 0.5 * h * k1);
            const Eigen::MatrixXd k3 = -g2 * (u + 0.5 * h * k2);
            const Eigen::MatrixXd k4 = -g4 * (u + h * k3);
            u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return u;
}

}  // namespace

HolonomyResult transport(const PoissonStructure& pi, const SubmanifoldSpec& n,
                         const CotangentPath& a, const PathExtension& extension, int steps,
                         double tol) {
    if (!charts_equal(pi.chart(), n.ambient))
        throw InputError("transport requires the structure and submanifold on one chart");
    if (!charts_equal(a.chart(), n.ambient))
        throw InputError("transport requires a path on the ambient chart");
    if (a.covector_dim() != n.ambient.dim())
        throw InputError("transport requires an ambient-indexed covector");
    if (steps < 2) throw InputError("transport requires at least 2 steps");
    require_ambient(n);
    check_extension_shape(n, a, extension);
    if (!validate(a, pi, 64, tol))
        throw InputError("transport requires a compatible cotangent path");
    check_path_on_submanifold(n, a, tol);
    check_extension_agreement(n, a, extension, tol);

    HolonomyResult result;
    if (n.transverse.empty()) {
        result.matrix = Eigen::MatrixXd::Identity(0, 0);
        result.det = 1.0;
        return result;
    }

    const auto conns = build_connections(pi, n, extension);
    const Eigen::MatrixXd u = integrate_frame(conns, n, a, steps, tol, &result.max_leak);
    double ignored_leak = 0.0;
    const Eigen::MatrixXd u_half =
        integrate_frame(conns, n, a, std::max(2, steps / 2), tol, &ignored_leak);

    const double det_u = u.determinant();
    if (!std::isfinite(det_u) || std::abs(det_u) < 1e-12)
        throw NumericalError("conormal transport became singular");

    result.matrix = u.inverse().transpose();
    result.det = result.matrix.determinant();
    result.step_error = std::abs(result.det - u_half.inverse().transpose().determinant());
    return result;
}

HolonomyResult transport(const PoissonStructure& pi, const SubmanifoldSpec& n,
                         const CotangentPath& a, int steps, double tol) {
    return transport(pi, n, a, default_extension(a), steps, tol);
}

HolonomyIdentityReport verify_holonomy_identity(const PoissonStructure& pi,
                                                const SubmanifoldSpec& n,
                                                const VolumeDensity& rho_ambient,
                                                const VolumeDensity& rho_induced,
                                                const CotangentPath& a,
                                                const PathExtension& extension, int steps,
                                                int panels, int order) {
    const VectorFieldAlongMap rel = relative_modular_vf(pi, rho_ambient, rho_induced, n);
    const HolonomyResult hol = extension.empty() ? transport(pi, n, a, steps)
                                                 : transport(pi, n, a, extension, steps);

    // Re-express the path over the induced chart (the covector keeps its
    // ambient indexing) so it can be paired with the relative field.
    const Chart induced = n.induced_chart();
    const auto tang = n.tangential_indices();
    std::optional<CotangentPath> restricted;
    for (const auto& seg : a.segments()) {
        std::vector<Expr> base;
        base.reserve(tang.size());
        for (int i : tang) base.push_back(seg.base[i]);
        CotangentPath leg(induced, base, seg.covector,
                          a.segments().size() == 1 && a.is_loop());
        restricted = restricted ? concat(*restricted, leg, 1e-6) : leg;
    }
    const QuadratureResult q = path_integral(rel, *restricted, panels, order);

    // Ratio of the normal volumes induced by the two densities at an endpoint.
    const auto normal_volume = [&](std::size_t segment, double s) {
        const PathSample smp = sample_path(a, segment, s);
        Point p;
        for (std::size_t i = 0; i < n.ambient.dim(); ++i) p[n.ambient.coords[i]] = smp.base[i];
        return evaluate(rho_ambient.rho, p) / evaluate(rho_induced.rho, p);
    };

    HolonomyIdentityReport report;
    report.det_h = hol.det;
    report.integral = q.value;
    report.predicted_det = std::exp(q.value) * normal_volume(0, 0.0) /
                           normal_volume(a.segments().size() - 1, 1.0);
    report.relative_residual = std::abs(report.det_h - report.predicted_det) /
                               std::abs(report.predicted_det);
    report.loop = a.is_loop();
    report.step_error = hol.step_error;
    report.quadrature_error = q.error_estimate;
    return report;
}

bool conormal_abelian_check(const PoissonStructure& pi, const SubmanifoldSpec& n,
                            const ZeroTestOptions& opt) {
    validate_submanifold(pi, n, opt);
    const Chart induced = n.induced_chart();
    const auto zeros = n.zero_section();
    const auto trans = n.transverse_indices();
    for (std::size_t i = 0; i < trans.size(); ++i) {
        for (std::size_t j = i + 1; j < trans.size(); ++j) {
            const auto bracket = bracket_1forms(pi, coordinate_differential(n.ambient, trans[i]),
                                                coordinate_differential(n.ambient, trans[j]))
                                     .dense_components();
            for (int m : trans)
                if (!is_zero(substitute(bracket[m], zeros), induced, opt)) return false;
        }
    }
    return true;
}

}  // namespace poismod
