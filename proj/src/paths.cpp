#include "poismod/paths.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace poismod {

namespace {

constexpr const char* kParam = "t";

void require_param_only(const Expr& e, const char* what) {
    for (const auto& v : free_variables(e))
        if (v != kParam)
            throw InputError(std::string(what) + " must depend on '" + kParam +
                             "' only; found '" + v + "'");
}

PathSegment make_segment(std::vector<Expr> base, std::vector<Expr> covector) {
    PathSegment seg{std::move(base), {}, std::move(covector)};
    seg.velocity.reserve(seg.base.size());
    for (const auto& b : seg.base) {
        require_param_only(b, "path base component");
        seg.velocity.push_back(differentiate(b, kParam));
    }
    for (const auto& c : seg.covector) require_param_only(c, "path covector component");
    return seg;
}

std::vector<double> eval_all(const std::vector<Expr>& es, double s) {
    Point at{{kParam, s}};
    std::vector<double> out;
    out.reserve(es.size());
    for (const auto& e : es) out.push_back(evaluate(e, at));
    return out;
}

Point to_point(const Chart& chart, const std::vector<double>& vals) {
    Point p;
    for (std::size_t i = 0; i < chart.dim(); ++i) p[chart.coords[i]] = vals[i];
    return p;
}

// The bivector as a numeric matrix Pi(i,j) at a point.
Eigen::MatrixXd bivector_matrix(const PoissonStructure& pi, const Point& at) {
    const int n = static_cast<int>(pi.chart().dim());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [idx, c] : pi.bivector().terms()) {
        const double v = evaluate(c, at);
        m(idx[0], idx[1]) = v;
        m(idx[1], idx[0]) = -v;
    }
    return m;
}

// sharp(alpha)^k = sum_i Pi(i,k) alpha_i.
Eigen::VectorXd apply_sharp(const Eigen::MatrixXd& m, const Eigen::VectorXd& alpha) {
    return m.transpose() * alpha;
}

bool points_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

struct GaussRule {
    std::vector<double> nodes;    // on [-1,1]
    std::vector<double> weights;
};

GaussRule gauss_rule(int order) {
    switch (order) {
        case 2:
            return {{-0.5773502691896257, 0.5773502691896257}, {1.0, 1.0}};
        case 4:
            return {{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                     0.8611363115940526},
                    {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                     0.3478548451374538}};
        case 8:
            return {{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                     -0.1834346424956498, 0.1834346424956498, 0.5255324099163290,
                     0.7966664774136267, 0.9602898564975363},
                    {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                     0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                     0.2223810344533745, 0.1012285362903763}};
        default:
            throw InputError("unsupported quadrature order " + std::to_string(order) +
                             " (supported: 2, 4, 8)");
    }
}

// Composite rule for integrand f over [0,1].
double composite_gauss(const std::function<double(double)>& f, int panels, const GaussRule& rule) {
    const double h = 1.0 / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k)
            acc += rule.weights[k] * f(mid + 0.5 * h * rule.nodes[k]);
    }
    return acc * 0.5 * h;
}

// Integrand <X(gamma(s)), a(s)> for one leg, with the field components given
// as expressions over `chart` evaluated at the base point.
QuadratureResult integrate_path(const CotangentPath& a, const Chart& chart,
                                const std::vector<Expr>& field, int panels, int order) {
    if (panels < 1) throw InputError("panel count must be positive");
    const GaussRule rule = gauss_rule(order);
    auto whole = [&](int pc) {
        double acc = 0.0;
        for (std::size_t leg = 0; leg < a.segments().size(); ++leg) {
            const PathSegment& seg = a.segments()[leg];
            auto f = [&](double s) {
                const Point at = to_point(chart, eval_all(seg.base, s));
                const std::vector<double> alpha = eval_all(seg.covector, s);
                double sum = 0.0;
                for (std::size_t k = 0; k < field.size(); ++k)
                    sum += evaluate(field[k], at) * alpha[k];
                return sum;
            };
            acc += composite_gauss(f, pc, rule);
        }
        return acc;
    };
    const double full = whole(panels);
    const double coarse = whole(std::max(1, panels / 2));
    return {full, std::abs(full - coarse)};
}

}  // namespace

CotangentPath::CotangentPath(Chart chart, std::vector<Expr> base, std::vector<Expr> covector,
                             bool is_loop)
    : chart_(std::move(chart)), is_loop_(is_loop) {
    if (base.size() != chart_.dim())
        throw InputError("path base has " + std::to_string(base.size()) +
                         " components over a chart of dimension " + std::to_string(chart_.dim()));
    if (covector.empty()) throw InputError("path covector is empty");
    segments_.push_back(make_segment(std::move(base), std::move(covector)));
}

CotangentPath::CotangentPath(Chart chart, std::vector<PathSegment> segments, bool is_loop)
    : chart_(std::move(chart)), segments_(std::move(segments)), is_loop_(is_loop) {}

PathSample sample_path(const CotangentPath& path, std::size_t segment, double s) {
    const PathSegment& seg = path.segments().at(segment);
    return {eval_all(seg.base, s), eval_all(seg.velocity, s), eval_all(seg.covector, s)};
}

Point base_point(const CotangentPath& path, std::size_t segment, double s) {
    const PathSegment& seg = path.segments().at(segment);
    return to_point(path.chart(), eval_all(seg.base, s));
}

bool validate(const CotangentPath& a, const PoissonStructure& pi, int grid, double tol) {
    if (!charts_equal(a.chart(), pi.chart()))
        throw InputError("path chart does not match the structure chart");
    if (a.covector_dim() != a.chart().dim())
        throw InputError("path covector dimension does not match the chart");
    if (grid < 1) throw InputError("grid must be positive");
    const int n = static_cast<int>(a.chart().dim());
    for (std::size_t leg = 0; leg < a.segments().size(); ++leg) {
        for (int k = 0; k <= grid; ++k) {
            const double s = static_cast<double>(k) / grid;
            const PathSample sm = sample_path(a, leg, s);
            const Eigen::MatrixXd m = bivector_matrix(pi, to_point(a.chart(), sm.base));
            const Eigen::VectorXd alpha =
                Eigen::Map<const Eigen::VectorXd>(sm.covector.data(), n);
            const Eigen::VectorXd sh = apply_sharp(m, alpha);
            for (int i = 0; i < n; ++i)
                if (std::abs(sh(i) - sm.velocity[i]) > tol) return false;
        }
        if (leg + 1 < a.segments().size() &&
            !points_close(sample_path(a, leg, 1.0).base, sample_path(a, leg + 1, 0.0).base, tol))
            return false;
    }
    if (a.is_loop() &&
        !points_close(sample_path(a, 0, 0.0).base,
                      sample_path(a, a.segments().size() - 1, 1.0).base, tol))
        return false;
    return true;
}

bool validate_pullback(const CotangentPath& a, const SmoothMap& phi,
                       const PoissonStructure& pi_src, int grid, double tol) {
    if (!charts_equal(a.chart(), phi.source()))
        throw InputError("path chart does not match the map source");
    if (!charts_equal(pi_src.chart(), phi.source()))
        throw InputError("structure chart does not match the map source");
    if (a.covector_dim() != phi.target().dim())
        throw InputError("path covector dimension does not match the map target");
    if (grid < 1) throw InputError("grid must be positive");
    const int m = static_cast<int>(phi.source().dim());
    const int n = static_cast<int>(phi.target().dim());
    for (std::size_t leg = 0; leg < a.segments().size(); ++leg) {
        for (int k = 0; k <= grid; ++k) {
            const double s = static_cast<double>(k) / grid;
            const PathSample sm = sample_path(a, leg, s);
            const Point at = to_point(a.chart(), sm.base);
            // pulled-back covector: (J^T alpha)_i = sum_a d(phi^a)/dx_i alpha_a
            Eigen::VectorXd pulled = Eigen::VectorXd::Zero(m);
            for (int i = 0; i < m; ++i)
                for (int aa = 0; aa < n; ++aa)
                    pulled(i) += evaluate(phi.jacobian(aa, i), at) * sm.covector[aa];
            const Eigen::VectorXd sh = apply_sharp(bivector_matrix(pi_src, at), pulled);
            for (int i = 0; i < m; ++i)
                if (std::abs(sh(i) - sm.velocity[i]) > tol) return false;
        }
        if (leg + 1 < a.segments().size() &&
            !points_close(sample_path(a, leg, 1.0).base, sample_path(a, leg + 1, 0.0).base, tol))
            return false;
    }
    if (a.is_loop() &&
        !points_close(sample_path(a, 0, 0.0).base,
                      sample_path(a, a.segments().size() - 1, 1.0).base, tol))
        return false;
    return true;
}

QuadratureResult path_integral(const MultiVectorField& x, const CotangentPath& a, int panels,
                               int order) {
    if (x.degree() != 1) throw InputError("path integral requires a degree-1 field");
    if (!charts_equal(x.chart(), a.chart()))
        throw InputError("field chart does not match the path chart");
    if (a.covector_dim() != a.chart().dim())
        throw InputError("path covector dimension does not match the chart");
    return integrate_path(a, a.chart(), x.dense_components(), panels, order);
}

QuadratureResult path_integral(const VectorFieldAlongMap& x, const CotangentPath& a, int panels,
                               int order) {
    if (!charts_equal(x.map.source(), a.chart()))
        throw InputError("path chart does not match the map source");
    if (a.covector_dim() != x.map.target().dim())
        throw InputError("path covector dimension does not match the map target");
    return integrate_path(a, x.map.source(), x.components, panels, order);
}

CharacterResult modular_character(const SmoothMap& phi, const PoissonStructure& pi_src,
                                  const PoissonStructure& pi_tgt, const VolumeDensity& rho_src,
                                  const VolumeDensity& rho_tgt, const CotangentPath& a,
                                  int panels, int order) {
    const VectorFieldAlongMap v = map_modular_vf(phi, pi_src, pi_tgt, rho_src, rho_tgt);
    const QuadratureResult q = path_integral(v, a, panels, order);
    return {std::exp(2.0 * q.value), q.value, q.error_estimate};
}

CotangentPath concat(const CotangentPath& a, const CotangentPath& b, double tol) {
    if (!charts_equal(a.chart(), b.chart())) throw InputError("paths live on different charts");
    if (a.covector_dim() != b.covector_dim())
        throw InputError("paths carry covectors of different dimensions");
    const std::vector<double> tail = sample_path(a, a.segments().size() - 1, 1.0).base;
    const std::vector<double> head = sample_path(b, 0, 0.0).base;
    if (!points_close(tail, head, tol)) throw InputError("path endpoints do not match");
    std::vector<PathSegment> segs = a.segments();
    segs.insert(segs.end(), b.segments().begin(), b.segments().end());
    const bool loop = points_close(sample_path(a, 0, 0.0).base,
                                   sample_path(b, b.segments().size() - 1, 1.0).base, tol);
    return CotangentPath(a.chart(), std::move(segs), loop);
}

CotangentPath reverse(const CotangentPath& a) {
    const std::map<std::string, Expr> flip{
        {kParam, Expr::integer(1) - Expr::variable(kParam)}};
    std::vector<PathSegment> segs;
    segs.reserve(a.segments().size());
    for (auto it = a.segments().rbegin(); it != a.segments().rend(); ++it) {
        std::vector<Expr> base, covector;
        for (const auto& e : it->base) base.push_back(substitute(e, flip));
        for (const auto& e : it->covector) covector.push_back(-substitute(e, flip));
        segs.push_back(make_segment(std::move(base), std::move(covector)));
    }
    return CotangentPath(a.chart(), std::move(segs), a.is_loop());
}

}  // namespace poismod
