#pragma once

#include "poismod/maps.hpp"

namespace poismod {

// One leg of a (possibly piecewise) path; all expressions are closed-form in
// the parameter t, which runs over [0,1] on every leg.
struct PathSegment {
    std::vector<Expr> base;      // position components
    std::vector<Expr> velocity;  // d(base)/dt, cached at construction
    std::vector<Expr> covector;  // covector components
};

// A base curve with a covector along it. For ordinary paths the covector is
// indexed by the chart coordinates; paths fed to along-map operations index it
// by the target coordinates of the map instead, so its dimension may differ
// from the chart's. Piecewise paths built by concat keep one segment per leg,
// each on its own unit interval, and integrals add over the legs.
class CotangentPath {
public:
    CotangentPath(Chart chart, std::vector<Expr> base, std::vector<Expr> covector,
                  bool is_loop = false);

    const Chart& chart() const { return chart_; }
    const std::vector<PathSegment>& segments() const { return segments_; }
    bool is_loop() const { return is_loop_; }
    std::size_t covector_dim() const { return segments_.front().covector.size(); }

    friend CotangentPath concat(const CotangentPath& a, const CotangentPath& b, double tol);
    friend CotangentPath reverse(const CotangentPath& a);

private:
    CotangentPath(Chart chart, std::vector<PathSegment> segments, bool is_loop);

    Chart chart_;
    std::vector<PathSegment> segments_;
    bool is_loop_;
};

// Numeric snapshot of one leg at local parameter s in [0,1].
struct PathSample {
    std::vector<double> base;
    std::vector<double> velocity;
    std::vector<double> covector;
};
PathSample sample_path(const CotangentPath& path, std::size_t segment, double s);

// Position of one leg as an evaluation point for chart expressions.
Point base_point(const CotangentPath& path, std::size_t segment, double s);

// True iff sharp(a(t)) matches the base velocity on the time grid of every
// leg, consecutive legs join continuously, and a loop closes up.
bool validate(const CotangentPath& a, const PoissonStructure& pi, int grid = 64,
              double tol = 1e-7);

// Along-map variant: the covector rides over the map's target, and the
// compatibility condition reads sharp(pullback of a(t)) = base velocity.
bool validate_pullback(const CotangentPath& a, const SmoothMap& phi,
                       const PoissonStructure& pi_src, int grid = 64, double tol = 1e-7);

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;  // |value - value at half the panel count|
};

// Composite Gauss-Legendre integral of <X(gamma(t)), a(t)> dt, panel-per-leg
// so corners introduced by concat are never smoothed over.
// Supported orders: 2, 4, 8.
QuadratureResult path_integral(const MultiVectorField& x, const CotangentPath& a,
                               int panels = 64, int order = 8);
QuadratureResult path_integral(const VectorFieldAlongMap& x, const CotangentPath& a,
                               int panels = 64, int order = 8);

struct CharacterResult {
    double character = 1.0;
    double integral = 0.0;
    double error_estimate = 0.0;
};

// exp(2 * integral of the map modular field along a); multiplicative under
// concatenation and reciprocal under reversal.
CharacterResult modular_character(const SmoothMap& phi, const PoissonStructure& pi_src,
                                  const PoissonStructure& pi_tgt, const VolumeDensity& rho_src,
                                  const VolumeDensity& rho_tgt, const CotangentPath& a,
                                  int panels = 64, int order = 8);

// Piecewise concatenation (a first); endpoints must match within tol.
CotangentPath concat(const CotangentPath& a, const CotangentPath& b, double tol = 1e-8);

// Orientation reversal: base time-reversed, covector time-reversed and negated.
CotangentPath reverse(const CotangentPath& a);

}  // namespace poismod
