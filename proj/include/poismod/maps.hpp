#pragma once

#include "poismod/poisson.hpp"

namespace poismod {

// The target bivector does not match the bracket of the map components, so
// map-level modular constructions are undefined for this input.
struct NotPoissonMap : InputError {
    using InputError::InputError;
};

// A coordinate map between charts: one component expression per target
// coordinate, written over the source coordinates.
class SmoothMap {
public:
    SmoothMap(Chart source, Chart target, std::vector<Expr> components);

    const Chart& source() const { return source_; }
    const Chart& target() const { return target_; }
    const std::vector<Expr>& components() const { return components_; }

    // d(component a)/d(source coordinate i), precomputed at construction.
    const Expr& jacobian(int a, int i) const { return jac_[a][i]; }

private:
    Chart source_;
    Chart target_;
    std::vector<Expr> components_;
    std::vector<std::vector<Expr>> jac_;
};

// The identity map of a chart.
SmoothMap identity_map(const Chart& chart);

// psi after phi (phi is applied first); phi's target chart must equal psi's source chart.
SmoothMap compose(const SmoothMap& phi, const SmoothMap& psi);

// f composed with phi, for a function written over the target coordinates.
Expr pullback(const SmoothMap& phi, const Expr& f);

// Pullback of a form: coefficients composed with phi, each coordinate
// differential replaced by the differential of the matching component.
DifferentialForm pullback(const SmoothMap& phi, const DifferentialForm& alpha);

// A vector field along a map: components over the SOURCE coordinates, valued
// in target tangent directions (one component per target coordinate).
struct VectorFieldAlongMap {
    SmoothMap map;
    std::vector<Expr> components;
};

// Componentwise sums; both operands must live along the same map.
VectorFieldAlongMap operator+(const VectorFieldAlongMap& a, const VectorFieldAlongMap& b);
VectorFieldAlongMap operator-(const VectorFieldAlongMap& a, const VectorFieldAlongMap& b);
VectorFieldAlongMap operator-(const VectorFieldAlongMap& a);

bool is_zero(const VectorFieldAlongMap& p, const ZeroTestOptions& opt = {});
double max_relative_residual(const VectorFieldAlongMap& p, const ZeroTestOptions& opt = {});
std::string to_string(const VectorFieldAlongMap& p);

// The differential of the map applied to a degree-1 field on the source.
VectorFieldAlongMap pushforward(const SmoothMap& phi, const MultiVectorField& x);

// Componentwise defect (target bivector component ab) o phi - {phi^a, phi^b},
// reported as the worst relative residual over sample points of the source.
double poisson_map_residual(const SmoothMap& phi, const PoissonStructure& pi_src,
                            const PoissonStructure& pi_tgt, const ZeroTestOptions& opt = {});

// True iff every component of the defect passes the zero test, i.e. phi
// intertwines the two brackets.
bool check_poisson_map(const SmoothMap& phi, const PoissonStructure& pi_src,
                       const PoissonStructure& pi_tgt, const ZeroTestOptions& opt = {});

// Anchor of a pulled-back 1-form: sharp of phi^* alpha with respect to the
// source structure, a vector field on the source.
MultiVectorField pullback_anchor(const SmoothMap& phi, const PoissonStructure& pi_src,
                                 const DifferentialForm& alpha);

// Degree-0 differential of the pullback complex, evaluated against alpha:
// the anchor of phi^* alpha applied to f.
Expr algebroid_diff0(const SmoothMap& phi, const PoissonStructure& pi_src, const Expr& f,
                     const DifferentialForm& alpha);

// Degree-1 differential of the pullback complex evaluated on a pair of target
// 1-forms:
//   dP(alpha,beta) = anchor(phi^*alpha)<P, beta o phi>
//                  - anchor(phi^*beta)<P, alpha o phi>
//                  - <P, [alpha,beta]_tgt o phi>.
// Vanishing for every coordinate-generator pair certifies that P is closed.
Expr algebroid_diff1(const SmoothMap& phi, const PoissonStructure& pi_src,
                     const PoissonStructure& pi_tgt, const VectorFieldAlongMap& p,
                     const DifferentialForm& alpha, const DifferentialForm& beta);

// d phi . X_mu - X_nu o phi: compares the two modular fields along the map.
// Zero iff the modular fields are phi-related. Throws NotPoissonMap when the
// map fails the bracket-compatibility test.
VectorFieldAlongMap map_modular_vf(const SmoothMap& phi, const PoissonStructure& pi_src,
                                   const PoissonStructure& pi_tgt, const VolumeDensity& rho_src,
                                   const VolumeDensity& rho_tgt, const ZeroTestOptions& opt = {});

// Residual of the chain rule for modular fields along psi o phi:
//   (modular field of psi o phi) - d psi . (modular field of phi)
//                                - (modular field of psi) o phi.
// Passes the zero test whenever both maps are Poisson.
VectorFieldAlongMap check_composition(const SmoothMap& phi, const SmoothMap& psi,
                                      const PoissonStructure& pi_m, const PoissonStructure& pi_n,
                                      const PoissonStructure& pi_q, const VolumeDensity& rho_m,
                                      const VolumeDensity& rho_n, const VolumeDensity& rho_q,
                                      const ZeroTestOptions& opt = {});

// Bounded-degree search for f with -(d phi . X_f) = p, certifying that p is a
// coboundary of the pullback complex; absence is conclusive only up to the cap.
WitnessResult map_hamiltonian_witness(const SmoothMap& phi, const PoissonStructure& pi_src,
                                      const VectorFieldAlongMap& p, int degree_cap = 5);

}  // namespace poismod
