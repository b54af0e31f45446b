#pragma once

#include <optional>

#include "poismod/paths.hpp"

namespace poismod {

struct DegenerateFrame : InputError {
    using InputError::InputError;
};

struct NonPositiveDensity : InputError {
    using InputError::InputError;
};

struct NonInvariantDensity : InputError {
    using InputError::InputError;
};

struct RankDeficientLevel : InputError {
    using InputError::InputError;
};

// An infinitesimal group action on a Poisson chart together with its quotient
// data: generators for each basis element of the algebra, the invariant-
// coordinate projection, and the structure carried by the quotient chart.
// The pairing is the volume of the generator frame against the fiberwise
// form, so it normalizes away in every construction below.
struct GroupAction {
    Chart ambient;
    LieAlgebraData algebra;
    std::vector<std::vector<Expr>> generators;  // one component block per basis element
    Expr pairing;                               // default 1
    SmoothMap quotient_map;
    PoissonStructure quotient_poisson;
};

struct ActionValidation {
    bool valid = true;
    std::map<std::string, double> residuals;  // worst residual per invariant
    std::string failure;                      // first failed invariant, empty when valid
    Point witness;                            // sample point exhibiting the failure
};

// Checks the five action invariants: generators realize the structure
// constants ([xi_i, xi_j] = -sum_k c^k_ij xi_k), the bivector and the
// quotient map are invariant, the quotient map intertwines the brackets, and
// the generators stay pointwise independent on the sampling box.
ActionValidation validate_action(const GroupAction& act, const PoissonStructure& pi,
                                 const ZeroTestOptions& opt = {});

// Density of the volume assembled from an invariant fiberwise form and a
// quotient volume: rho = (rho_nu o phi) * det(J J^T) / det[P | J^T], with P
// the generator columns and J the quotient Jacobian. Independent of the
// fiberwise normalization and of the choice of horizontal complement.
VolumeDensity quotient_volume(const GroupAction& act, const VolumeDensity& nu,
                              const ZeroTestOptions& opt = {});

struct ActionModularReport {
    VolumeDensity volume;             // the assembled ambient volume
    MultiVectorField field;           // its modular vector field
    double projectability_residual = 0.0;
    double relatedness_residual = 0.0;
    bool projectable = false;
    bool related = false;
};

// Modular representative of the action: the modular field of the assembled
// volume, with numeric checks that it is projectable and pushes onto the
// quotient modular field.
ActionModularReport action_modular_rep(const GroupAction& act, const PoissonStructure& pi,
                                       const VolumeDensity& nu, const ZeroTestOptions& opt = {});

// Pairings of a moment map with the algebra basis, over the ambient chart.
struct MomentMap {
    std::vector<Expr> components;
};

// True iff every generator equals the sharp of the differential of its moment
// component.
bool check_moment(const GroupAction& act, const MomentMap& kappa, const PoissonStructure& pi,
                  const ZeroTestOptions& opt = {});

struct MomentModularReport {
    std::vector<Expr> residual;       // d kappa . X_mu minus the dual modular field, along kappa
    std::vector<Rational> theta0;     // adjoint character of the algebra
    bool constant_residual = false;   // every component an exact rational constant
    // Bounded-degree exactness certificate, attempted when the algebra is
    // unimodular (the residual must then be a coboundary along kappa).
    std::optional<WitnessResult> exactness;
};

// Compares d kappa . X_mu against the modular field of the dual Lie-Poisson
// structure with Lebesgue volume (the constant adjoint character). Requires
// the density to be invariant under the moment flows (NonInvariantDensity)
// and the moment components to realize the structure constants.
MomentModularReport moment_modular_residual(const MomentMap& kappa, const PoissonStructure& pi,
                                            const VolumeDensity& rho_invariant,
                                            const LieAlgebraData& g,
                                            const ZeroTestOptions& opt = {}, int degree_cap = 5);

struct HamQuotientReport {
    Expr density;                      // density of the level-adapted volume
    double tangency_residual = 0.0;    // max |d kappa . X| over level samples
    double relatedness_residual = 0.0; // max |X(phi^a) - X_sigma^a o phi| over level samples
    double level_residual = 0.0;       // worst |kappa - level| after projection
    int points = 0;                    // level-set samples used
};

// Verifies the reduced-space modular theorem on a moment level set: builds
// the volume from the fiberwise form, the pulled-back reduced volume tau and
// the moment differentials; its modular field must be tangent to the level
// set and push onto the modular field of tau wedge d(kappa-on-quotient).
// kappa_quotient expresses each moment component over the quotient chart.
HamQuotientReport ham_quotient_verify(const GroupAction& act, const PoissonStructure& pi,
                                      const MomentMap& kappa,
                                      const std::vector<Expr>& kappa_quotient,
                                      const DifferentialForm& tau,
                                      const std::vector<double>& level, int min_points = 200,
                                      const ZeroTestOptions& opt = {});

}  // namespace poismod
