#pragma once

#include <Eigen/Dense>

#include "poismod/paths.hpp"

namespace poismod {

struct NotPoissonSubmanifold : InputError {
    using InputError::InputError;
};

// The bracket of the transported covector with a conormal generator acquired
// tangential components along the path, so the transport connection is not
// defined for this input.
struct ConormalLeak : InputError {
    using InputError::InputError;
};

// A submanifold cut out as the common zero set of some of the coordinates.
struct SubmanifoldSpec {
    Chart ambient;
    std::vector<std::string> transverse;  // coordinates set to zero on N

    std::vector<int> transverse_indices() const;
    std::vector<int> tangential_indices() const;
    // Chart of the remaining coordinates; the ambient guard is restricted.
    Chart induced_chart() const;
    // Replacement table sending every transverse coordinate to zero.
    std::map<std::string, Expr> zero_section() const;
};

// Checks that every bivector component pairing a transverse index with any
// other index vanishes on the zero set; throws NotPoissonSubmanifold naming
// the offending component otherwise.
void validate_submanifold(const PoissonStructure& pi, const SubmanifoldSpec& n,
                          const ZeroTestOptions& opt = {});

// The structure induced on the zero set: tangential components restricted,
// Jacobi revalidated.
PoissonStructure restrict_poisson(const PoissonStructure& pi, const SubmanifoldSpec& n,
                                  const ZeroTestOptions& opt = {});

// Transverse coordinates -> 0, tangential coordinates -> themselves.
SmoothMap inclusion_map(const SubmanifoldSpec& n);

// The ambient modular field restricted to N minus the tangential lift of the
// induced modular field, as a field along the inclusion. Zero iff the two
// modular fields agree along N.
VectorFieldAlongMap relative_modular_vf(const PoissonStructure& pi,
                                        const VolumeDensity& rho_ambient,
                                        const VolumeDensity& rho_induced,
                                        const SubmanifoldSpec& n,
                                        const ZeroTestOptions& opt = {});

// Time-dependent 1-form extending the path covector off N: one expression per
// ambient coordinate, written in the ambient coordinates and t, one block per
// path segment.
using PathExtension = std::vector<std::vector<Expr>>;

struct HolonomyResult {
    Eigen::MatrixXd matrix;   // transport on the normal frame
    double det = 1.0;
    double step_error = 0.0;  // |det - det recomputed at half the step count|
    double max_leak = 0.0;    // worst tangential bracket component seen
};

// Parallel transport of the normal frame along the path: the connection
// coefficients are the conormal components of the bracket of the extended
// covector with each conormal generator, restricted to N; the frame ODE is
// integrated by RK4 and the normal-frame transport is the inverse transpose
// of the conormal transport.
HolonomyResult transport(const PoissonStructure& pi, const SubmanifoldSpec& n,
                         const CotangentPath& a, const PathExtension& extension,
                         int steps = 1000, double tol = 1e-6);

// Convenience: extends the covector off N by its own values (independent of
// the ambient coordinates).
HolonomyResult transport(const PoissonStructure& pi, const SubmanifoldSpec& n,
                         const CotangentPath& a, int steps = 1000, double tol = 1e-6);

struct HolonomyIdentityReport {
    double det_h = 1.0;
    double integral = 0.0;       // path integral of the relative modular field
    double predicted_det = 1.0;  // exp(integral) times the endpoint volume ratio
    double relative_residual = 0.0;
    bool loop = false;
    double step_error = 0.0;
    double quadrature_error = 0.0;
};

// Compares the transported determinant against the exponential of the path
// integral of the relative modular representative, the two sides computed by
// independent code paths (ODE transport vs quadrature). For open paths the
// prediction carries the ratio of the induced normal volumes at the endpoints.
HolonomyIdentityReport verify_holonomy_identity(const PoissonStructure& pi,
                                                const SubmanifoldSpec& n,
                                                const VolumeDensity& rho_ambient,
                                                const VolumeDensity& rho_induced,
                                                const CotangentPath& a,
                                                const PathExtension& extension = {},
                                                int steps = 1000, int panels = 64,
                                                int order = 8);

// True iff the bracket of any two conormal generators has no conormal
// component on N, i.e. the conormal directions form commuting fibres there.
bool conormal_abelian_check(const PoissonStructure& pi, const SubmanifoldSpec& n,
                            const ZeroTestOptions& opt = {});

}  // namespace poismod
