#pragma once

#include <functional>
#include <optional>
#include <tuple>

#include "poismod/mvf.hpp"
#include "poismod/polycanon.hpp"

namespace poismod {

// Bivector failed the Jacobi identity; `witness` is a sample point where the
// obstruction [pi,pi] is visibly nonzero (empty for exact structure-constant
// failures, which need no point).
struct JacobiFailed : InputError {
    Point witness;
    JacobiFailed(const std::string& msg, Point w) : InputError(msg), witness(std::move(w)) {}
};

// The second-order part of the modular operator failed the zero test; this
// signals corrupted input rather than a numerical issue with valid data.
struct SecondOrderResidue : NumericalError {
    using NumericalError::NumericalError;
};

// A validated Poisson bivector. Construct through make_poisson.
class PoissonStructure {
public:
    const Chart& chart() const { return bivector_.chart(); }
    const MultiVectorField& bivector() const { return bivector_; }
    // Worst relative residual of [pi,pi] observed during validation.
    double jacobi_residual() const { return jacobi_residual_; }

private:
    friend PoissonStructure make_poisson(const MultiVectorField&, const ZeroTestOptions&);
    PoissonStructure(MultiVectorField b, double r)
        : bivector_(std::move(b)), jacobi_residual_(r) {}
    MultiVectorField bivector_;
    double jacobi_residual_;
};

// Validates the Jacobi identity [B,B] = 0 numerically; throws JacobiFailed
// with a witness point otherwise.
PoissonStructure make_poisson(const MultiVectorField& b, const ZeroTestOptions& opt = {});

// A volume density rho, representing the form rho dx^1 ^ ... ^ dx^n.
struct VolumeDensity {
    Chart chart;
    Expr rho;
};

// Checks positivity of rho at sample points.
VolumeDensity make_volume(Chart chart, Expr rho, const ZeroTestOptions& opt = {});

// {f,g} = pi(df,dg).
Expr poisson_bracket(const PoissonStructure& pi, const Expr& f, const Expr& g);

// X_h = {h,.}, i.e. X_h^j = sum_i pi^{ij} d_i h.
MultiVectorField hamiltonian_vf(const PoissonStructure& pi, const Expr& h);

// pi-sharp: <beta, sharp(alpha)> = pi(alpha, beta).
MultiVectorField sharp(const PoissonStructure& pi, const DifferentialForm& alpha);

// Koszul bracket of 1-forms:
// [a,b] = L_{sharp a} b - L_{sharp b} a - d(pi(a,b)); satisfies [df,dg] = d{f,g}.
DifferentialForm bracket_1forms(const PoissonStructure& pi, const DifferentialForm& a,
                                const DifferentialForm& b);

// Modular vector field of (pi, mu): the first-order part of
// f -> (1/rho) sum_j d_j(rho X_f^j). The second-order part must vanish by
// antisymmetry; it is spot-checked on quadratics and SecondOrderResidue is
// thrown if it does not pass the zero test.
MultiVectorField modular_vf(const PoissonStructure& pi, const VolumeDensity& mu,
                            const ZeroTestOptions& opt = {});

// Poisson coboundary d_pi A = [pi, A].
MultiVectorField d_pi(const PoissonStructure& pi, const MultiVectorField& a);

// Structure constants c^k_{ij} of a finite-dimensional Lie algebra, with exact
// antisymmetry and Jacobi validation.
class LieAlgebraData {
public:
    // entries: (i, j, k, c^k_{ij}); the antisymmetric partner is filled in.
    LieAlgebraData(int dim, const std::vector<std::tuple<int, int, int, Rational>>& entries);

    int dim() const { return dim_; }
    const Rational& c(int i, int j, int k) const;  // c^k_{ij}

private:
    int dim_;
    std::vector<Rational> c_;  // dense, c_[((i*d)+j)*d+k]
};

// Lie-Poisson structure on the dual: {x_i, x_j} = sum_k c^k_{ij} x_k over the
// given chart (one coordinate per basis covector).
PoissonStructure linear_poisson(const LieAlgebraData& g, const Chart& dual_chart);

// Trace of the adjoint representation: component i is sum_j c^j_{ij}.
// The modular field of the Lie-Poisson structure with Lebesgue volume is the
// constant field with exactly these components.
std::vector<Rational> adjoint_character(const LieAlgebraData& g);

// Outcome of a bounded-degree witness search: `witness` holds h when the exact
// linear solve succeeded; absence is only conclusive up to `degree_cap`.
struct WitnessResult {
    std::optional<Expr> witness;
    int degree_cap = 0;
};

// Exact search for a polynomial h, 1 <= total degree <= degree_cap, with
// op(h) == target componentwise, where op must be linear in h. The system is
// canonicalized exactly (see polycanon) and solved by rational elimination, so
// an empty result is a proof of absence within the ansatz space.
WitnessResult solve_linear_witness(const Chart& chart, int degree_cap,
                                   const std::function<std::vector<Expr>(const Expr&)>& op,
                                   const std::vector<Expr>& target);

// Witness search for X = X_h.
WitnessResult hamiltonian_witness(const PoissonStructure& pi, const MultiVectorField& x,
                                  int degree_cap = 5);

}  // namespace poismod
