#pragma once

#include <map>
#include <vector>

#include "poismod/expr.hpp"

namespace poismod {

// Strictly increasing tuple of coordinate indices; the empty tuple indexes degree 0.
using IndexTuple = std::vector<int>;

namespace detail {

// Sorts `idx` in place and returns the permutation sign (+1 or -1),
// or 0 if an index repeats.
int normalize_tuple(IndexTuple& idx);

// Merges two increasing tuples into one increasing tuple, returning the sign of
// the interleaving permutation, or 0 if they share an index.
int merge_tuples(const IndexTuple& a, const IndexTuple& b, IndexTuple& out);

// All strictly increasing k-tuples drawn from {0,...,n-1}.
std::vector<IndexTuple> increasing_tuples(int n, int k);

}  // namespace detail

// A degree-k multivector field on a chart, stored sparsely on strictly
// increasing index tuples; antisymmetry is implicit in the storage.
class MultiVectorField {
public:
    MultiVectorField(Chart chart, int degree);

    static MultiVectorField function(Chart chart, Expr f);             // degree 0
    static MultiVectorField vector(Chart chart, std::vector<Expr> c);  // degree 1

    const Chart& chart() const { return chart_; }
    int degree() const { return degree_; }

    // Component for an arbitrary tuple; sorts and applies the permutation sign.
    Expr component(IndexTuple idx) const;
    // Adds `value` to the component at `idx` (normalized the same way).
    void add_term(IndexTuple idx, const Expr& value);

    // Stored terms, increasing tuples only, zero terms dropped.
    const std::map<IndexTuple, Expr>& terms() const { return terms_; }

    // Degree-1 convenience: the n components as a dense vector.
    std::vector<Expr> dense_components() const;

    MultiVectorField operator+(const MultiVectorField& other) const;
    MultiVectorField operator-(const MultiVectorField& other) const;
    MultiVectorField operator-() const;
    MultiVectorField scaled(const Expr& factor) const;

private:
    Chart chart_;
    int degree_;
    std::map<IndexTuple, Expr> terms_;
};

// A degree-k differential form with the same storage discipline.
class DifferentialForm {
public:
    DifferentialForm(Chart chart, int degree);

    static DifferentialForm function(Chart chart, Expr f);              // degree 0
    static DifferentialForm covector(Chart chart, std::vector<Expr> c); // degree 1

    const Chart& chart() const { return chart_; }
    int degree() const { return degree_; }

    Expr component(IndexTuple idx) const;
    void add_term(IndexTuple idx, const Expr& value);
    const std::map<IndexTuple, Expr>& terms() const { return terms_; }
    std::vector<Expr> dense_components() const;

    DifferentialForm operator+(const DifferentialForm& other) const;
    DifferentialForm operator-(const DifferentialForm& other) const;
    DifferentialForm operator-() const;
    DifferentialForm scaled(const Expr& factor) const;

private:
    Chart chart_;
    int degree_;
    std::map<IndexTuple, Expr> terms_;
};

MultiVectorField wedge(const MultiVectorField& a, const MultiVectorField& b);
DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);

// Schouten-Nijenhuis bracket, degree |A|+|B|-1. On vector fields it is the Lie
// bracket; the overall sign is fixed so that schouten(pi, h) = -X_h.
MultiVectorField schouten(const MultiVectorField& a, const MultiVectorField& b);

DifferentialForm exterior_d(const DifferentialForm& w);

// d(f) as a 1-form.
DifferentialForm differential(const Chart& chart, const Expr& f);

// Contraction of a vector field (degree 1 only) into a form.
DifferentialForm interior(const MultiVectorField& x, const DifferentialForm& w);

// Full contraction of equal degrees: sum over increasing tuples of
// component products.
Expr pair(const DifferentialForm& w, const MultiVectorField& a);

// Lie derivative along a vector field: Cartan formula on forms,
// schouten(x, .) on multivectors.
DifferentialForm lie_derivative(const MultiVectorField& x, const DifferentialForm& w);
MultiVectorField lie_derivative(const MultiVectorField& x, const MultiVectorField& a);

// X(f): directional derivative of a function along a degree-1 field.
Expr apply_vector_field(const MultiVectorField& x, const Expr& f);

// Numeric zero test / residual applied to every component.
bool is_zero(const MultiVectorField& a, const ZeroTestOptions& opt = {});
bool is_zero(const DifferentialForm& w, const ZeroTestOptions& opt = {});
double max_relative_residual(const MultiVectorField& a, const ZeroTestOptions& opt = {});
double max_relative_residual(const DifferentialForm& w, const ZeroTestOptions& opt = {});

std::string to_string(const MultiVectorField& a);
std::string to_string(const DifferentialForm& w);

}  // namespace poismod
