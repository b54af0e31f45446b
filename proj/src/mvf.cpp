#include "poismod/mvf.hpp"

#include <algorithm>
#include <sstream>

namespace poismod {

namespace detail {

int normalize_tuple(IndexTuple& idx) {
    int sign = 1;
    // insertion sort, counting transpositions
    for (std::size_t i = 1; i < idx.size(); ++i) {
        int v = idx[i];
        std::size_t j = i;
        while (j > 0 && idx[j - 1] > v) {
            idx[j] = idx[j - 1];
            --j;
            sign = -sign;
        }
        idx[j] = v;
    }
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (idx[i] == idx[i - 1]) return 0;
    return sign;
}

int merge_tuples(const IndexTuple& a, const IndexTuple& b, IndexTuple& out) {
    out.clear();
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    int sign = 1;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return 0;
        if (a[i] < b[j]) {
            out.push_back(a[i++]);
        } else {
            // b[j] jumps over the remaining elements of a
            if ((a.size() - i) % 2 == 1) sign = -sign;
            out.push_back(b[j++]);
        }
    }
    while (i < a.size()) out.push_back(a[i++]);
    while (j < b.size()) out.push_back(b[j++]);
    return sign;
}

std::vector<IndexTuple> increasing_tuples(int n, int k) {
    std::vector<IndexTuple> out;
    if (k < 0 || k > n) return out;
    IndexTuple cur;
    cur.reserve(k);
    // iterative combinations in lexicographic order
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    if (k == 0) {
        out.push_back({});
        return out;
    }
    for (;;) {
        out.emplace_back(idx.begin(), idx.end());
        int pos = k - 1;
        while (pos >= 0 && idx[pos] == n - k + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
    return out;
}

}  // namespace detail

namespace {

// Degrees above the chart dimension are allowed: no strictly increasing tuple
// of that size exists, so such fields are canonically zero (e.g. [pi,pi] on a
// 2-dimensional chart).
void check_degree(const Chart&, int degree) {
    if (degree < 0) throw InputError("degree must be nonnegative");
}

void check_same_chart(const Chart& a, const Chart& b) {
    if (!charts_equal(a, b)) throw InputError("charts do not match");
}

using TermMap = std::map<IndexTuple, Expr>;

void map_add_term(TermMap& terms, const Chart& chart, int degree, IndexTuple idx,
                  const Expr& value) {
    if (static_cast<int>(idx.size()) != degree)
        throw InputError("index tuple size does not match degree " + std::to_string(degree));
    for (int i : idx)
        if (i < 0 || i >= static_cast<int>(chart.dim()))
            throw InputError("coordinate index " + std::to_string(i) + " out of range");
    int sign = detail::normalize_tuple(idx);
    if (sign == 0) return;  // repeated index: implicit zero
    Expr add = sign > 0 ? value : -value;
    auto it = terms.find(idx);
    if (it == terms.end()) {
        if (!add.is_literal(0)) terms.emplace(std::move(idx), std::move(add));
        return;
    }
    Expr sum = it->second + add;
    if (sum.is_literal(0))
        terms.erase(it);
    else
        it->second = std::move(sum);
}

Expr map_component(const TermMap& terms, IndexTuple idx) {
    int sign = detail::normalize_tuple(idx);
    if (sign == 0) return Expr::integer(0);
    auto it = terms.find(idx);
    if (it == terms.end()) return Expr::integer(0);
    return sign > 0 ? it->second : -it->second;
}

template <class Field>
Field combine(const Field& a, const Field& b, bool subtract) {
    check_same_chart(a.chart(), b.chart());
    if (a.degree() != b.degree()) throw InputError("degree mismatch in addition");
    Field out = a;
    for (const auto& [idx, c] : b.terms()) out.add_term(idx, subtract ? -c : c);
    return out;
}

template <class Field>
Field scale_field(const Field& a, const Expr& factor) {
    Field out(a.chart(), a.degree());
    for (const auto& [idx, c] : a.terms()) out.add_term(idx, factor * c);
    return out;
}

template <class Field>
std::vector<Expr> dense_of(const Field& a) {
    if (a.degree() != 1) throw InputError("dense_components requires degree 1");
    std::vector<Expr> out(a.chart().dim(), Expr::integer(0));
    for (const auto& [idx, c] : a.terms()) out[idx[0]] = c;
    return out;
}

template <class Field>
double worst_residual(const Field& a, const ZeroTestOptions& opt) {
    double worst = 0.0;
    for (const auto& [idx, c] : a.terms())
        worst = std::max(worst, max_relative_residual(c, a.chart(), opt));
    return worst;
}

template <class Field>
bool all_zero(const Field& a, const ZeroTestOptions& opt) {
    for (const auto& [idx, c] : a.terms())
        if (!is_zero(c, a.chart(), opt)) return false;
    return true;
}

template <class Field>
std::string print_field(const Field& a, const char* symbol) {
    if (a.terms().empty()) return "0";
    std::ostringstream out;
    bool first = true;
    for (const auto& [idx, c] : a.terms()) {
        if (!first) out << " + ";
        first = false;
        out << "(" << to_string(c) << ")";
        if (!idx.empty()) {
            out << " " << symbol << "[";
            for (std::size_t i = 0; i < idx.size(); ++i) {
                if (i) out << ",";
                out << a.chart().coords[idx[i]];
            }
            out << "]";
        }
    }
    return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// MultiVectorField / DifferentialForm basics.

MultiVectorField::MultiVectorField(Chart chart, int degree)
    : chart_(std::move(chart)), degree_(degree) {
    check_degree(chart_, degree_);
}

MultiVectorField MultiVectorField::function(Chart chart, Expr f) {
    MultiVectorField out(std::move(chart), 0);
    out.add_term({}, f);
    return out;
}

MultiVectorField MultiVectorField::vector(Chart chart, std::vector<Expr> c) {
    if (c.size() != chart.dim())
        throw InputError("vector field needs one component per coordinate");
    MultiVectorField out(std::move(chart), 1);
    for (std::size_t i = 0; i < c.size(); ++i) out.add_term({static_cast<int>(i)}, c[i]);
    return out;
}

Expr MultiVectorField::component(IndexTuple idx) const { return map_component(terms_, std::move(idx)); }
void MultiVectorField::add_term(IndexTuple idx, const Expr& value) {
    map_add_term(terms_, chart_, degree_, std::move(idx), value);
}
std::vector<Expr> MultiVectorField::dense_components() const { return dense_of(*this); }
MultiVectorField MultiVectorField::operator+(const MultiVectorField& o) const { return combine(*this, o, false); }
MultiVectorField MultiVectorField::operator-(const MultiVectorField& o) const { return combine(*this, o, true); }
MultiVectorField MultiVectorField::operator-() const { return scale_field(*this, Expr::integer(-1)); }
MultiVectorField MultiVectorField::scaled(const Expr& factor) const { return scale_field(*this, factor); }

DifferentialForm::DifferentialForm(Chart chart, int degree)
    : chart_(std::move(chart)), degree_(degree) {
    check_degree(chart_, degree_);
}

DifferentialForm DifferentialForm::function(Chart chart, Expr f) {
    DifferentialForm out(std::move(chart), 0);
    out.add_term({}, f);
    return out;
}

DifferentialForm DifferentialForm::covector(Chart chart, std::vector<Expr> c) {
    if (c.size() != chart.dim())
        throw InputError("covector field needs one component per coordinate");
    DifferentialForm out(std::move(chart), 1);
    for (std::size_t i = 0; i < c.size(); ++i) out.add_term({static_cast<int>(i)}, c[i]);
    return out;
}

Expr DifferentialForm::component(IndexTuple idx) const { return map_component(terms_, std::move(idx)); }
void DifferentialForm::add_term(IndexTuple idx, const Expr& value) {
    map_add_term(terms_, chart_, degree_, std::move(idx), value);
}
std::vector<Expr> DifferentialForm::dense_components() const { return dense_of(*this); }
DifferentialForm DifferentialForm::operator+(const DifferentialForm& o) const { return combine(*this, o, false); }
DifferentialForm DifferentialForm::operator-(const DifferentialForm& o) const { return combine(*this, o, true); }
DifferentialForm DifferentialForm::operator-() const { return scale_field(*this, Expr::integer(-1)); }
DifferentialForm DifferentialForm::scaled(const Expr& factor) const { return scale_field(*this, factor); }

// ---------------------------------------------------------------------------
// Exterior algebra.

namespace {
template <class Field>
Field wedge_impl(const Field& a, const Field& b, bool allow_overflow) {
    check_same_chart(a.chart(), b.chart());
    int deg = a.degree() + b.degree();
    if (!allow_overflow && deg > static_cast<int>(a.chart().dim()))
        throw InputError("wedge degree exceeds chart dimension");
    Field out(a.chart(), deg);
    IndexTuple merged;
    for (const auto& [ia, ca] : a.terms()) {
        for (const auto& [ib, cb] : b.terms()) {
            int sign = detail::merge_tuples(ia, ib, merged);
            if (sign == 0) continue;
            out.add_term(merged, sign > 0 ? ca * cb : -(ca * cb));
        }
    }
    return out;
}
}  // namespace

MultiVectorField wedge(const MultiVectorField& a, const MultiVectorField& b) {
    return wedge_impl(a, b, false);
}
DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
    // top-degree overflow is tolerated for forms: the result is canonically zero
    return wedge_impl(a, b, true);
}

// ---------------------------------------------------------------------------
// Schouten-Nijenhuis bracket, via the odd-coordinate calculus: writing
// A = sum_I A_I theta_{i1}...theta_{ik}, the bracket is
//   [A,B] = sum_i (A d<-/d theta_i)(dB/dx^i) - (dA/dx^i)(d->/d theta_i B),
// where the right theta-derivative of theta_I picks up (-1)^(elements after i)
// and the left one (-1)^(elements before i).

namespace {

struct OddTerm {
    IndexTuple idx;
    Expr coeff;
};

// right derivative: A d<-/d theta_i
std::vector<OddTerm> right_theta_derivative(const TermMap& terms, int i) {
    std::vector<OddTerm> out;
    for (const auto& [idx, c] : terms) {
        auto pos = std::find(idx.begin(), idx.end(), i);
        if (pos == idx.end()) continue;
        int after = static_cast<int>(idx.end() - pos) - 1;
        IndexTuple rest;
        rest.reserve(idx.size() - 1);
        for (int v : idx)
            if (v != i) rest.push_back(v);
        out.push_back({std::move(rest), after % 2 == 0 ? c : -c});
    }
    return out;
}

// left derivative: d->/d theta_i B
std::vector<OddTerm> left_theta_derivative(const TermMap& terms, int i) {
    std::vector<OddTerm> out;
    for (const auto& [idx, c] : terms) {
        auto pos = std::find(idx.begin(), idx.end(), i);
        if (pos == idx.end()) continue;
        int before = static_cast<int>(pos - idx.begin());
        IndexTuple rest;
        rest.reserve(idx.size() - 1);
        for (int v : idx)
            if (v != i) rest.push_back(v);
        out.push_back({std::move(rest), before % 2 == 0 ? c : -c});
    }
    return out;
}

}  // namespace

MultiVectorField schouten(const MultiVectorField& a, const MultiVectorField& b) {
    check_same_chart(a.chart(), b.chart());
    if (a.degree() + b.degree() < 1)
        throw InputError("schouten bracket needs combined degree at least 1");
    const Chart& chart = a.chart();
    const int n = static_cast<int>(chart.dim());
    MultiVectorField out(chart, a.degree() + b.degree() - 1);
    IndexTuple merged;
    for (int i = 0; i < n; ++i) {
        const std::string& xi = chart.coords[i];
        for (const OddTerm& ta : right_theta_derivative(a.terms(), i)) {
            for (const auto& [jb, cb] : b.terms()) {
                Expr dcb = differentiate(cb, xi);
                if (dcb.is_literal(0)) continue;
                int sign = detail::merge_tuples(ta.idx, jb, merged);
                if (sign == 0) continue;
                Expr term = ta.coeff * dcb;
                out.add_term(merged, sign > 0 ? term : -term);
            }
        }
        for (const auto& [ja, ca] : a.terms()) {
            Expr dca = differentiate(ca, xi);
            if (dca.is_literal(0)) continue;
            for (const OddTerm& tb : left_theta_derivative(b.terms(), i)) {
                int sign = detail::merge_tuples(ja, tb.idx, merged);
                if (sign == 0) continue;
                Expr term = dca * tb.coeff;
                out.add_term(merged, sign > 0 ? -term : term);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exterior derivative, contraction, pairing, Lie derivative.

DifferentialForm exterior_d(const DifferentialForm& w) {
    const Chart& chart = w.chart();
    const int n = static_cast<int>(chart.dim());
    DifferentialForm out(chart, w.degree() + 1);
    for (const auto& [idx, c] : w.terms()) {
        for (int j = 0; j < n; ++j) {
            if (std::find(idx.begin(), idx.end(), j) != idx.end()) continue;
            Expr dc = differentiate(c, chart.coords[j]);
            if (dc.is_literal(0)) continue;
            IndexTuple ext;
            ext.reserve(idx.size() + 1);
            ext.push_back(j);
            ext.insert(ext.end(), idx.begin(), idx.end());
            out.add_term(std::move(ext), dc);  // add_term sorts j into place
        }
    }
    return out;
}

DifferentialForm differential(const Chart& chart, const Expr& f) {
    std::vector<Expr> comps;
    comps.reserve(chart.dim());
    for (const auto& c : chart.coords) comps.push_back(differentiate(f, c));
    return DifferentialForm::covector(chart, std::move(comps));
}

DifferentialForm interior(const MultiVectorField& x, const DifferentialForm& w) {
    check_same_chart(x.chart(), w.chart());
    if (x.degree() != 1) throw InputError("interior product requires a degree-1 field");
    if (w.degree() == 0) throw InputError("interior product of a 0-form is not defined");
    DifferentialForm out(w.chart(), w.degree() - 1);
    for (const auto& [idx, c] : w.terms()) {
        for (std::size_t m = 0; m < idx.size(); ++m) {
            Expr xm = x.component({idx[m]});
            if (xm.is_literal(0)) continue;
            IndexTuple rest;
            rest.reserve(idx.size() - 1);
            for (std::size_t r = 0; r < idx.size(); ++r)
                if (r != m) rest.push_back(idx[r]);
            Expr term = xm * c;
            out.add_term(std::move(rest), m % 2 == 0 ? term : -term);
        }
    }
    return out;
}

Expr pair(const DifferentialForm& w, const MultiVectorField& a) {
    check_same_chart(w.chart(), a.chart());
    if (w.degree() != a.degree()) throw InputError("pairing requires equal degrees");
    Expr sum = Expr::integer(0);
    for (const auto& [idx, c] : w.terms()) {
        Expr ac = a.component(idx);
        if (!ac.is_literal(0)) sum += c * ac;
    }
    return sum;
}

DifferentialForm lie_derivative(const MultiVectorField& x, const DifferentialForm& w) {
    check_same_chart(x.chart(), w.chart());
    if (x.degree() != 1) throw InputError("Lie derivative requires a degree-1 field");
    if (w.degree() == 0) return interior(x, exterior_d(w));
    return exterior_d(interior(x, w)) + interior(x, exterior_d(w));
}

MultiVectorField lie_derivative(const MultiVectorField& x, const MultiVectorField& a) {
    if (x.degree() != 1) throw InputError("Lie derivative requires a degree-1 field");
    return schouten(x, a);
}

Expr apply_vector_field(const MultiVectorField& x, const Expr& f) {
    if (x.degree() != 1) throw InputError("apply_vector_field requires a degree-1 field");
    Expr out = Expr::integer(0);
    for (const auto& [idx, c] : x.terms())
        out += c * differentiate(f, x.chart().coords[idx[0]]);
    return out;
}

bool is_zero(const MultiVectorField& a, const ZeroTestOptions& opt) { return all_zero(a, opt); }
bool is_zero(const DifferentialForm& w, const ZeroTestOptions& opt) { return all_zero(w, opt); }
double max_relative_residual(const MultiVectorField& a, const ZeroTestOptions& opt) {
    return worst_residual(a, opt);
}
double max_relative_residual(const DifferentialForm& w, const ZeroTestOptions& opt) {
    return worst_residual(w, opt);
}

std::string to_string(const MultiVectorField& a) { return print_field(a, "e"); }
std::string to_string(const DifferentialForm& w) { return print_field(w, "d"); }

}  // namespace poismod
