#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "cpoly.hpp"
#include "puiseux.hpp"

namespace rattree {

// Polynomial in one variable over truncated Puiseux series, coefficient of
// z^i at index i.  Leading coefficients that are (known) zero are trimmed.
class PuiseuxPolynomial {
  public:
    PuiseuxPolynomial() = default;
    explicit PuiseuxPolynomial(std::vector<PuiseuxSeries> coeffs) : c_(std::move(coeffs)) {
        trim();
    }

    static PuiseuxPolynomial zero() { return PuiseuxPolynomial(); }

    static PuiseuxPolynomial from_series(const PuiseuxSeries& s) {
        return PuiseuxPolynomial({s});
    }

    static PuiseuxPolynomial variable() {
        return PuiseuxPolynomial({PuiseuxSeries::zero(), PuiseuxSeries::constant(1.0)});
    }

    const std::vector<PuiseuxSeries>& coeffs() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }

    const PuiseuxSeries& coeff(int i) const {
        static const PuiseuxSeries z = PuiseuxSeries::zero();
        if (i < 0 || i >= static_cast<int>(c_.size())) return z;
        return c_[i];
    }

    // Lowest index with a nonzero coefficient (order of vanishing at z = 0).
    int vanishing_order() const {
        for (std::size_t i = 0; i < c_.size(); ++i)
            if (!c_[i].is_zero()) return static_cast<int>(i);
        return -1;
    }

    friend PuiseuxPolynomial operator+(const PuiseuxPolynomial& a, const PuiseuxPolynomial& b) {
        std::vector<PuiseuxSeries> r(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(i) + b.coeff(i);
        return PuiseuxPolynomial(std::move(r));
    }
    friend PuiseuxPolynomial operator-(const PuiseuxPolynomial& a, const PuiseuxPolynomial& b) {
        std::vector<PuiseuxSeries> r(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = a.coeff(i) - b.coeff(i);
        return PuiseuxPolynomial(std::move(r));
    }
    friend PuiseuxPolynomial operator*(const PuiseuxPolynomial& a, const PuiseuxPolynomial& b) {
        if (a.is_zero() || b.is_zero()) return PuiseuxPolynomial();
        std::vector<PuiseuxSeries> r(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
        return PuiseuxPolynomial(std::move(r));
    }

    PuiseuxPolynomial scaled(const PuiseuxSeries& s) const {
        std::vector<PuiseuxSeries> r = c_;
        for (auto& x : r) x *= s;
        return PuiseuxPolynomial(std::move(r));
    }

    PuiseuxPolynomial derivative() const {
        std::vector<PuiseuxSeries> r;
        for (std::size_t i = 1; i < c_.size(); ++i)
            r.push_back(c_[i].scaled(Complex(static_cast<double>(i), 0.0)));
        return PuiseuxPolynomial(std::move(r));
    }

    PuiseuxSeries evaluate(const PuiseuxSeries& z) const {
        PuiseuxSeries v = PuiseuxSeries::zero();
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * z + *it;
        return v;
    }

    // Horner evaluation keeping only what can affect valuations below `bound`.
    // The accumulator after stage i still gets multiplied by z^i, so cutting
    // it at bound - i*v(z) drops nothing below the bound.
    PuiseuxSeries evaluate_below(const PuiseuxSeries& z, const Rat& bound) const {
        if (c_.empty()) return PuiseuxSeries::zero();
        if (z.is_zero()) return c_[0].truncated(ExtRat(bound));
        Rat mu = z.valuation().value();
        PuiseuxSeries v = PuiseuxSeries::zero();
        int i = static_cast<int>(c_.size());
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            --i;
            v = (v * z + *it).truncated(ExtRat(bound - mu * Rat(i)));
        }
        return v;
    }

    // p(shift + t^scale * w) as a polynomial in w.
    PuiseuxPolynomial composed_affine(const PuiseuxSeries& shift, const Rat& scale) const {
        PuiseuxSeries sc = PuiseuxSeries::t_power(scale);
        PuiseuxPolynomial lin({shift, sc});
        PuiseuxPolynomial r;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it)
            r = r * lin + from_series(*it);
        return r;
    }

    // w^n * p(1/w) for n >= degree (chart swap helper).
    PuiseuxPolynomial reversed(int n) const {
        std::vector<PuiseuxSeries> r(n + 1);
        for (std::size_t i = 0; i < c_.size(); ++i) r[n - i] = c_[i];
        return PuiseuxPolynomial(std::move(r));
    }

    // Smallest coefficient valuation (Gauss-point valuation of the polynomial).
    ExtRat content_valuation() const {
        ExtRat m = ExtRat::infinity();
        for (const auto& s : c_) m = ext_min(m, s.valuation());
        return m;
    }

    // Multiply every coefficient by t^delta.
    PuiseuxPolynomial shifted_content(const Rat& delta) const {
        std::vector<PuiseuxSeries> r = c_;
        for (auto& x : r) x = x.shifted(delta);
        return PuiseuxPolynomial(std::move(r));
    }

    PuiseuxPolynomial truncated(const ExtRat& at) const {
        std::vector<PuiseuxSeries> r = c_;
        for (auto& x : r) x = x.truncated(at);
        return PuiseuxPolynomial(std::move(r));
    }

    // Reduction of the coefficients: the complex polynomial of t^0 parts.
    // Requires each coefficient's constant term to be decided (truncation
    // strictly positive); coefficients of positive valuation reduce to 0.
    cpoly::Poly residue_poly() const {
        cpoly::Poly r;
        for (const auto& s : c_) {
            if (s.is_zero() && s.truncation() <= ExtRat(Rat(0)))
                throw precision_error("coefficient reduction undecided at this truncation");
            r.push_back(s.coeff_at(Rat(0)));
        }
        while (!r.empty() && std::abs(r.back()) == 0.0) r.pop_back();
        return r;
    }

    std::string str() const {
        if (c_.empty()) return "0";
        std::string s;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (c_[i].is_zero()) continue;
            if (!s.empty()) s += " + ";
            s += "(" + c_[i].str() + ")";
            if (i == 1) s += "*z";
            if (i > 1) s += "*z^" + std::to_string(i);
        }
        return s.empty() ? "0" : s;
    }

  private:
    void trim() {
        while (!c_.empty() && c_.back().is_zero() && c_.back().truncation().is_infinite())
            c_.pop_back();
        // Leading coefficients that are zero only "to truncation" are still
        // dropped for degree purposes; root finding treats them as absent.
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }

    std::vector<PuiseuxSeries> c_;
};

// One maximal segment of the lower Newton polygon.  Roots associated with a
// segment of slope s have valuation -s; the segment length counts them.
struct NewtonSegment {
    Rat slope;
    int length;
    int i0; // left endpoint index
    int i1; // right endpoint index
};

// Lower convex hull of { (i, valuation(c_i)) : c_i != 0 }, as maximal
// segments ordered by increasing index (slopes strictly increasing).
inline std::vector<NewtonSegment> newton_polygon(const PuiseuxPolynomial& p) {
    struct Pt {
        int i;
        Rat v;
    };
    std::vector<Pt> pts;
    for (int i = 0; i <= p.degree(); ++i) {
        const PuiseuxSeries& s = p.coeff(i);
        if (!s.is_zero()) pts.push_back({i, s.valuation().value()});
    }
    if (pts.size() < 2) return {};
    // Monotone chain, keeping only strict right turns (collinear points are
    // dropped so segments come out maximal).
    std::vector<Pt> hull;
    for (const auto& pt : pts) {
        while (hull.size() >= 2) {
            const Pt& a = hull[hull.size() - 2];
            const Pt& b = hull[hull.size() - 1];
            // cross( b-a, pt-a ) <= 0  -> b is not below the chord a-pt.
            Rat cross = Rat(b.i - a.i) * (pt.v - a.v) - (b.v - a.v) * Rat(pt.i - a.i);
            if (cross.sign() <= 0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(pt);
    }
    std::vector<NewtonSegment> segs;
    for (std::size_t k = 1; k < hull.size(); ++k) {
        Rat slope = (hull[k].v - hull[k - 1].v) / Rat(hull[k].i - hull[k - 1].i);
        segs.push_back({slope, hull[k].i - hull[k - 1].i, hull[k - 1].i, hull[k].i});
    }
    return segs;
}

// A root of a polynomial over the Puiseux field, expanded to the requested
// order.  Unresolved clusters keep their multiplicity but are flagged.
struct NewtonPuiseuxRoot {
    PuiseuxSeries series;
    int multiplicity = 1;
    bool resolved = true;
};

namespace detail {

#ifdef RATTREE_NP_STATS
inline long np_refine_calls = 0, np_refine_iters = 0, np_refine_ok = 0, np_refine_stall = 0,
            np_refine_denzero = 0, np_refine_cap = 0, np_cluster = 0, np_terms = 0, np_prods = 0;
inline int np_max_depth = 0;
#endif

inline void np_expand(const PuiseuxPolynomial& poly, const Rat& order, int depth,
                      bool positive_only, std::vector<NewtonPuiseuxRoot>& out);

// Quadratically convergent refinement for a root whose residue is simple.
inline std::optional<PuiseuxSeries> np_newton_refine(const PuiseuxPolynomial& p,
                                                     const PuiseuxSeries& seed, const Rat& order) {
    PuiseuxPolynomial dp = p.derivative();
    PuiseuxSeries z = seed.truncated(order);
    // v(z) is fixed across iterations; a term-wise lower bound for v(p'(z))
    // sizes the evaluation window for the derivative.
    Rat mu = z.is_zero() ? Rat(0) : z.valuation().value();
    ExtRat lb_den = ExtRat::infinity();
    for (int i = 0; i <= dp.degree(); ++i)
        if (!dp.coeff(i).is_zero())
            lb_den = ext_min(lb_den, dp.coeff(i).valuation() + mu * Rat(i));
    if (lb_den.is_infinite()) return std::nullopt;
    // Newton lifting: iterate inside a working window that doubles as the
    // accuracy doubles, so early iterations stay cheap and a stall (double
    // precision exhausted by the coefficient dynamic range) is detected
    // without ever paying for the full width.  Terms beyond the window are
    // noise and get clipped; the final full-window residual test is what
    // certifies the returned expansion.
    Rat work = rat_min(order, rat_max(mu + mu, Rat(0)) + Rat(1));
    ExtRat last_gain(Rat(-1000000)); // valuation of the previous correction
#ifdef RATTREE_NP_STATS
    ++np_refine_calls;
#endif
    for (int it = 0; it < 60; ++it) {
#ifdef RATTREE_NP_STATS
        ++np_refine_iters;
#endif
        PuiseuxSeries den = dp.evaluate_below(z, lb_den.value() + work + Rat(1));
#ifdef RATTREE_NP_STATS
        np_terms = std::max<long>(np_terms, static_cast<long>(z.terms().size()));
#endif
        if (den.is_zero()) {
#ifdef RATTREE_NP_STATS
            ++np_refine_denzero;
#endif
            return std::nullopt;
        }
        Rat vd = den.valuation().value();
        PuiseuxSeries num = p.evaluate_below(z, work + vd);
        // valuation of the next correction, seen through the current window
        ExtRat gain = (num.is_zero() ? num.truncation() : num.valuation()) - vd;
        if (gain >= ExtRat(order)) {
#ifdef RATTREE_NP_STATS
            ++np_refine_ok;
#endif
            return z.truncated(order);
        }
        if (gain >= ExtRat(work) && work < order) {
            // window too narrow to see the next correction: widen and retry
            work = rat_min(order, work + work);
            continue;
        }
        if (num.is_zero()) {
            // the root's own truncation blocks any further progress
#ifdef RATTREE_NP_STATS
            ++np_refine_stall;
#endif
            if (gain > ExtRat(mu)) return z.truncated(gain);
            return std::nullopt;
        }
        if (!(gain > last_gain)) {
            // Convergence stalled below the requested order: the coefficient
            // dynamic range of p exhausts double precision here.  The
            // expansion is still correct below `gain`, so return it with the
            // honestly reduced truncation rather than failing.
#ifdef RATTREE_NP_STATS
            ++np_refine_stall;
#endif
            if (gain > ExtRat(mu)) return z.truncated(gain.value());
            return std::nullopt;
        }
        last_gain = gain;
        Rat g = num.valuation().value() - vd;
        Rat rel = work - g;
        if (rel.sign() <= 0) rel = Rat(1);
        PuiseuxSeries delta = num * den.inverse(rel);
        if (delta.is_zero()) {
#ifdef RATTREE_NP_STATS
            ++np_refine_ok;
#endif
            return z.truncated(order);
        }
        // after this step the error sits at ~2g; everything above is noise
        Rat next = rat_min(order, rat_max(work + work, g + g + Rat(1)));
        z = (z - delta).lifted(next, ExtRat(order));
        work = next;
    }
#ifdef RATTREE_NP_STATS
    ++np_refine_cap;
#endif
    return std::nullopt;
}

inline void np_expand(const PuiseuxPolynomial& poly, const Rat& order, int depth,
                      bool positive_only, std::vector<NewtonPuiseuxRoot>& out) {
    if (depth > 48) throw precision_error("root expansion recursion exceeded its depth cap");
    PuiseuxPolynomial p = poly;
    if (p.degree() < 1) return;
    int m = p.vanishing_order();
    if (m < 0) return; // all coefficients zero to truncation: nothing decidable
    if (m > 0) {
        NewtonPuiseuxRoot zero_root;
        bool exact = true;
        for (int i = 0; i < m; ++i)
            if (!p.coeff(i).truncation().is_infinite()) exact = false;
        zero_root.series = exact ? PuiseuxSeries::zero() : PuiseuxSeries::zero().truncated(order);
        zero_root.multiplicity = m;
        out.push_back(zero_root);
        std::vector<PuiseuxSeries> shifted(p.coeffs().begin() + m, p.coeffs().end());
        p = PuiseuxPolynomial(std::move(shifted));
        if (p.degree() < 1) return;
    }
    for (const auto& seg : newton_polygon(p)) {
        Rat mu = -seg.slope; // valuation of the roots on this segment
        if (positive_only && mu.sign() <= 0) continue;
        if (ExtRat(mu) >= ExtRat(order)) {
            // Root smaller than anything representable at this order.
            NewtonPuiseuxRoot r;
            r.series = PuiseuxSeries::zero().truncated(order);
            r.multiplicity = seg.length;
            r.resolved = false;
            out.push_back(r);
            continue;
        }
        // Residue equation from the points on the segment's supporting line.
        Rat v0 = p.coeff(seg.i0).valuation().value();
        cpoly::Poly phi(seg.length + 1, Complex(0.0, 0.0));
        for (int i = seg.i0; i <= seg.i1; ++i) {
            const PuiseuxSeries& ci = p.coeff(i);
            Rat line = v0 + seg.slope * Rat(i - seg.i0);
            if (ci.is_zero()) {
                if (ci.truncation() <= ExtRat(line))
                    throw precision_error("Newton polygon coefficient undecided at truncation");
                continue;
            }
            if (ci.valuation().value() == line) phi[i - seg.i0] = ci.leading_coeff();
        }
        for (const auto& cluster : cpoly::clustered_roots(phi)) {
            PuiseuxSeries seed = PuiseuxSeries::monomial(cluster.center, mu);
            if (cluster.multiplicity == 1) {
                auto refined = np_newton_refine(p, seed, order);
                if (refined) {
                    // A truncation short of the requested order marks a root
                    // that is correct but cannot be expanded further in this
                    // precision; re-expanding it through the cluster path
                    // would only chase noise.
                    bool full = refined->truncation() >= ExtRat(order);
                    out.push_back({*refined, 1, full});
                    continue;
                }
            }
            // Substitute z = t^mu (zeta + w) and expand the cluster further.
#ifdef RATTREE_NP_STATS
            ++np_cluster;
            np_max_depth = std::max(np_max_depth, depth);
#endif
            PuiseuxPolynomial q =
                p.composed_affine(seed, mu); // p(seed + t^mu w)
            ExtRat content = q.content_valuation();
            if (content.is_infinite()) {
                // p collapses on this branch: the seed is a root to truncation.
                out.push_back({seed, cluster.multiplicity, false});
                continue;
            }
            q = q.shifted_content(-content.value());
            // The full polynomial is needed here: coefficients above the
            // cluster multiplicity do not touch the first polygon step of q,
            // but they re-enter the expansion one step deeper and truncating
            // them would corrupt the sub-roots beyond their leading term.
            std::vector<NewtonPuiseuxRoot> sub;
            Rat budget = order - mu;
            if (budget.sign() <= 0) {
                out.push_back({seed, cluster.multiplicity, false});
                continue;
            }
            np_expand(q, budget, depth + 1, /*positive_only=*/true, sub);
            int found = 0;
            for (const auto& r : sub) {
                // Only roots with positive valuation continue this cluster.
                ExtRat v = r.series.valuation();
                if (v.is_finite() && v.value().sign() <= 0) continue;
                PuiseuxSeries root = (seed + r.series.shifted(mu)).truncated(order);
                out.push_back({root, r.multiplicity, r.resolved});
                found += r.multiplicity;
                if (found >= cluster.multiplicity) break;
            }
            if (found < cluster.multiplicity)
                out.push_back({seed.truncated(order), cluster.multiplicity - found, false});
        }
    }
}

} // namespace detail

// All roots of p over the Puiseux field, expanded to exponent < order.
// Multiplicities sum to deg(p) - (order of the leading-coefficient drop),
// i.e. every finite root is accounted for.
inline std::vector<NewtonPuiseuxRoot> newton_puiseux_roots(const PuiseuxPolynomial& p,
                                                           const Rat& order = prec::default_order) {
    if (p.degree() < 1) {
        if (p.is_zero()) throw numerical_error("root expansion of the zero polynomial");
        return {};
    }
    std::vector<NewtonPuiseuxRoot> out;
    detail::np_expand(p, order, 0, /*positive_only=*/false, out);
    // The solver may ramify the exponent lattice of the input by at most the
    // supported bound; anything finer signals a runaway expansion.
    std::int64_t input_den = 1;
    for (const auto& c : p.coeffs())
        for (const auto& term : c.terms()) input_den = lcm64(input_den, term.exponent.den());
    for (const auto& r : out)
        for (const auto& term : r.series.terms()) {
            std::int64_t den = term.exponent.den();
            if (den / std::gcd(den, input_den) > prec::ram_bound)
                throw precision_error("root ramification " + term.exponent.str() +
                                      " exceeds the supported bound");
        }
    return out;
}

} // namespace rattree
