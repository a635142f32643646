#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "puiseux_poly.hpp"

namespace rattree {

// A point of the projective line over the Puiseux field: a series, or the
// point at infinity.
struct TypeIPoint {
    std::optional<PuiseuxSeries> value; // nullopt = infinity

    static TypeIPoint infinity() { return {std::nullopt}; }
    static TypeIPoint at(PuiseuxSeries s) { return {std::move(s)}; }
    bool is_infinity() const { return !value.has_value(); }

    std::string str() const { return value ? value->str() : std::string("inf"); }
};

// Type II point of the Berkovich line: the ball B(center, |t|^q) in
// valuation coordinates.  The canonical representative drops center terms at
// or above exponent q (they do not move the ball) while keeping the center's
// truncation order, so no precision is forgotten.
struct TypeIIPoint {
    PuiseuxSeries center;
    Rat radius_val; // q; radius is e^{-q} in norm units

    static TypeIIPoint gauss() { return {PuiseuxSeries::zero(), Rat(0)}; }

    static TypeIIPoint make(const PuiseuxSeries& c, const Rat& q) {
        std::vector<PsTerm> kept;
        for (const auto& term : c.terms())
            if (term.exponent < q) kept.push_back(term);
        return {PuiseuxSeries::from_terms(kept, c.truncation()), q};
    }

    TypeIIPoint canonical() const { return make(center, radius_val); }

    std::string str() const {
        return "ball(" + center.str() + ", q=" + radius_val.str() + ")";
    }
};

// Valuation of the difference of two centers, with truncation awareness:
// when the difference vanishes to truncation T the true valuation is only
// known to be >= T; callers pass the decision threshold they care about.
inline ExtRat center_meet_valuation(const PuiseuxSeries& a, const PuiseuxSeries& b,
                                    const Rat& decision_threshold) {
    PuiseuxSeries d = a - b;
    if (!d.is_zero()) return d.valuation();
    if (d.truncation().is_infinite()) return ExtRat::infinity();
    if (d.truncation() >= ExtRat(decision_threshold)) return d.truncation();
    throw precision_error("center difference undecided at this truncation");
}

// Path distance between Type II points in valuation units:
//   d(x, y) = q_x + q_y - 2 min(q_x, q_y, val(c_x - c_y)).
inline Rat tree_distance(const TypeIIPoint& x, const TypeIIPoint& y) {
    Rat qmin = rat_min(x.radius_val, y.radius_val);
    ExtRat v = center_meet_valuation(x.center, y.center, qmin);
    Rat m = v.is_infinite() ? qmin : rat_min(qmin, v.value());
    return x.radius_val + y.radius_val - Rat(2) * m;
}

inline bool points_equal(const TypeIIPoint& x, const TypeIIPoint& y) {
    if (x.radius_val != y.radius_val) return false;
    ExtRat v = center_meet_valuation(x.center, y.center, x.radius_val);
    return v >= ExtRat(x.radius_val);
}

// Joint valuation of a polynomial's coefficients = valuation form of the
// Gauss-point seminorm ([p]_gauss = e^{-gauss_seminorm(p)}).
inline ExtRat gauss_seminorm(const PuiseuxPolynomial& p) { return p.content_valuation(); }

// Seminorm of p at an arbitrary Type II point, in valuation units: conjugate
// the point to the Gauss point and take the joint coefficient valuation.
inline ExtRat seminorm_at(const TypeIIPoint& x, const PuiseuxPolynomial& p) {
    return gauss_seminorm(p.composed_affine(x.center, x.radius_val));
}

// A tangent direction at a Type II point: a residue value, or infinity.
struct Direction {
    bool infinite = false;
    Complex v{0.0, 0.0};

    static Direction infinity() { return {true, Complex(0.0, 0.0)}; }
    static Direction at(Complex c) { return {false, c}; }

    friend bool operator==(const Direction& a, const Direction& b) {
        if (a.infinite != b.infinite) return false;
        return a.infinite || std::abs(a.v - b.v) <= 1e-7 * (1.0 + std::abs(a.v) + std::abs(b.v));
    }
};

// Rational map over the residue field C, stored with the common factors of
// numerator and denominator cancelled (root matching at the residue
// cancellation tolerance).
class ResidueRationalMap {
  public:
    static ResidueRationalMap cancelled(cpoly::Poly n, cpoly::Poly d) {
        n = cpoly::trimmed(std::move(n));
        d = cpoly::trimmed(std::move(d));
        if (n.empty() && d.empty())
            throw numerical_error("residue map 0/0");
        if (n.empty()) d = {Complex(1.0, 0.0)}; // the constant 0
        if (d.empty()) n = {Complex(1.0, 0.0)}; // the constant infinity
        if (!n.empty() && !d.empty() && cpoly::degree(n) >= 1 && cpoly::degree(d) >= 1) {
            auto rn = cpoly::roots(n);
            auto rd = cpoly::roots(d);
            std::vector<bool> used(rd.size(), false);
            std::vector<Complex> keep_n;
            for (const auto& r : rn) {
                bool matched = false;
                for (std::size_t j = 0; j < rd.size(); ++j) {
                    if (used[j]) continue;
                    double scale = std::max(1.0, std::max(std::abs(r), std::abs(rd[j])));
                    if (std::abs(r - rd[j]) <= prec::residue_cancel_tol * scale) {
                        used[j] = true;
                        matched = true;
                        break;
                    }
                }
                if (!matched) keep_n.push_back(r);
            }
            std::vector<Complex> keep_d;
            for (std::size_t j = 0; j < rd.size(); ++j)
                if (!used[j]) keep_d.push_back(rd[j]);
            if (keep_n.size() != rn.size()) { // something cancelled
                n = cpoly::from_roots(n.back(), keep_n);
                d = cpoly::from_roots(d.back(), keep_d);
            }
        }
        ResidueRationalMap m;
        m.num_ = std::move(n);
        m.den_ = std::move(d);
        return m;
    }

    const cpoly::Poly& num() const { return num_; }
    const cpoly::Poly& den() const { return den_; }

    // Degree as a map of P^1 (after cancellation).
    int degree() const {
        return std::max(cpoly::degree(num_), cpoly::degree(den_));
    }

    bool is_constant() const { return degree() <= 0; }

    // Constant value for degree-0 maps: a complex number or infinity.
    Direction constant_value() const {
        if (den_.empty()) return Direction::infinity();
        if (num_.empty()) return Direction::at(Complex(0.0, 0.0));
        return Direction::at(num_[0] / den_[0]);
    }

    Direction eval(const Direction& z) const {
        if (z.infinite) {
            int dn = cpoly::degree(num_), dd = cpoly::degree(den_);
            if (dn > dd) return Direction::infinity();
            if (dn < dd) return Direction::at(Complex(0.0, 0.0));
            return Direction::at(num_.back() / den_.back());
        }
        Complex nv = num_.empty() ? Complex(0, 0) : cpoly::eval(num_, z.v);
        Complex dv = den_.empty() ? Complex(0, 0) : cpoly::eval(den_, z.v);
        double scale_n = cpoly::max_abs(num_) * std::pow(1.0 + std::abs(z.v), cpoly::degree(num_));
        double scale_d = cpoly::max_abs(den_) * std::pow(1.0 + std::abs(z.v), cpoly::degree(den_));
        bool nz = std::abs(nv) <= 1e-11 * std::max(scale_n, 1e-300);
        bool dz = std::abs(dv) <= 1e-11 * std::max(scale_d, 1e-300);
        if (dz && !nz) return Direction::infinity();
        if (dz && nz) throw numerical_error("residue map evaluation hit an uncancelled 0/0");
        return Direction::at(nv / dv);
    }

    // Local multiplicity of the map at a direction (order of the first
    // nonvanishing term of g(z) - g(v) at v, with chart swaps at infinity).
    int multiplicity_at(const Direction& z) const {
        if (z.infinite) return swapped().multiplicity_at(Direction::at(Complex(0.0, 0.0)));
        Direction w = eval(z);
        if (w.infinite) return root_multiplicity(den_, z.v);
        cpoly::Poly p = num_;
        if (p.size() < den_.size()) p.resize(den_.size(), Complex(0.0, 0.0));
        for (std::size_t i = 0; i < den_.size(); ++i) p[i] -= w.v * den_[i];
        return root_multiplicity(p, z.v);
    }

    // Solutions of g(v) = w with multiplicities; total equals the degree.
    std::vector<std::pair<Direction, int>> fiber(const Direction& w) const {
        int D = degree();
        std::vector<std::pair<Direction, int>> out;
        cpoly::Poly p;
        if (w.infinite) {
            p = den_;
        } else {
            p = num_;
            if (p.size() < den_.size()) p.resize(den_.size(), Complex(0.0, 0.0));
            for (std::size_t i = 0; i < den_.size(); ++i) p[i] -= w.v * den_[i];
        }
        p = cpoly::trimmed(p);
        int finite = 0;
        if (!p.empty() && cpoly::degree(p) >= 1) {
            for (const auto& cl : cpoly::clustered_roots(p)) {
                out.push_back({Direction::at(cl.center), cl.multiplicity});
                finite += cl.multiplicity;
            }
        }
        if (finite < D) out.push_back({Direction::infinity(), D - finite});
        return out;
    }

    // The conjugate map 1/g(1/z) (used for charts at infinity).
    ResidueRationalMap swapped() const {
        int n = std::max(cpoly::degree(num_), cpoly::degree(den_));
        cpoly::Poly rn(n + 1, Complex(0, 0)), rd(n + 1, Complex(0, 0));
        for (std::size_t i = 0; i < num_.size(); ++i) rn[n - i] = num_[i];
        for (std::size_t i = 0; i < den_.size(); ++i) rd[n - i] = den_[i];
        return cancelled(rd, rn);
    }

  private:
    static int root_multiplicity(const cpoly::Poly& poly, Complex v) {
        cpoly::Poly p = cpoly::trimmed(poly);
        if (p.empty()) return 0;
        double scale = cpoly::max_abs(p) * std::pow(1.0 + std::abs(v), cpoly::degree(p));
        int k = 0;
        double fact = 1.0;
        while (k <= cpoly::degree(poly)) {
            if (std::abs(cpoly::eval(p, v)) > 1e-6 * fact * std::max(scale, 1e-300)) break;
            p = cpoly::derivative(p);
            ++k;
            fact *= k;
            if (p.empty()) break;
        }
        return k;
    }

    cpoly::Poly num_;
    cpoly::Poly den_;
};

// A rational map over the Puiseux field, kept as a normalized fraction:
// the joint minimal coefficient valuation of numerator and denominator is 0.
class BerkMap {
  public:
    BerkMap(PuiseuxPolynomial num, PuiseuxPolynomial den)
        : num_(std::move(num)), den_(std::move(den)) {
        if (num_.is_zero() && den_.is_zero()) throw numerical_error("map 0/0");
        normalize();
    }

    const PuiseuxPolynomial& num() const { return num_; }
    const PuiseuxPolynomial& den() const { return den_; }

    int degree() const { return std::max(num_.degree(), den_.degree()); }

    // f(z) - z as a polynomial (numerator of the fixed-point equation).
    PuiseuxPolynomial fixed_point_polynomial() const {
        return num_ - PuiseuxPolynomial::variable() * den_;
    }

    // Derivative as a fraction: (N'D - ND') / D^2.
    PuiseuxPolynomial derivative_numerator() const {
        return num_.derivative() * den_ - num_ * den_.derivative();
    }

    // Value at a Type I point (series), as num/den with a series inverse.
    PuiseuxSeries evaluate(const PuiseuxSeries& z, const Rat& order = prec::default_order) const {
        PuiseuxSeries n = num_.evaluate(z);
        PuiseuxSeries d = den_.evaluate(z);
        if (d.is_zero()) throw numerical_error("map evaluation at a pole");
        return (n * d.inverse(order)).truncated(ExtRat(order));
    }

    // Composition g(f) substituting this map into g (degrees multiply).
    BerkMap composed_into(const BerkMap& g, int degree_cap) const {
        long long target = 1LL * g.degree() * degree() + 1;
        if (target > degree_cap)
            throw size_error("iterate degree exceeds the polynomial cap; lower qmax");
        int D = g.degree();
        // powers num^i * den^(D-i)
        std::vector<PuiseuxPolynomial> npow(D + 1), dpow(D + 1);
        npow[0] = PuiseuxPolynomial::from_series(PuiseuxSeries::constant(1.0));
        dpow[0] = npow[0];
        for (int i = 1; i <= D; ++i) {
            npow[i] = npow[i - 1] * num_;
            dpow[i] = dpow[i - 1] * den_;
        }
        PuiseuxPolynomial N = PuiseuxPolynomial::zero();
        PuiseuxPolynomial Dn = PuiseuxPolynomial::zero();
        for (int i = 0; i <= D; ++i) {
            PuiseuxPolynomial basis = npow[i] * dpow[D - i];
            if (!g.num().coeff(i).is_zero()) N = N + basis.scaled(g.num().coeff(i));
            if (!g.den().coeff(i).is_zero()) Dn = Dn + basis.scaled(g.den().coeff(i));
        }
        return BerkMap(std::move(N), std::move(Dn));
    }

  private:
    void normalize() {
        ExtRat m = ext_min(num_.content_valuation(), den_.content_valuation());
        if (m.is_infinite()) throw numerical_error("map has no known coefficients");
        if (m.value().sign() != 0) {
            num_ = num_.shifted_content(-m.value());
            den_ = den_.shifted_content(-m.value());
        }
    }

    PuiseuxPolynomial num_;
    PuiseuxPolynomial den_;
};

// Everything apply_map learns in one pass: the image point, the reduction in
// the adapted coordinates (= the tangent map), and the local degree.
struct MapAction {
    TypeIIPoint image;
    ResidueRationalMap reduction;
    int local_degree = 1;
    int steps = 0;
};

namespace detail {

struct AffineMove {
    Complex shift;
    Rat scale;
};
struct SwapMove {};
using ChartMove = std::variant<AffineMove, SwapMove>;

inline TypeIIPoint apply_chart_move(const ChartMove& mv, const TypeIIPoint& p) {
    if (std::holds_alternative<AffineMove>(mv)) {
        const auto& a = std::get<AffineMove>(mv);
        PuiseuxSeries c = PuiseuxSeries::constant(a.shift) + p.center.shifted(a.scale);
        return TypeIIPoint{c, p.radius_val + a.scale};
    }
    // swap z -> 1/z on the ball B(c, e^{-q})
    ExtRat v = p.center.valuation();
    if (v >= ExtRat(p.radius_val)) // ball around 0: inverts to a ball around 0
        return TypeIIPoint{PuiseuxSeries::zero(), -p.radius_val};
    Rat lam = v.value();
    Rat rel = p.radius_val - lam - lam + Rat(1);
    if (rel.sign() <= 0) rel = Rat(1);
    PuiseuxSeries inv = p.center.inverse(rel);
    return TypeIIPoint{inv, p.radius_val - Rat(2) * lam};
}

} // namespace detail

// The induced map on the Berkovich tree, computed by the recentering loop:
// conjugate the source ball to the Gauss point, then repeatedly lift the
// constant reduction (swapping charts at infinity) until the reduction is
// nonconstant; the accumulated coordinate moves locate the image ball.
inline MapAction apply_map_full(const BerkMap& f, const TypeIIPoint& x,
                                const Rat& order = prec::default_order) {
    TypeIIPoint xc = x.canonical();
    PuiseuxPolynomial N = f.num().composed_affine(xc.center, xc.radius_val);
    PuiseuxPolynomial D = f.den().composed_affine(xc.center, xc.radius_val);
    std::vector<detail::ChartMove> moves;
    int cap = static_cast<int>(4 * order.ceil());
    if (cap < 16) cap = 16;
    for (int step = 0; step <= cap; ++step) {
        ExtRat m0 = ext_min(N.content_valuation(), D.content_valuation());
        if (m0.is_infinite())
            throw precision_error("map collapsed to zero at this truncation");
        if (m0.value().sign() != 0) {
            N = N.shifted_content(-m0.value());
            D = D.shifted_content(-m0.value());
        }
        cpoly::Poly nr = N.residue_poly();
        cpoly::Poly dr = D.residue_poly();
        if (dr.empty() && nr.empty())
            throw precision_error("reduction vanished identically; truncation too coarse");
        if (dr.empty()) {
            // constant reduction at infinity: swap the chart
            moves.push_back(detail::SwapMove{});
            std::swap(N, D);
            continue;
        }
        ResidueRationalMap red = ResidueRationalMap::cancelled(nr, dr);
        if (!red.is_constant()) {
            TypeIIPoint img = TypeIIPoint::gauss();
            for (auto it = moves.rbegin(); it != moves.rend(); ++it)
                img = detail::apply_chart_move(*it, img);
            return MapAction{img.canonical(), red, red.degree(), step};
        }
        Direction c = red.constant_value();
        if (c.infinite) {
            moves.push_back(detail::SwapMove{});
            std::swap(N, D);
            continue;
        }
        // subtract the constant and rescale by the remaining Gauss valuation
        if (std::abs(c.v) != 0.0)
            N = N - D.scaled(PuiseuxSeries::constant(c.v));
        ExtRat vn = N.content_valuation();
        ExtRat vd = D.content_valuation();
        if (vn.is_infinite())
            throw precision_error("recentred map vanished; truncation too coarse");
        Rat m = vn.value() - vd.value();
        if (m.sign() <= 0)
            throw precision_error("recentering stalled (residual dust above tolerance)");
        moves.push_back(detail::AffineMove{c.v, m});
        N = N.shifted_content(-m);
    }
    throw precision_error("recentering iteration cap exceeded");
}

inline TypeIIPoint apply_map(const BerkMap& f, const TypeIIPoint& x,
                             const Rat& order = prec::default_order) {
    return apply_map_full(f, x, order).image;
}

inline ResidueRationalMap reduction_at(const BerkMap& f, const TypeIIPoint& x,
                                       const Rat& order = prec::default_order) {
    return apply_map_full(f, x, order).reduction;
}

inline int local_degree(const BerkMap& f, const TypeIIPoint& x,
                        const Rat& order = prec::default_order) {
    return apply_map_full(f, x, order).local_degree;
}

// Image direction and multiplicity of the tangent map at x.
struct TangentImage {
    Direction direction;
    int multiplicity;
};

inline TangentImage tangent_map(const BerkMap& f, const TypeIIPoint& x, const Direction& v,
                                const Rat& order = prec::default_order) {
    ResidueRationalMap red = reduction_at(f, x, order);
    return TangentImage{red.eval(v), red.multiplicity_at(v)};
}

// Critical points of f over the Puiseux field with multiplicities; the
// balance at infinity brings the total to 2 deg(f) - 2.
struct CriticalEnd {
    TypeIPoint point;
    int multiplicity;
};

inline std::vector<CriticalEnd> critical_ends(const BerkMap& f,
                                              const Rat& order = prec::default_order) {
    PuiseuxPolynomial W = f.derivative_numerator();
    if (W.is_zero()) throw numerical_error("derivative vanished identically");
    std::vector<CriticalEnd> out;
    int finite = 0;
    for (const auto& r : newton_puiseux_roots(W, order)) {
        out.push_back({TypeIPoint::at(r.series), r.multiplicity});
        finite += r.multiplicity;
    }
    int total = 2 * f.degree() - 2;
    if (finite < total) out.push_back({TypeIPoint::infinity(), total - finite});
    return out;
}

struct FiberPoint {
    TypeIIPoint point;
    int local_degree;
};

namespace detail {

// All zeros of an exactly-evaluable piecewise linear function on [lo, hi].
// Five samples per node resolve a straight line or a single kink (including
// kinks at rational, non-dyadic positions); otherwise the node splits.
inline bool on_line(const Rat& x1, const Rat& y1, const Rat& x2, const Rat& y2, const Rat& x,
                    const Rat& y) {
    return (y2 - y1) * (x - x1) == (y - y1) * (x2 - x1);
}

template <typename Fn>
void pl_line_zero(const Fn& h, const Rat& x1, const Rat& y1, const Rat& x2, const Rat& y2,
                  const Rat& lo, const Rat& hi, std::vector<Rat>& out) {
    if (y1 == y2) return;
    Rat u = x1 - y1 * (x2 - x1) / (y2 - y1);
    if (lo < u && u < hi && h(u).sign() == 0) out.push_back(u);
}

template <typename Fn>
void pl_zeros(const Fn& h, const Rat& lo, const Rat& hi, const Rat& hlo, const Rat& hhi,
              int depth, std::vector<Rat>& out) {
    if (depth > 42) throw precision_error("piecewise-linear zero search did not resolve");
    if (hlo.sign() == 0) out.push_back(lo);
    if (hhi.sign() == 0) out.push_back(hi);
    if (!(lo < hi)) return;
    Rat mid = (lo + hi) / Rat(2);
    Rat hm = h(mid);
    if (hm.sign() == 0) out.push_back(mid);
    Rat q1 = (lo + mid) / Rat(2);
    Rat h1 = h(q1);
    if (h1.sign() == 0) out.push_back(q1);
    Rat q2 = (mid + hi) / Rat(2);
    Rat h2 = h(q2);
    if (h2.sign() == 0) out.push_back(q2);

    // Certify each half against two interior probes; the second sits at a
    // non-dyadic offset so that a kinked function cannot slip through on an
    // arithmetic coincidence at the midpoint alone.
    Rat r1 = lo + (mid - lo) * Rat(5, 13);
    Rat r2 = mid + (hi - mid) * Rat(5, 13);
    bool left_line = on_line(lo, hlo, mid, hm, q1, h1) && on_line(lo, hlo, mid, hm, r1, h(r1));
    bool right_line = on_line(mid, hm, hi, hhi, q2, h2) && on_line(mid, hm, hi, hhi, r2, h(r2));
    if (left_line && right_line) {
        if (on_line(lo, hlo, mid, hm, hi, hhi)) { // one straight line across
            pl_line_zero(h, lo, hlo, hi, hhi, lo, hi, out);
            return;
        }
        // two pieces meeting exactly at the midpoint
        pl_line_zero(h, lo, hlo, mid, hm, lo, mid, out);
        pl_line_zero(h, mid, hm, hi, hhi, mid, hi, out);
        return;
    }

    // single interior kink: intersect the outer secants and check all samples
    Rat sl_l = (h1 - hlo), run_l = (q1 - lo);
    Rat sl_r = (hhi - h2), run_r = (hi - q2);
    if (sl_l * run_r != sl_r * run_l) {
        Rat ml = sl_l / run_l, mr = sl_r / run_r;
        Rat ux = (hhi - mr * hi - hlo + ml * lo) / (ml - mr);
        if (lo < ux && ux < hi) {
            Rat yx = hlo + ml * (ux - lo);
            auto fits_left = [&](const Rat& x) { return hlo + ml * (x - lo); };
            auto fits_right = [&](const Rat& x) { return hhi + mr * (x - hi); };
            auto fits = [&](const Rat& x, const Rat& y) {
                return y == (x <= ux ? fits_left(x) : fits_right(x));
            };
            // fresh non-dyadic probes: when ux falls on the midpoint the
            // dyadic half-points would coincide with samples already used
            Rat pa = lo + (ux - lo) * Rat(5, 13), pb = ux + (hi - ux) * Rat(5, 13);
            if (fits(q1, h1) && fits(mid, hm) && fits(q2, h2) && h(ux) == yx &&
                h(pa) == fits_left(pa) && h(pb) == fits_right(pb)) {
                if (yx.sign() == 0) out.push_back(ux);
                pl_line_zero(h, lo, hlo, ux, yx, lo, ux, out);
                pl_line_zero(h, ux, yx, hi, hhi, ux, hi, out);
                return;
            }
        }
    }

    pl_zeros(h, lo, mid, hlo, hm, depth + 1, out);
    pl_zeros(h, mid, hi, hm, hhi, depth + 1, out);
}

} // namespace detail

// Full preimage of a Type II point under f on the tree.  Candidate preimages
// sit on the chains of balls around the Type I preimages of the target's
// center and around the poles (plus the chain toward infinity); the solver
// finds the exact heights where the image matches, then certifies the local
// degrees sum to deg f.
inline std::vector<FiberPoint> general_fiber(const BerkMap& f, const TypeIIPoint& x,
                                             const Rat& order = prec::default_order) {
    TypeIIPoint xc = x.canonical();
    // chains: Type I preimages of the center value, poles, and infinity (0-chain)
    PuiseuxPolynomial target = f.num() - f.den().scaled(xc.center);
    // guard precision: walking a chain at height u consumes about 2u of the
    // seed's precision, so expand seeds well beyond the requested order
    Rat boost = order * Rat(2) + Rat(2);
    // Seeds with an honestly reduced truncation stay usable: the chain walk
    // below caps each chain's height from the seed's own truncation, and the
    // closing degree certificate rejects any shortfall.
    std::vector<PuiseuxSeries> seeds;
    if (!target.is_zero())
        for (const auto& r : newton_puiseux_roots(target, boost))
            seeds.push_back(r.series);
    if (!f.den().is_zero() && f.den().degree() >= 1)
        for (const auto& r : newton_puiseux_roots(f.den(), boost))
            seeds.push_back(r.series);
    seeds.push_back(PuiseuxSeries::zero()); // covers the chain toward infinity

    // height bound from the exponent spread of the data
    Rat M = rat_max(Rat(2), xc.radius_val.abs() + Rat(2));
    auto widen = [&M](const PuiseuxPolynomial& p) {
        for (const auto& c : p.coeffs())
            for (const auto& term : c.terms()) M = rat_max(M, term.exponent.abs() + Rat(2));
    };
    widen(f.num());
    widen(f.den());
    widen(target);
    for (const auto& s : seeds)
        if (!s.is_zero()) M = rat_max(M, s.valuation().value().abs() + Rat(2));

    std::vector<FiberPoint> fiber;
    auto record = [&](const TypeIIPoint& y) {
        for (const auto& fp : fiber)
            if (points_equal(fp.point, y)) return;
        MapAction act = apply_map_full(f, y, order);
        if (!points_equal(act.image, xc)) return;
        fiber.push_back({y, act.local_degree});
    };

    for (const auto& a : seeds) {
        Rat lo = -M;
        Rat hi = M;
        ExtRat tr = a.truncation();
        if (tr.is_finite()) hi = rat_min(hi, (tr.value() - Rat(2)) / Rat(2));
        if (!(lo < hi)) continue;
        auto h = [&](const Rat& u) -> Rat {
            TypeIIPoint y = TypeIIPoint::make(a, u);
            return tree_distance(apply_map(f, y, order), xc);
        };
        std::vector<Rat> zeros;
        try {
            detail::pl_zeros(h, lo, hi, h(lo), h(hi), 0, zeros);
        } catch (const numerical_error& e) {
            throw precision_error(std::string("exact zero search failed: ") + e.what());
        }
        for (const auto& u : zeros) record(TypeIIPoint::make(a, u));
    }

    int total = 0;
    for (const auto& fp : fiber) total += fp.local_degree;
    if (total != f.degree())
        throw precision_error("fiber degree count " + std::to_string(total) +
                              " does not certify the map degree " + std::to_string(f.degree()));
    return fiber;
}

} // namespace rattree
