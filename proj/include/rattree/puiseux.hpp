#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <sstream>
#include <vector>

#include "rational.hpp"

namespace rattree {

using Complex = std::complex<double>;

namespace prec {
// Relative tolerance below which a coefficient produced by cancellation is
// treated as an exact zero.
inline constexpr double coeff_rel_tol = 1e-9;
// Default working truncation order: exponents below t^6 are tracked.
inline const Rat default_order = Rat(6);
// Largest ramification (root-exponent denominator) the root solver explores.
inline constexpr std::int64_t ram_bound = 60;
// Hard cap on any exponent denominator, guarding integer arithmetic.
inline constexpr std::int64_t max_exponent_den = 1'000'000'000;
// Tolerance for matching residue roots when cancelling common factors.
inline constexpr double residue_cancel_tol = 1e-7;
} // namespace prec

// One term of a truncated Puiseux series: coefficient * t^exponent.
struct PsTerm {
    Rat exponent;
    Complex coeff;
};

// Truncated formal Puiseux series over C: finitely many terms with exact
// rational exponents (strictly increasing) plus a truncation order; exponents
// at or above the truncation order are unknown and never stored.  The zero
// series is the empty list with infinite truncation order.
class PuiseuxSeries {
  public:
    PuiseuxSeries() = default;

    static PuiseuxSeries zero() { return PuiseuxSeries(); }

    static PuiseuxSeries constant(Complex c) { return monomial(c, Rat(0)); }

    static PuiseuxSeries monomial(Complex c, const Rat& e) {
        PuiseuxSeries s;
        if (std::abs(c) != 0.0) {
            check_exponent(e);
            s.terms_.push_back({e, c});
        }
        return s;
    }

    static PuiseuxSeries t_power(const Rat& e) { return monomial(Complex(1.0, 0.0), e); }

    static PuiseuxSeries from_terms(std::vector<PsTerm> terms, ExtRat trunc) {
        std::map<Rat, Complex, RatLess> acc;
        for (const auto& t : terms) acc[t.exponent] += t.coeff;
        PuiseuxSeries s;
        s.trunc_ = trunc;
        for (const auto& [e, c] : acc) {
            if (ExtRat(e) >= trunc) continue;
            if (std::abs(c) == 0.0) continue;
            check_exponent(e);
            s.terms_.push_back({e, c});
        }
        return s;
    }

    const std::vector<PsTerm>& terms() const { return terms_; }
    const ExtRat& truncation() const { return trunc_; }
    bool is_zero() const { return terms_.empty(); }

    // Valuation: exponent of the first term, +infinity for the zero series.
    ExtRat valuation() const {
        if (terms_.empty()) return ExtRat::infinity();
        return ExtRat(terms_.front().exponent);
    }

    Complex leading_coeff() const {
        if (terms_.empty()) throw numerical_error("leading coefficient of zero series");
        return terms_.front().coeff;
    }

    // Coefficient at an exact exponent (zero when absent below truncation).
    Complex coeff_at(const Rat& e) const {
        for (const auto& t : terms_) {
            if (t.exponent == e) return t.coeff;
            if (e < t.exponent) break;
        }
        return Complex(0.0, 0.0);
    }

    bool knows_exponent(const Rat& e) const { return ExtRat(e) < trunc_; }

    PuiseuxSeries truncated(const ExtRat& at) const {
        PuiseuxSeries s;
        s.trunc_ = ext_min(trunc_, at);
        for (const auto& t : terms_)
            if (ExtRat(t.exponent) < s.trunc_) s.terms_.push_back(t);
        return s;
    }

    // Multiply by t^delta (shifts every exponent and the truncation order).
    PuiseuxSeries shifted(const Rat& delta) const {
        PuiseuxSeries s;
        s.trunc_ = trunc_ + delta;
        s.terms_.reserve(terms_.size());
        for (const auto& t : terms_) {
            Rat e = t.exponent + delta;
            check_exponent(e);
            s.terms_.push_back({e, t.coeff});
        }
        return s;
    }

    // Substitute t -> t^r for r > 0 (used by root expansions).
    PuiseuxSeries exponents_scaled(const Rat& r) const {
        if (r.sign() <= 0) throw numerical_error("exponent scale must be positive");
        PuiseuxSeries s;
        s.trunc_ = trunc_.is_infinite() ? ExtRat::infinity() : ExtRat(trunc_.value() * r);
        s.terms_.reserve(terms_.size());
        for (const auto& t : terms_) {
            Rat e = t.exponent * r;
            check_exponent(e);
            s.terms_.push_back({e, t.coeff});
        }
        return s;
    }

    friend PuiseuxSeries operator-(const PuiseuxSeries& a) {
        PuiseuxSeries s = a;
        for (auto& t : s.terms_) t.coeff = -t.coeff;
        return s;
    }

    friend PuiseuxSeries operator+(const PuiseuxSeries& a, const PuiseuxSeries& b) {
        PuiseuxSeries s;
        s.trunc_ = ext_min(a.trunc_, b.trunc_);
        auto ia = a.terms_.begin(), ib = b.terms_.begin();
        while (ia != a.terms_.end() || ib != b.terms_.end()) {
            if (ib == b.terms_.end() || (ia != a.terms_.end() && ia->exponent < ib->exponent)) {
                if (ExtRat(ia->exponent) < s.trunc_) s.terms_.push_back(*ia);
                ++ia;
            } else if (ia == a.terms_.end() || ib->exponent < ia->exponent) {
                if (ExtRat(ib->exponent) < s.trunc_) s.terms_.push_back(*ib);
                ++ib;
            } else {
                Complex c = ia->coeff + ib->coeff;
                double scale = std::abs(ia->coeff) + std::abs(ib->coeff);
                if (ExtRat(ia->exponent) < s.trunc_ && std::abs(c) > prec::coeff_rel_tol * scale)
                    s.terms_.push_back({ia->exponent, c});
                ++ia;
                ++ib;
            }
        }
        return s;
    }

    friend PuiseuxSeries operator-(const PuiseuxSeries& a, const PuiseuxSeries& b) {
        return a + (-b);
    }

    friend PuiseuxSeries operator*(const PuiseuxSeries& a, const PuiseuxSeries& b) {
        ExtRat trunc = ext_min(a.trunc_ + b.valuation(), b.trunc_ + a.valuation());
        if (a.terms_.empty() || b.terms_.empty()) {
            PuiseuxSeries s;
            s.trunc_ = trunc;
            return s;
        }
        // Fast path: when both exponent lattices share a small common
        // denominator and the product window is modest, accumulate into a
        // flat array indexed by the scaled exponent instead of a map.
        {
            std::int64_t D = 1;
            for (const auto& t : a.terms_)
                if ((D = lcm64(D, t.exponent.den())) > 64) break;
            if (D <= 64)
                for (const auto& t : b.terms_)
                    if ((D = lcm64(D, t.exponent.den())) > 64) break;
            if (D <= 64) {
                auto scl = [&](const Rat& e) { return e.num() * (D / e.den()); };
                std::int64_t lo = scl(a.terms_.front().exponent) + scl(b.terms_.front().exponent);
                std::int64_t hi = scl(a.terms_.back().exponent) + scl(b.terms_.back().exponent);
                if (trunc.is_finite()) {
                    // largest k with k/D < trunc
                    const Rat& tv = trunc.value();
                    std::int64_t n = tv.num() * D, d = tv.den();
                    std::int64_t fl = n / d;
                    if (n % d != 0 && n < 0) --fl; // floor
                    hi = std::min(hi, (n % d == 0) ? fl - 1 : fl);
                }
                std::int64_t span = hi - lo + 1;
                if (span > 0 && span <= 4096) {
                    std::vector<std::pair<Complex, double>> acc(
                        static_cast<std::size_t>(span), {Complex(0.0, 0.0), 0.0});
                    for (const auto& ta : a.terms_) {
                        std::int64_t ka = scl(ta.exponent);
                        for (const auto& tb : b.terms_) {
                            std::int64_t k = ka + scl(tb.exponent);
                            if (k > hi) break; // b sorted ascending
                            Complex p = ta.coeff * tb.coeff;
                            auto& slot = acc[static_cast<std::size_t>(k - lo)];
                            slot.first += p;
                            slot.second += std::abs(p);
                        }
                    }
                    PuiseuxSeries s;
                    s.trunc_ = trunc;
                    for (std::int64_t k = lo; k <= hi; ++k) {
                        const auto& slot = acc[static_cast<std::size_t>(k - lo)];
                        if (slot.second == 0.0) continue;
                        if (std::abs(slot.first) <= prec::coeff_rel_tol * slot.second) continue;
                        Rat e(k, D);
                        check_exponent(e);
                        s.terms_.push_back({e, slot.first});
                    }
                    return s;
                }
            }
        }
        std::map<Rat, std::pair<Complex, double>, RatLess> acc;
        for (const auto& ta : a.terms_)
            for (const auto& tb : b.terms_) {
                Rat e = ta.exponent + tb.exponent;
                if (ExtRat(e) >= trunc) continue;
                Complex p = ta.coeff * tb.coeff;
                auto& slot = acc[e];
                slot.first += p;
                slot.second += std::abs(p);
            }
        PuiseuxSeries s;
        s.trunc_ = trunc;
        for (const auto& [e, slot] : acc) {
            if (std::abs(slot.first) <= prec::coeff_rel_tol * slot.second) continue;
            check_exponent(e);
            s.terms_.push_back({e, slot.first});
        }
        return s;
    }

    // Helper for self-correcting iterations (Newton lifting): drop terms at
    // or above `cut` and reset the knowledge bound to `claim`.  The caller
    // must re-certify the tail afterwards; ordinary code wants truncated(),
    // which only ever lowers the bound.
    PuiseuxSeries lifted(const Rat& cut, const ExtRat& claim) const {
        PuiseuxSeries s = *this;
        while (!s.terms_.empty() && !(s.terms_.back().exponent < cut)) s.terms_.pop_back();
        s.trunc_ = claim;
        return s;
    }

    PuiseuxSeries& operator+=(const PuiseuxSeries& o) { return *this = *this + o; }
    PuiseuxSeries& operator-=(const PuiseuxSeries& o) { return *this = *this - o; }
    PuiseuxSeries& operator*=(const PuiseuxSeries& o) { return *this = *this * o; }

    PuiseuxSeries scaled(Complex c) const {
        if (std::abs(c) == 0.0) {
            PuiseuxSeries s;
            s.trunc_ = ExtRat::infinity();
            return s;
        }
        PuiseuxSeries s = *this;
        for (auto& t : s.terms_) t.coeff *= c;
        return s;
    }

    // Multiplicative inverse up to a relative order (default working order).
    // The input must be nonzero; the result carries the implied truncation.
    PuiseuxSeries inverse(const Rat& rel_order = prec::default_order) const {
        if (terms_.empty()) throw numerical_error("inverse of zero series");
        Rat lam = terms_.front().exponent;
        Complex lead = terms_.front().coeff;
        // a = lead * t^lam * (1 + u)
        PuiseuxSeries u = shifted(-lam).scaled(1.0 / lead);
        u.terms_.erase(u.terms_.begin());
        if (u.terms_.empty() && trunc_.is_infinite())
            return monomial(1.0 / lead, -lam); // exact monomial inverse
        ExtRat rel = ext_min(trunc_ + (-lam), ExtRat(rel_order));
        if (rel <= ExtRat(Rat(0)))
            throw precision_error("series inverse: no relative precision left");
        Rat R = rel.value();
        PuiseuxSeries sum = constant(1.0).truncated(R);
        PuiseuxSeries pw = constant(1.0).truncated(R);
        ExtRat uval = u.valuation();
        if (uval.is_finite() && uval.value().sign() <= 0)
            throw numerical_error("series inverse: non-positive remainder valuation");
        if (!u.terms_.empty()) {
            Rat step = uval.value();
            Rat covered(0);
            while (covered < R) {
                pw = (pw * (-u)).truncated(R);
                if (pw.is_zero()) break;
                sum += pw;
                covered += step;
            }
        }
        return sum.shifted(-lam).scaled(1.0 / lead);
    }

    // Evaluate at a concrete parameter value using principal fractional powers.
    Complex evaluate(Complex t0) const {
        if (std::abs(t0) == 0.0) {
            for (const auto& t : terms_)
                if (t.exponent.sign() < 0)
                    throw numerical_error("evaluating negative exponent at t=0");
            Complex v(0.0, 0.0);
            for (const auto& t : terms_)
                if (t.exponent.sign() == 0) v += t.coeff;
            return v;
        }
        Complex lg = std::log(t0);
        Complex v(0.0, 0.0);
        for (const auto& t : terms_) v += t.coeff * std::exp(lg * t.exponent.to_double());
        return v;
    }

    // Two series agree when their terms match (to coefficient tolerance)
    // below the coarser truncation order.
    friend bool agree(const PuiseuxSeries& a, const PuiseuxSeries& b) {
        PuiseuxSeries d = a - b;
        if (d.terms_.empty()) return true;
        // Compare against the magnitude scale of the inputs at each exponent.
        for (const auto& t : d.terms_) {
            double scale = std::abs(a.coeff_at(t.exponent)) + std::abs(b.coeff_at(t.exponent));
            if (scale == 0.0) scale = 1.0;
            if (std::abs(t.coeff) > 1e-7 * scale) return false;
        }
        return true;
    }

    std::string str() const {
        if (terms_.empty()) {
            std::string s = "0";
            if (trunc_.is_finite()) s += " + O(t^" + trunc_.value().str() + ")";
            return s;
        }
        std::ostringstream os;
        bool first = true;
        for (const auto& t : terms_) {
            if (!first) os << " + ";
            first = false;
            os << "(" << format_complex(t.coeff) << ")";
            if (t.exponent.sign() != 0) os << "*t^(" << t.exponent.str() << ")";
        }
        if (trunc_.is_finite()) os << " + O(t^" << trunc_.value().str() << ")";
        return os.str();
    }

    static std::string format_complex(Complex c) {
        std::ostringstream os;
        os.precision(12);
        os << c.real();
        if (c.imag() != 0.0) {
            os << (c.imag() >= 0 ? "+" : "-");
            os << std::abs(c.imag()) << "i";
        }
        return os.str();
    }

  private:
    struct RatLess {
        bool operator()(const Rat& a, const Rat& b) const { return a < b; }
    };

    static void check_exponent(const Rat& e) {
        if (e.den() > prec::max_exponent_den)
            throw numerical_error("exponent denominator overflows the working range: " + e.str());
    }

    std::vector<PsTerm> terms_;
    ExtRat trunc_ = ExtRat::infinity();
};

// Free-function spellings used throughout the analysis code.
inline PuiseuxSeries ps_add(const PuiseuxSeries& a, const PuiseuxSeries& b) { return a + b; }
inline PuiseuxSeries ps_mul(const PuiseuxSeries& a, const PuiseuxSeries& b) { return a * b; }
inline PuiseuxSeries ps_invert(const PuiseuxSeries& a, const Rat& order = prec::default_order) {
    return a.inverse(order);
}
inline ExtRat ps_valuation(const PuiseuxSeries& a) { return a.valuation(); }
inline Complex ps_evaluate(const PuiseuxSeries& a, Complex t0) { return a.evaluate(t0); }

// Norm in multiplicative form: |x| = exp(-valuation).
inline double ps_norm(const PuiseuxSeries& a) {
    ExtRat v = a.valuation();
    if (v.is_infinite()) return 0.0;
    return std::exp(-v.value().to_double());
}

} // namespace rattree
