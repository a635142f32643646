#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <random>

#include "rattree/puiseux.hpp"
#include "rattree/puiseux_poly.hpp"

using namespace rattree;

namespace {

PuiseuxSeries tp(double c, Rat e) { return PuiseuxSeries::monomial(Complex(c, 0.0), e); }

// Independent oracle: brute-force lower-hull membership.  A point (i, v_i) is
// a hull vertex iff no chord between two other points passes strictly below it
// and it is not above any chord covering its abscissa.
bool on_lower_hull(const std::vector<std::pair<int, Rat>>& pts, std::size_t idx) {
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            if (a == idx || b == idx) continue;
            if (pts[a].first <= pts[idx].first && pts[idx].first <= pts[b].first &&
                pts[a].first < pts[b].first) {
                // height of chord at idx's abscissa
                Rat tspan = Rat(pts[b].first - pts[a].first);
                Rat h = pts[a].second +
                        (pts[b].second - pts[a].second) * Rat(pts[idx].first - pts[a].first) / tspan;
                if (h < pts[idx].second) return false;
            }
        }
    return true;
}

} // namespace

TEST_CASE("series arithmetic basics") {
    // (2t^-1 + 1) + (-2t^-1 + t^(1/2)) = 1 + t^(1/2)
    PuiseuxSeries a = tp(2, Rat(-1)) + tp(1, Rat(0));
    PuiseuxSeries b = tp(-2, Rat(-1)) + tp(1, Rat(1, 2));
    PuiseuxSeries s = a + b;
    REQUIRE(s.terms().size() == 2);
    CHECK(s.coeff_at(Rat(0)) == Complex(1.0, 0.0));
    CHECK(s.coeff_at(Rat(1, 2)) == Complex(1.0, 0.0));
    CHECK(s.valuation() == ExtRat(Rat(0)));

    // (1+t)(1-t) = 1 - t^2, and valuations add under multiplication.
    PuiseuxSeries p = (tp(1, Rat(0)) + tp(1, Rat(1))) * (tp(1, Rat(0)) + tp(-1, Rat(1)));
    CHECK(p.coeff_at(Rat(0)) == Complex(1.0, 0.0));
    CHECK(p.coeff_at(Rat(1)) == Complex(0.0, 0.0));
    CHECK(p.coeff_at(Rat(2)) == Complex(-1.0, 0.0));

    CHECK((tp(1, Rat(-1)) * tp(1, Rat(2))).valuation() == ExtRat(Rat(1)));
}

TEST_CASE("zero series and truncation bookkeeping") {
    PuiseuxSeries z = PuiseuxSeries::zero();
    CHECK(z.is_zero());
    CHECK(z.truncation().is_infinite());
    CHECK(z.valuation().is_infinite());
    CHECK(ps_norm(z) == 0.0);

    // add: truncation is the coarser of the two inputs
    PuiseuxSeries a = (tp(1, Rat(0)) + tp(1, Rat(1))).truncated(ExtRat(Rat(3)));
    PuiseuxSeries b = tp(2, Rat(0)).truncated(ExtRat(Rat(2)));
    CHECK((a + b).truncation() == ExtRat(Rat(2)));

    // mul: truncation shifts with the other factor's valuation
    PuiseuxSeries c = tp(1, Rat(2)); // exact monomial t^2
    CHECK((a * c).truncation() == ExtRat(Rat(5)));

    // cancellation produces an empty list, still marked with the truncation
    PuiseuxSeries d = a - a;
    CHECK(d.is_zero());
}

TEST_CASE("series inverse") {
    // 1/(1-t) = 1 + t + t^2 + ... up to the working order
    PuiseuxSeries one_minus_t = tp(1, Rat(0)) + tp(-1, Rat(1));
    PuiseuxSeries inv = ps_invert(one_minus_t);
    for (int k = 0; k < 6; ++k) {
        CHECK(std::abs(inv.coeff_at(Rat(k)) - Complex(1.0, 0.0)) < 1e-12);
    }
    // round trip: a * a^{-1} = 1 up to truncation
    PuiseuxSeries prod = one_minus_t * inv;
    CHECK(std::abs(prod.coeff_at(Rat(0)) - Complex(1.0, 0.0)) < 1e-12);
    for (int k = 1; k < 5; ++k) CHECK(std::abs(prod.coeff_at(Rat(k))) < 1e-12);

    // monomial inverse is exact
    PuiseuxSeries m = PuiseuxSeries::monomial(Complex(0.0, 2.0), Rat(-3, 2));
    PuiseuxSeries mi = ps_invert(m);
    CHECK(mi.truncation().is_infinite());
    CHECK(mi.valuation() == ExtRat(Rat(3, 2)));
    CHECK(std::abs(mi.leading_coeff() - Complex(0.0, -0.5)) < 1e-15);
}

TEST_CASE("valuation and norm") {
    PuiseuxSeries s = tp(3, Rat(-1, 2)) + tp(1, Rat(0)) + tp(5, Rat(2));
    CHECK(s.valuation() == ExtRat(Rat(-1, 2)));
    CHECK(ps_norm(s) == Catch::Approx(std::exp(0.5)));
}

TEST_CASE("series evaluation uses principal fractional powers") {
    PuiseuxSeries s = tp(1, Rat(1, 2));
    Complex t0(1e-4, 0.0);
    CHECK(std::abs(ps_evaluate(s, t0) - Complex(1e-2, 0.0)) < 1e-15);

    // t0 on the negative real axis: principal branch of t^(1/2)
    Complex tneg(-1e-4, 0.0);
    Complex expect = std::exp(0.5 * std::log(tneg));
    CHECK(std::abs(ps_evaluate(s, tneg) - expect) < 1e-15);

    PuiseuxSeries lau = tp(2, Rat(-1)) + tp(1, Rat(1));
    Complex t1(0.01, 0.02);
    CHECK(std::abs(ps_evaluate(lau, t1) - (2.0 / t1 + t1)) < 1e-12);

    CHECK_THROWS_AS(ps_evaluate(lau, Complex(0.0, 0.0)), numerical_error);
}

TEST_CASE("newton polygon of z^2 - t") {
    PuiseuxPolynomial p({tp(-1, Rat(1)), PuiseuxSeries::zero(), tp(1, Rat(0))});
    auto segs = newton_polygon(p);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].slope == Rat(-1, 2));
    CHECK(segs[0].length == 2);
}

TEST_CASE("newton polygon of z^5 - z^4 + t") {
    PuiseuxPolynomial p({tp(1, Rat(1)), PuiseuxSeries::zero(), PuiseuxSeries::zero(),
                         PuiseuxSeries::zero(), tp(-1, Rat(0)), tp(1, Rat(0))});
    auto segs = newton_polygon(p);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].slope == Rat(-1, 4));
    CHECK(segs[0].length == 4);
    CHECK(segs[1].slope == Rat(0));
    CHECK(segs[1].length == 1);

    // Oracle: recompute the hull by brute force over the explicit point set.
    std::vector<std::pair<int, Rat>> pts = {{0, Rat(1)}, {4, Rat(0)}, {5, Rat(0)}};
    CHECK(on_lower_hull(pts, 0));
    CHECK(on_lower_hull(pts, 1));
    CHECK(on_lower_hull(pts, 2));
    // slopes between consecutive hull vertices
    CHECK((pts[1].second - pts[0].second) / Rat(pts[1].first - pts[0].first) == segs[0].slope);
    CHECK((pts[2].second - pts[1].second) / Rat(pts[2].first - pts[1].first) == segs[1].slope);
}

TEST_CASE("newton-puiseux roots of z^2 - z + 1/t") {
    // roots have valuation -1/2 with leading coefficients +-i
    PuiseuxPolynomial p({tp(1, Rat(-1)), tp(-1, Rat(0)), tp(1, Rat(0))});
    auto roots = newton_puiseux_roots(p, Rat(4));
    REQUIRE(roots.size() == 2);
    int mult_total = 0;
    for (const auto& r : roots) {
        CHECK(r.resolved);
        mult_total += r.multiplicity;
        REQUIRE(r.series.valuation() == ExtRat(Rat(-1, 2)));
        Complex lead = r.series.leading_coeff();
        CHECK(std::abs(std::abs(lead.imag()) - 1.0) < 1e-9);
        CHECK(std::abs(lead.real()) < 1e-9);
        // residual: p(root) vanishes to the requested order
        PuiseuxSeries res = p.evaluate(r.series);
        CHECK(res.valuation() >= ExtRat(Rat(4) + Rat(-1)));
    }
    CHECK(mult_total == 2);

    // Oracle: quadratic formula at a concrete parameter value.
    Complex t0(1e-6, 0.0);
    Complex disc = std::sqrt(Complex(1.0, 0.0) - 4.0 / t0);
    Complex q1 = (Complex(1.0, 0.0) + disc) / 2.0;
    Complex q2 = (Complex(1.0, 0.0) - disc) / 2.0;
    for (const auto& r : roots) {
        Complex v = ps_evaluate(r.series, t0);
        double d = std::min(std::abs(v - q1), std::abs(v - q2));
        CHECK(d < 1e-6 * std::abs(v));
    }
}

TEST_CASE("newton-puiseux roots of z^5 - z^4 + t") {
    PuiseuxPolynomial p({tp(1, Rat(1)), PuiseuxSeries::zero(), PuiseuxSeries::zero(),
                         PuiseuxSeries::zero(), tp(-1, Rat(0)), tp(1, Rat(0))});
    auto roots = newton_puiseux_roots(p, Rat(3));
    int mult_total = 0;
    int quarter = 0, unit = 0;
    for (const auto& r : roots) {
        mult_total += r.multiplicity;
        REQUIRE(r.resolved);
        ExtRat v = r.series.valuation();
        if (v == ExtRat(Rat(1, 4))) ++quarter;
        if (v == ExtRat(Rat(0))) {
            ++unit;
            // root near 1: expansion 1 - t + O(t^2)
            CHECK(std::abs(r.series.coeff_at(Rat(0)) - Complex(1.0, 0.0)) < 1e-9);
            CHECK(std::abs(r.series.coeff_at(Rat(1)) - Complex(-1.0, 0.0)) < 1e-6);
        }
    }
    CHECK(mult_total == 5);
    CHECK(quarter == 4);
    CHECK(unit == 1);

    // Oracle: companion-matrix roots of the specialized complex polynomial.
    Complex t0(1e-5, 0.0);
    cpoly::Poly pc = {t0, 0.0, 0.0, 0.0, Complex(-1.0, 0.0), Complex(1.0, 0.0)};
    auto numeric = cpoly::roots(pc);
    REQUIRE(numeric.size() == 5);
    for (const auto& r : roots) {
        Complex v = ps_evaluate(r.series, t0);
        double best = 1e300;
        for (const auto& n : numeric) best = std::min(best, std::abs(v - n));
        CHECK(best < 1e-6 * std::max(1e-3, std::abs(v)));
    }
}

TEST_CASE("repeated roots report multiplicity") {
    // (z - t^(1/2))^2 = z^2 - 2 t^(1/2) z + t
    PuiseuxPolynomial p({tp(1, Rat(1)), tp(-2, Rat(1, 2)), tp(1, Rat(0))});
    auto roots = newton_puiseux_roots(p, Rat(3));
    int mult_total = 0;
    for (const auto& r : roots) mult_total += r.multiplicity;
    CHECK(mult_total == 2);
    bool found_double = false;
    for (const auto& r : roots)
        if (r.multiplicity == 2 && r.series.valuation() == ExtRat(Rat(1, 2))) found_double = true;
    CHECK(found_double);
}

TEST_CASE("roots at zero are reported with multiplicity") {
    // z^3 (z - 1) has a triple root at 0
    PuiseuxPolynomial p({PuiseuxSeries::zero(), PuiseuxSeries::zero(), PuiseuxSeries::zero(),
                         tp(-1, Rat(0)), tp(1, Rat(0))});
    auto roots = newton_puiseux_roots(p, Rat(3));
    bool zero3 = false, one1 = false;
    for (const auto& r : roots) {
        if (r.series.is_zero() && r.multiplicity == 3) zero3 = true;
        if (!r.series.is_zero() && r.series.valuation() == ExtRat(Rat(0)) &&
            std::abs(r.series.leading_coeff() - Complex(1.0, 0.0)) < 1e-9)
            one1 = true;
    }
    CHECK(zero3);
    CHECK(one1);
}

TEST_CASE("ramification guard") {
    // point heights and coefficients may carry fine denominators ...
    CHECK_NOTHROW(PuiseuxSeries::t_power(Rat(1, 61)));
    // ... but the root solver refuses to ramify beyond the supported bound:
    // z^61 - t would need exponent lattice 1/61
    std::vector<PuiseuxSeries> c(62, PuiseuxSeries::zero());
    c[0] = PuiseuxSeries::monomial(Complex(-1.0, 0.0), Rat(1));
    c[61] = PuiseuxSeries::constant(1.0);
    CHECK_THROWS_AS(newton_puiseux_roots(PuiseuxPolynomial(c)), precision_error);
}
