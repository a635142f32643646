#include <catch2/catch_amalgamated.hpp>

#include "rattree/tree_dynamics.hpp"

using namespace rattree;

namespace {

PuiseuxSeries tp(double c, const Rat& e) { return PuiseuxSeries::monomial(Complex(c, 0.0), e); }

// z^5 + t over z^3, the degree-5 family with a polynomial part z^2.
BerkMap mcmullen() {
    std::vector<PuiseuxSeries> nc(6, PuiseuxSeries::zero());
    nc[0] = tp(1, Rat(1));
    nc[5] = tp(1, Rat(0));
    std::vector<PuiseuxSeries> dc(4, PuiseuxSeries::zero());
    dc[3] = tp(1, Rat(0));
    return BerkMap(PuiseuxPolynomial(nc), PuiseuxPolynomial(dc));
}

// plain squaring map z^2 (constant family, good reduction)
BerkMap squaring() {
    std::vector<PuiseuxSeries> nc(3, PuiseuxSeries::zero());
    nc[2] = tp(1, Rat(0));
    return BerkMap(PuiseuxPolynomial(nc), PuiseuxPolynomial({tp(1, Rat(0))}));
}

// z^2 + 1/t written as (t z^2 + 1) / t
BerkMap escaping() {
    std::vector<PuiseuxSeries> nc(3, PuiseuxSeries::zero());
    nc[0] = tp(1, Rat(0));
    nc[2] = tp(1, Rat(1));
    return BerkMap(PuiseuxPolynomial(nc), PuiseuxPolynomial({tp(1, Rat(1))}));
}

} // namespace

TEST_CASE("piecewise-linear functions: evaluation, extrema, level sets") {
    // the tent-like map s -> min(2s, 1 - 3s) on [0, 1/3]
    PLFunction phi(std::vector<PLPoint>{{Rat(0), Rat(0)}, {Rat(1, 5), Rat(2, 5)}, {Rat(1, 3), Rat(0)}});
    CHECK(phi.segments() == 2);
    CHECK(phi.eval(Rat(1, 10)) == Rat(1, 5));
    CHECK(phi.eval(Rat(1, 4)) == Rat(1, 4));
    CHECK(phi.slope_at(0) == Rat(2));
    CHECK(phi.slope_at(1) == Rat(-3));
    CHECK(phi.maximum().x == Rat(1, 5));
    CHECK(phi.maximum().y == Rat(2, 5));
    CHECK(phi.minimum().y == Rat(0));

    auto at_third = phi.solve(Rat(1, 3));
    REQUIRE(at_third.points.size() == 2);
    CHECK(at_third.points[0] == Rat(1, 6));
    CHECK(at_third.points[1] == Rat(2, 9));
    CHECK(at_third.intervals.empty());

    // the peak value is hit exactly once even though both segments touch it
    auto at_peak = phi.solve(Rat(2, 5));
    REQUIRE(at_peak.points.size() == 1);
    CHECK(at_peak.points[0] == Rat(1, 5));

    auto fixed = phi.solve_identity();
    REQUIRE(fixed.points.size() == 2);
    CHECK(fixed.points[0] == Rat(0));
    CHECK(fixed.points[1] == Rat(1, 4));

    PLFunction left = phi.restricted(Rat(0), Rat(1, 6));
    CHECK(left.segments() == 1);
    CHECK(left.slope_at(0) == Rat(2));
    CHECK(left.hi_value() == Rat(1, 3));

    // flat pieces come back as whole intervals
    PLFunction vee(std::vector<PLPoint>{
        {Rat(-2), Rat(2)}, {Rat(-1, 2), Rat(1, 2)}, {Rat(1, 2), Rat(1, 2)}, {Rat(2), Rat(2)}});
    auto level = vee.solve(Rat(1, 2));
    CHECK(level.points.empty());
    REQUIRE(level.intervals.size() == 1);
    CHECK(level.intervals[0].first == Rat(-1, 2));
    CHECK(level.intervals[0].second == Rat(1, 2));
    CHECK(vee.minimum().y == Rat(1, 2));
}

TEST_CASE("exact fits of sampled piecewise-linear data") {
    auto tent = [](const Rat& s) { return rat_min(Rat(2) * s, Rat(1) - Rat(3) * s); };
    PLFunction fit = pl_fit(tent, Rat(0), Rat(1, 3));
    REQUIRE(fit.points().size() == 3);
    CHECK(fit.points()[1].x == Rat(1, 5));
    CHECK(fit.points()[1].y == Rat(2, 5));
    CHECK(fit.eval(Rat(3, 11)) == tent(Rat(3, 11)));

    auto kinked = [](const Rat& s) { return (Rat(1) - Rat(4) * s).abs(); };
    PLFunction vfit = pl_fit(kinked, Rat(0), Rat(1));
    REQUIRE(vfit.points().size() == 3);
    CHECK(vfit.points()[1].x == Rat(1, 4));
    CHECK(vfit.points()[1].y == Rat(0));

    auto affine = [](const Rat& s) { return s / Rat(2) + Rat(7); };
    CHECK(pl_fit(affine, Rat(-3), Rat(5)).points().size() == 2);

    auto plateau = [](const Rat& s) { return rat_max(Rat(1, 2), s.abs()); };
    PLFunction pfit = pl_fit(plateau, Rat(-2), Rat(2));
    REQUIRE(pfit.points().size() == 4);
    CHECK(pfit.points()[1].x == Rat(-1, 2));
    CHECK(pfit.points()[2].x == Rat(1, 2));
    CHECK(pfit.minimum().y == Rat(1, 2));

    // a genuinely curved function cannot be certified as piecewise linear
    auto curved = [](const Rat& s) { return s * s; };
    CHECK_THROWS_AS(pl_fit(curved, Rat(0), Rat(1)), precision_error);
}

TEST_CASE("skeleton of the degree-five family") {
    BerkMap f = mcmullen();
    Skeleton sk = Skeleton::build(f);

    // ends: the double critical root at 0 plus the five simple ones at level 1/5
    REQUIRE(sk.chain_count() == 6);
    CHECK(sk.ends()[0].is_zero());
    for (int i = 1; i < 6; ++i) CHECK(sk.ends()[i].valuation() == ExtRat(Rat(1, 5)));
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) CHECK(sk.meet(i, j) == Rat(1, 5));
    CHECK(sk.top() == Rat(4));
    for (int i = 0; i < 6; ++i) CHECK(sk.cap(i) == Rat(5));

    // shared segments appear once: the trunk splits at 1/5 into six branches,
    // five of which are new; below 1/5 all chains describe the same segment
    REQUIRE(sk.edges().size() == 7);
    int trunk = 0, branches = 0;
    for (const auto& e : sk.edges()) {
        if (e.chain == 0 && e.lo == -sk.top() && e.hi == Rat(1, 5)) ++trunk;
        if (e.lo == Rat(1, 5) && e.hi == Rat(5)) ++branches;
    }
    CHECK(trunk == 1);
    CHECK(branches == 6);
}

TEST_CASE("locating points relative to the skeleton") {
    BerkMap f = mcmullen();
    Skeleton sk = Skeleton::build(f);

    auto on_axis = sk.locate(TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1, 10)));
    CHECK(on_axis.on_tree);
    CHECK(on_axis.height == Rat(1, 10));
    CHECK(on_axis.excess == Rat(0));

    auto deep = sk.locate(TypeIIPoint::make(sk.ends()[2], Rat(3)));
    CHECK(deep.on_tree);
    CHECK(deep.chain == 2);
    CHECK(deep.height == Rat(3));

    // a ball around 2 of radius e^-3 hangs off the tree at the Gauss point
    auto off = sk.locate(TypeIIPoint::make(tp(2, Rat(0)), Rat(3)));
    CHECK(!off.on_tree);
    CHECK(off.height == Rat(0));
    CHECK(off.excess == Rat(3));

    auto unit = sk.locate(TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1)));
    CHECK(sk.distance(off, unit) ==
          tree_distance(TypeIIPoint::make(tp(2, Rat(0)), Rat(3)),
                        TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1))));
}

TEST_CASE("fixed points of the induced tree map") {
    SECTION("degree-five family: the Gauss point and the branch balance point") {
        BerkMap f = mcmullen();
        Skeleton sk = Skeleton::build(f);
        auto fixed = fixed_points_with_degree(f, sk);
        REQUIRE(fixed.size() == 2);
        CHECK(fixed[0].height == Rat(0));
        CHECK(points_equal(fixed[0].point, TypeIIPoint::gauss()));
        CHECK(fixed[0].degree == 2);
        CHECK(fixed[1].height == Rat(1, 4));
        CHECK(points_equal(fixed[1].point,
                           TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1, 4))));
        CHECK(fixed[1].degree == 3);
    }
    SECTION("good reduction: only the Gauss point, with full degree") {
        BerkMap f = squaring();
        auto fixed = fixed_points_with_degree(f, Skeleton::build(f));
        REQUIRE(fixed.size() == 1);
        CHECK(points_equal(fixed[0].point, TypeIIPoint::gauss()));
        CHECK(fixed[0].degree == 2);
    }
    SECTION("escaping family: the tree map has no fixed point on the skeleton") {
        BerkMap f = escaping();
        CHECK(fixed_points_with_degree(f, Skeleton::build(f)).empty());
    }
}

TEST_CASE("periodic ends and cycle multipliers") {
    SECTION("degree-five family, fixed ends") {
        auto rep = periodic_ends(mcmullen(), 1);
        CHECK(rep.q_effective == 1);
        REQUIRE(rep.records.size() == 6); // five finite fixed ends plus infinity
        int indifferent = 0, attracting = 0;
        std::vector<Rat> vals;
        for (const auto& r : rep.records) {
            CHECK(r.period == 1);
            CHECK(r.translation_length == Rat(0));
            if (r.type == PeriodicEndRecord::Type::indifferent) {
                ++indifferent;
                REQUIRE(r.multiplier_valuation.is_finite());
                CHECK(r.multiplier_valuation.value() == Rat(0));
                vals.push_back(r.cycle[0].value->valuation().value());
            }
            if (r.type == PeriodicEndRecord::Type::attracting) {
                ++attracting;
                CHECK(r.multiplier_valuation.is_infinite()); // superattracting infinity
                CHECK(r.cycle[0].is_infinity());
            }
        }
        CHECK(indifferent == 5);
        CHECK(attracting == 1);
        std::sort(vals.begin(), vals.end());
        CHECK(vals.front() == Rat(0));          // the end near z = 1
        for (int i = 1; i < 5; ++i) CHECK(vals[i] == Rat(1, 4));
    }
    SECTION("degree-five family, all period-three cycles are indifferent") {
        auto rep = periodic_ends(mcmullen(), 3);
        CHECK(rep.q_requested == 3);
        CHECK(rep.q_effective == 3); // 25 * 5 + 1 = 126 just fits the composition cap
        REQUIRE(rep.records.size() == 46);
        int total = 0, fixed_finite = 0, cycles3 = 0, at_infinity = 0;
        // three-cycles grouped by the largest valuation along the cycle; the
        // heights follow the tent-like map s -> min(2s, 1 - 3s) on [0, 1/3],
        // whose period-three orbits are {4,1,2}/13, {5,4,2}/17, the kink at
        // 1/4, and the endpoint 0
        int top14 = 0, top413 = 0, top517 = 0, top0 = 0;
        for (const auto& r : rep.records) {
            total += r.period;
            if (r.cycle[0].is_infinity()) {
                ++at_infinity;
                CHECK(r.period == 1);
                CHECK(r.type == PeriodicEndRecord::Type::attracting);
                CHECK(r.multiplier_valuation.is_infinite());
                continue;
            }
            if (r.period == 1) {
                ++fixed_finite;
                CHECK(r.type == PeriodicEndRecord::Type::indifferent);
                continue;
            }
            CHECK(r.period == 3);
            ++cycles3;
            CHECK(r.type == PeriodicEndRecord::Type::indifferent);
            CHECK(r.multiplier_valuation == ExtRat(Rat(0)));
            CHECK(r.translation_length == Rat(0));
            Rat top(-1);
            for (const auto& e : r.cycle) {
                REQUIRE(!e.is_infinity());
                top = rat_max(top, e.value->valuation().value());
            }
            if (top == Rat(1, 4)) ++top14;
            else if (top == Rat(4, 13)) ++top413;
            else if (top == Rat(5, 17)) ++top517;
            else if (top == Rat(0)) ++top0;
        }
        CHECK(total == 126); // fixed points of the third iterate, infinity included
        CHECK(at_infinity == 1);
        CHECK(fixed_finite == 5);
        CHECK(cycles3 == 40);
        CHECK(top14 == 8);
        CHECK(top413 == 13);
        CHECK(top517 == 17);
        CHECK(top0 == 2);
    }
    SECTION("good reduction: the effective period is capped by the composed degree") {
        auto rep = periodic_ends(squaring(), 7);
        CHECK(rep.q_requested == 7);
        CHECK(rep.q_effective == 6); // 64 ends fit the cap, one more doubling would not
        int total = 0, p1 = 0, p2 = 0, p3 = 0, p6 = 0, superattracting = 0;
        for (const auto& r : rep.records) {
            total += r.period;
            if (r.period == 1) ++p1;
            else if (r.period == 2) ++p2;
            else if (r.period == 3) ++p3;
            else if (r.period == 6) ++p6;
            if (r.multiplier_valuation.is_infinite()) {
                ++superattracting;
                CHECK(r.type == PeriodicEndRecord::Type::attracting);
                CHECK(r.period == 1);
            } else {
                // every other multiplier is a power of two, a unit downstairs
                CHECK(r.type == PeriodicEndRecord::Type::indifferent);
                CHECK(r.multiplier_valuation == ExtRat(Rat(0)));
            }
        }
        CHECK(total == 65); // 64 fixed points of the sixth iterate plus infinity
        CHECK(p1 == 3);     // zero, one, and infinity
        CHECK(p2 == 1);
        CHECK(p3 == 2);
        CHECK(p6 == 9);
        CHECK(superattracting == 2);
    }
    SECTION("escaping family: repelling fixed ends of length one half") {
        auto rep = periodic_ends(escaping(), 1);
        int repelling = 0, attracting = 0;
        for (const auto& r : rep.records) {
            if (r.type == PeriodicEndRecord::Type::repelling) {
                ++repelling;
                CHECK(r.translation_length == Rat(1, 2));
                CHECK(r.multiplier_valuation == ExtRat(Rat(-1, 2)));
                CHECK(r.cycle[0].value->valuation() == ExtRat(Rat(-1, 2)));
            }
            if (r.type == PeriodicEndRecord::Type::attracting) {
                ++attracting;
                CHECK(r.cycle[0].is_infinity());
            }
        }
        CHECK(repelling == 2);
        CHECK(attracting == 1);
    }
    SECTION("escaping family: a genuine two-cycle with longer translation") {
        auto rep = periodic_ends(escaping(), 2);
        CHECK(rep.q_effective == 2);
        bool found = false;
        for (const auto& r : rep.records)
            if (r.period == 2) {
                found = true;
                CHECK(r.type == PeriodicEndRecord::Type::repelling);
                CHECK(r.translation_length == Rat(1));
                CHECK(r.cycle.size() == 2);
            }
        CHECK(found);
    }
}

TEST_CASE("interval model extraction and verdict") {
    SECTION("degree-five family: two branches of degrees two and three") {
        BerkMap f = mcmullen();
        Skeleton sk = Skeleton::build(f);
        auto fixed = fixed_points_with_degree(f, sk);
        auto ends = periodic_ends(f, 1);
        auto res = extract_interval_model(f, sk, fixed, ends);
        REQUIRE(res.model.has_value());
        const PLIntervalModel& m = *res.model;
        CHECK(res.chain == 0);
        CHECK(m.a() == Rat(0));
        CHECK(m.b() == Rat(1, 3));
        REQUIRE(m.pieces().size() == 2);
        CHECK(m.pieces()[0].lo == Rat(0));
        CHECK(m.pieces()[0].hi == Rat(1, 6));
        CHECK(m.pieces()[0].degree == 2);
        CHECK(m.pieces()[0].sign == 1);
        CHECK(m.pieces()[1].lo == Rat(2, 9));
        CHECK(m.pieces()[1].hi == Rat(1, 3));
        CHECK(m.pieces()[1].degree == 3);
        CHECK(m.pieces()[1].sign == -1);
        CHECK(m.reciprocal_degree_sum() == Rat(5, 6));
        REQUIRE(m.gaps().size() == 1);
        CHECK(m.gaps()[0].exit == Rat(1, 3));
        CHECK(nestedness_verdict(res, ends) == NestednessVerdict::nested);
    }
    SECTION("good reduction: the model degenerates to the fixed point") {
        BerkMap f = squaring();
        Skeleton sk = Skeleton::build(f);
        auto fixed = fixed_points_with_degree(f, sk);
        auto ends = periodic_ends(f, 1);
        auto res = extract_interval_model(f, sk, fixed, ends);
        CHECK(!res.model.has_value());
        CHECK(!res.absent_reason.empty());
        CHECK_THROWS_AS(nestedness_verdict(res, ends), classification_error);
    }
    SECTION("escaping family: repelling ends rule out a bounded model") {
        BerkMap f = escaping();
        Skeleton sk = Skeleton::build(f);
        auto fixed = fixed_points_with_degree(f, sk);
        auto ends = periodic_ends(f, 1);
        CHECK_THROWS_AS(extract_interval_model(f, sk, fixed, ends), classification_error);
        CHECK(nestedness_verdict(IntervalModelResult{}, ends) ==
              NestednessVerdict::unbounded_spectrum);
    }
}

TEST_CASE("normalization radius") {
    SECTION("degree-five family: exactly 1/11, attained between the branches") {
        BerkMap f = mcmullen();
        auto r = normalization_radius(f, Skeleton::build(f));
        CHECK(r.value == Rat(1, 11));
        CHECK(r.height == Rat(2, 11));
        CHECK(points_equal(r.argmin, TypeIIPoint::make(PuiseuxSeries::zero(), Rat(2, 11))));
    }
    SECTION("good reduction: radius zero at the Gauss point") {
        BerkMap f = squaring();
        auto r = normalization_radius(f, Skeleton::build(f));
        CHECK(r.value == Rat(0));
        CHECK(r.height == Rat(0));
    }
    SECTION("escaping family: radius one half on a plateau") {
        BerkMap f = escaping();
        auto r = normalization_radius(f, Skeleton::build(f));
        CHECK(r.value == Rat(1, 2));
        CHECK(r.height <= Rat(-1, 2));
    }
}

TEST_CASE("abstract interval models: iteration and Cantor structure") {
    PLIntervalModel m = PLIntervalModel::standard({5, 4, 3}, Rat(0), Rat(1));
    REQUIRE(m.pieces().size() == 3);
    CHECK(m.pieces()[0].hi == Rat(1, 5));
    CHECK(m.pieces()[1].lo == Rat(37, 120));
    CHECK(m.pieces()[1].hi == Rat(67, 120));
    CHECK(m.pieces()[2].lo == Rat(2, 3));
    CHECK(m.pieces()[2].hi == Rat(1));
    CHECK(m.reciprocal_degree_sum() == Rat(47, 60));
    REQUIRE(m.gaps().size() == 2);
    CHECK(m.gaps()[0].hi - m.gaps()[0].lo == m.gaps()[1].hi - m.gaps()[1].lo);
    CHECK(m.gaps()[0].exit == Rat(1)); // first piece rises into the top endpoint
    CHECK(m.gaps()[1].exit == Rat(0));

    // an orbit that falls into a gap escapes through the recorded endpoint
    auto orbit = pl_iterate(m, Rat(1, 2), 10);
    REQUIRE(orbit.size() == 2);
    CHECK(orbit[1].x == Rat(7, 30));
    CHECK(orbit[1].escaped);
    CHECK(orbit[1].exit_endpoint == Rat(1));

    auto still = pl_iterate(m, Rat(0), 5);
    CHECK(still.size() == 6);
    CHECK(!still.back().escaped);
    CHECK(still.back().x == Rat(0));

    // depth-n surviving intervals: 3^n of them, of total length (47/60)^n
    auto depth1 = pl_cantor_intervals(m, 1);
    REQUIRE(depth1.size() == 3);
    CHECK(depth1[0].first == Rat(0));
    CHECK(depth1[0].second == Rat(1, 5));
    CHECK(depth1[1].first == m.pieces()[1].lo);
    CHECK(depth1[2].second == Rat(1));

    auto depth5 = pl_cantor_intervals(m, 5);
    REQUIRE(depth5.size() == 243);
    Rat total(0);
    for (const auto& iv : depth5) {
        CHECK(iv.first < iv.second);
        total += iv.second - iv.first;
    }
    CHECK(total == Rat(229345007, 777600000)); // (47/60)^5
    // each depth-5 interval sits inside a depth-4 interval
    auto depth4 = pl_cantor_intervals(m, 4);
    for (const auto& iv : depth5) {
        bool inside = false;
        for (const auto& big : depth4)
            if (!(iv.first < big.first) && !(big.second < iv.second)) inside = true;
        CHECK(inside);
    }

    CHECK(predicted_modulus_growth(Rat(1, 3), std::exp(-2.0 * 3.14159265358979323846)) ==
          Catch::Approx(1.0 / 3.0).epsilon(1e-12));
}
