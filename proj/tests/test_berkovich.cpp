#include <catch2/catch_amalgamated.hpp>

#include "rattree/berkovich.hpp"

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

} // namespace

TEST_CASE("tree distance and point identity") {
    TypeIIPoint g = TypeIIPoint::gauss();
    TypeIIPoint sub = TypeIIPoint::make(tp(1, Rat(1)), Rat(2)); // ball(t, e^-2)
    CHECK(tree_distance(g, sub) == Rat(2));
    CHECK(tree_distance(sub, g) == Rat(2));
    CHECK(tree_distance(g, g) == Rat(0));

    // two radius e^-1 balls around 1 and 0 meet at the Gauss point
    TypeIIPoint b1 = TypeIIPoint::make(tp(1, Rat(0)), Rat(1));
    TypeIIPoint b0 = TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1));
    CHECK(tree_distance(b1, b0) == Rat(2));

    // centers differing below the radius give the same point
    TypeIIPoint c1 = TypeIIPoint::make(tp(1, Rat(1)), Rat(1));
    CHECK(points_equal(c1, b0));
    CHECK(tree_distance(c1, b0) == Rat(0));

    // a big ball around t^-1 contains 0, so the canonical center drops it
    TypeIIPoint big = TypeIIPoint::make(tp(1, Rat(-1)), Rat(-4));
    CHECK(big.canonical().center.is_zero());
    CHECK(points_equal(big, TypeIIPoint::make(PuiseuxSeries::zero(), Rat(-4))));

    // triangle inequality on a concrete triple
    TypeIIPoint p3 = TypeIIPoint::make(tp(2, Rat(1, 2)), Rat(3, 2));
    CHECK(tree_distance(b0, p3) + tree_distance(p3, sub) >= tree_distance(b0, sub));
}

TEST_CASE("Gauss seminorm and seminorms at conjugated points") {
    // z^2 - t
    std::vector<PuiseuxSeries> c(3, PuiseuxSeries::zero());
    c[0] = tp(-1, Rat(1));
    c[2] = tp(1, Rat(0));
    PuiseuxPolynomial p(c);
    CHECK(gauss_seminorm(p) == ExtRat(Rat(0)));
    CHECK(seminorm_at(TypeIIPoint::gauss(), p) == ExtRat(Rat(0)));
    CHECK(seminorm_at(TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1, 2)), p) == ExtRat(Rat(1)));
    // at ball(t^(1/2), 2) the factorization (z-sqrt(t))(z+sqrt(t)) gives 2 + 1/2
    CHECK(seminorm_at(TypeIIPoint::make(tp(1, Rat(1, 2)), Rat(2)), p) == ExtRat(Rat(5, 2)));
}

TEST_CASE("degree five family: reductions and images along the central chain") {
    BerkMap f = mcmullen();
    REQUIRE(f.degree() == 5);

    SECTION("Gauss point is fixed with reduction z^2") {
        MapAction act = apply_map_full(f, TypeIIPoint::gauss());
        CHECK(points_equal(act.image, TypeIIPoint::gauss()));
        CHECK(act.local_degree == 2);
        REQUIRE(cpoly::degree(act.reduction.num()) == 2);
        REQUIRE(cpoly::degree(act.reduction.den()) == 0);
        // monic z^2 over a constant
        Complex lead = act.reduction.num()[2] / act.reduction.den()[0];
        CHECK(std::abs(lead - Complex(1, 0)) < 1e-9);
        CHECK(std::abs(act.reduction.num()[0]) < 1e-9);
        CHECK(std::abs(act.reduction.num()[1]) < 1e-9);
    }

    SECTION("branch point at height 1/5 maps to height 2/5 with full local degree") {
        TypeIIPoint x = TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1, 5));
        MapAction act = apply_map_full(f, x);
        CHECK(points_equal(act.image, TypeIIPoint::make(PuiseuxSeries::zero(), Rat(2, 5))));
        CHECK(act.local_degree == 5);
    }

    SECTION("height 1/4 is fixed with reduction of degree 3") {
        TypeIIPoint x = TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1, 4));
        MapAction act = apply_map_full(f, x);
        CHECK(points_equal(act.image, x));
        CHECK(act.local_degree == 3);
        // reduction is 1/w^3 up to scale: numerator constant, denominator degree 3
        CHECK(cpoly::degree(act.reduction.num()) == 0);
        CHECK(cpoly::degree(act.reduction.den()) == 3);
    }

    SECTION("above the branch the image height is 1 - 3s") {
        TypeIIPoint x = TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1, 2));
        MapAction act = apply_map_full(f, x);
        CHECK(points_equal(act.image, TypeIIPoint::make(PuiseuxSeries::zero(), Rat(-1, 2))));
        CHECK(act.local_degree == 3);
    }

    SECTION("below the branch the polynomial part dominates: image height 2s") {
        TypeIIPoint x = TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1, 10));
        MapAction act = apply_map_full(f, x);
        CHECK(points_equal(act.image, TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1, 5))));
        CHECK(act.local_degree == 2);
    }
}

TEST_CASE("escaping family z^2 + 1/t at the Gauss point") {
    std::vector<PuiseuxSeries> nc(3, PuiseuxSeries::zero());
    nc[0] = tp(1, Rat(-1));
    nc[2] = tp(1, Rat(0));
    std::vector<PuiseuxSeries> dc{tp(1, Rat(0))};
    BerkMap f{PuiseuxPolynomial(nc), PuiseuxPolynomial(dc)};
    REQUIRE(f.degree() == 2);

    MapAction act = apply_map_full(f, TypeIIPoint::gauss());
    TypeIIPoint expected = TypeIIPoint::make(tp(1, Rat(-1)), Rat(0));
    CHECK(points_equal(act.image, expected));
    CHECK(act.local_degree == 2);

    SECTION("polynomial disk-image oracle: image of ball(0,s) is ball(f(0), min_k v(a_k)+ks)") {
        for (const Rat& s : {Rat(1, 3), Rat(0), Rat(-2), Rat(3, 4)}) {
            TypeIIPoint img = apply_map(f, TypeIIPoint::make(PuiseuxSeries::zero(), s));
            TypeIIPoint oracle = TypeIIPoint::make(tp(1, Rat(-1)), Rat(2) * s);
            CAPTURE(s.str());
            CHECK(points_equal(img, oracle));
        }
    }

    SECTION("iterating the map matches applying the composed map") {
        BerkMap f2 = f.composed_into(f, 126);
        REQUIRE(f2.degree() == 4);
        TypeIIPoint one_then_two = apply_map(f, apply_map(f, TypeIIPoint::gauss()));
        TypeIIPoint composed = apply_map(f2, TypeIIPoint::gauss());
        CHECK(points_equal(one_then_two, composed));
        // hand value: ball centered t^-2 + t^-1 with radius value -1
        PuiseuxSeries c = tp(1, Rat(-2)) + tp(1, Rat(-1));
        CHECK(points_equal(composed, TypeIIPoint::make(c, Rat(-1))));
    }
}

TEST_CASE("coefficient dust in the family (z^2 + t z)/(1 + t) still reduces to z^2") {
    std::vector<PuiseuxSeries> nc(3, PuiseuxSeries::zero());
    nc[1] = tp(1, Rat(1));
    nc[2] = tp(1, Rat(0));
    std::vector<PuiseuxSeries> dc{tp(1, Rat(0)) + tp(1, Rat(1))};
    BerkMap f{PuiseuxPolynomial(nc), PuiseuxPolynomial(dc)};
    MapAction act = apply_map_full(f, TypeIIPoint::gauss());
    CHECK(points_equal(act.image, TypeIIPoint::gauss()));
    CHECK(act.local_degree == 2);
    CHECK(cpoly::degree(act.reduction.num()) == 2);
    CHECK(cpoly::degree(act.reduction.den()) == 0);
}

TEST_CASE("seminorm functoriality ties images to polynomial seminorms") {
    // [z - c]_{f(x)} = [N - c D]_x - [D]_x, an independent derivation of the image
    BerkMap f = mcmullen();
    auto probe = [&](const TypeIIPoint& x, const PuiseuxSeries& c) {
        TypeIIPoint img = apply_map(f, x);
        PuiseuxPolynomial zminusc =
            PuiseuxPolynomial::variable() - PuiseuxPolynomial::from_series(c);
        ExtRat lhs = seminorm_at(img, zminusc);
        ExtRat den_val = seminorm_at(x, f.den());
        REQUIRE(den_val.is_finite());
        ExtRat rhs = seminorm_at(x, f.num() - f.den().scaled(c)) - den_val.value();
        CAPTURE(x.str(), c.str());
        CHECK(lhs == rhs);
    };
    probe(TypeIIPoint::gauss(), tp(2, Rat(0)));
    probe(TypeIIPoint::gauss(), tp(1, Rat(1)) + tp(3, Rat(0)));
    probe(TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1, 4)), tp(1, Rat(1, 2)));
    probe(TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1, 5)), tp(-1, Rat(0)));
    probe(TypeIIPoint::make(tp(1, Rat(0)), Rat(1, 2)), tp(1, Rat(0)) + tp(1, Rat(1)));
}

TEST_CASE("tangent directions map through the reduction") {
    BerkMap f = mcmullen();
    TypeIIPoint g = TypeIIPoint::gauss();
    // reduction z^2 at the Gauss point
    TangentImage ti = tangent_map(f, g, Direction::at(Complex(1, 0)));
    CHECK(ti.direction == Direction::at(Complex(1, 0)));
    CHECK(ti.multiplicity == 1);
    ti = tangent_map(f, g, Direction::at(Complex(0, 0)));
    CHECK(ti.direction == Direction::at(Complex(0, 0)));
    CHECK(ti.multiplicity == 2);
    ti = tangent_map(f, g, Direction::infinity());
    CHECK(ti.direction == Direction::infinity());
    CHECK(ti.multiplicity == 2);

    // reduction 1/w^3 at height 1/4: zero and infinity swap with multiplicity 3
    TypeIIPoint x = TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1, 4));
    ti = tangent_map(f, x, Direction::at(Complex(0, 0)));
    CHECK(ti.direction == Direction::infinity());
    CHECK(ti.multiplicity == 3);
    ti = tangent_map(f, x, Direction::infinity());
    CHECK(ti.direction == Direction::at(Complex(0, 0)));
    CHECK(ti.multiplicity == 3);
}

TEST_CASE("residue map fibers account for the full degree") {
    TypeIIPoint x = TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1, 5));
    ResidueRationalMap red = reduction_at(mcmullen(), x);
    REQUIRE(red.degree() == 5);

    auto total = [](const std::vector<std::pair<Direction, int>>& fib) {
        int s = 0;
        for (const auto& d : fib) s += d.second;
        return s;
    };
    CHECK(total(red.fiber(Direction::at(Complex(1, 0)))) == 5);
    auto fib_inf = red.fiber(Direction::infinity());
    CHECK(total(fib_inf) == 5);
    // poles: w = 0 with multiplicity 3, plus infinity with multiplicity 2
    bool saw_zero = false, saw_inf = false;
    for (const auto& d : fib_inf) {
        if (d.first.infinite) {
            saw_inf = true;
            CHECK(d.second == 2);
        } else if (std::abs(d.first.v) < 1e-9) {
            saw_zero = true;
            CHECK(d.second == 3);
        }
    }
    CHECK(saw_zero);
    CHECK(saw_inf);
}

TEST_CASE("critical points with multiplicity balance to 2d - 2") {
    BerkMap f = mcmullen();
    auto crit = critical_ends(f);
    int total = 0;
    int at_zero = 0, at_inf = 0, at_fifth = 0;
    for (const auto& ce : crit) {
        total += ce.multiplicity;
        if (ce.point.is_infinity()) {
            at_inf += ce.multiplicity;
        } else if (ce.point.value->is_zero()) {
            at_zero += ce.multiplicity;
        } else {
            CHECK(ce.point.value->valuation() == ExtRat(Rat(1, 5)));
            at_fifth += ce.multiplicity;
        }
    }
    CHECK(total == 2 * 5 - 2);
    CHECK(at_zero == 2);
    CHECK(at_inf == 1);
    CHECK(at_fifth == 5);
}

TEST_CASE("tree fibers of a point certify the degree") {
    SECTION("quadratic escaping family: fiber of the image of the Gauss point") {
        std::vector<PuiseuxSeries> nc(3, PuiseuxSeries::zero());
        nc[0] = tp(1, Rat(-1));
        nc[2] = tp(1, Rat(0));
        BerkMap f{PuiseuxPolynomial(nc),
                  PuiseuxPolynomial::from_series(tp(1, Rat(0)))};
        auto fib = general_fiber(f, TypeIIPoint::make(tp(1, Rat(-1)), Rat(0)));
        REQUIRE(fib.size() == 1);
        CHECK(points_equal(fib[0].point, TypeIIPoint::gauss()));
        CHECK(fib[0].local_degree == 2);
    }

    SECTION("degree five family: fiber of the branch image is the branch point") {
        BerkMap f = mcmullen();
        auto fib = general_fiber(f, TypeIIPoint::make(PuiseuxSeries::zero(), Rat(2, 5)));
        REQUIRE(fib.size() == 1);
        CHECK(points_equal(fib[0].point, TypeIIPoint::make(PuiseuxSeries::zero(), Rat(1, 5))));
        CHECK(fib[0].local_degree == 5);
    }

    SECTION("degree five family: generic point below the Gauss point has two preimages") {
        BerkMap f = mcmullen();
        auto fib = general_fiber(f, TypeIIPoint::make(tp(1, Rat(0)), Rat(1, 2)));
        int total = 0;
        for (const auto& fp : fib) total += fp.local_degree;
        CHECK(total == 5);
    }
}
