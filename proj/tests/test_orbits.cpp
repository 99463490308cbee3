#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "treedyn/examples.hpp"
#include "treedyn/orbits.hpp"

using namespace treedyn;

namespace {
using Q = Rational;
}

TEST_CASE("compute_orbit records the full trajectory") {
    auto sys = library_tent<Q>(Q(2));
    auto rec = compute_orbit(sys.map, {0, Q(1, 7)}, 4);
    REQUIRE(rec.points.size() == 5);
    CHECK(rec.points[0].offset == Q(1, 7));
    CHECK(rec.points[1].offset == Q(2, 7));
    CHECK(rec.points[2].offset == Q(4, 7));
    CHECK(rec.points[3].offset == Q(6, 7));
    CHECK(rec.points[4].offset == Q(2, 7));
    CHECK_THROWS_AS(compute_orbit(sys.map, {0, Q(0)}, -1), InputError);
}

TEST_CASE("exact period detection finds minimal period and preperiod") {
    auto sys = library_tent<Q>(Q(2));
    {
        auto rep = detect_period(sys.map, {0, Q(1, 7)}, 100);
        CHECK(rep.status == PeriodicityStatus::eventually_periodic);
        CHECK(rep.period == 3);
        CHECK(rep.preperiod == 1);
    }
    {
        auto rep = detect_period(sys.map, {0, Q(2, 7)}, 100);
        CHECK(rep.status == PeriodicityStatus::periodic);
        CHECK(rep.period == 3);
        CHECK(rep.preperiod == 0);
    }
    {
        auto rep = detect_period(sys.map, {0, Q(2, 3)}, 100);
        CHECK(rep.status == PeriodicityStatus::periodic);
        CHECK(rep.period == 1);
    }
    {
        auto rep = detect_period(sys.map, {0, Q(2, 5)}, 100);
        CHECK(rep.status == PeriodicityStatus::periodic);
        CHECK(rep.period == 2);
    }
    {
        // exact contraction orbits never literally repeat
        auto c = library_contraction<Q>(Q(1, 2));
        auto rep = detect_period(c.map, {0, Q(1)}, 100);
        CHECK(rep.status == PeriodicityStatus::undetermined);
    }
    CHECK_THROWS_AS(detect_period(sys.map, {0, Q(0)}, 0), InputError);
}

TEST_CASE("star rotation has period-3 leaves and a fixed center") {
    auto sys = library_star_rotation<Q>(3);
    auto leaf = detect_period(sys.map, sys.tree->vertex_point(1), 10);
    CHECK(leaf.status == PeriodicityStatus::periodic);
    CHECK(leaf.period == 3);
    auto center = detect_period(sys.map, sys.tree->vertex_point(0), 10);
    CHECK(center.status == PeriodicityStatus::periodic);
    CHECK(center.period == 1);
    auto interior = detect_period(sys.map, {2, Q(1, 3)}, 10);
    CHECK(interior.status == PeriodicityStatus::periodic);
    CHECK(interior.period == 3);
}

TEST_CASE("float period detection resolves clean cycles and hedges otherwise") {
    auto sys = library_tent<double>(2.0);
    {
        auto rep = detect_period(sys.map, {0, 2.0 / 7.0}, 100);
        CHECK(rep.status == PeriodicityStatus::periodic);
        CHECK(rep.period == 3);
    }
    {
        // numerically converged contraction: fixed point reached within tol
        auto c = library_contraction<double>(0.5);
        auto rep = detect_period(c.map, {0, 1.0}, 200, 1e-9);
        CHECK(rep.status == PeriodicityStatus::eventually_periodic);
        CHECK(rep.period == 1);
    }
    {
        // too few steps: no near-return at all
        auto c = library_contraction<double>(0.5);
        auto rep = detect_period(c.map, {0, 1.0}, 5, 1e-9);
        CHECK(rep.status == PeriodicityStatus::undetermined);
    }
}

TEST_CASE("omega limit of an eventually periodic orbit is its cycle cells") {
    auto sys = library_tent<Q>(Q(2));
    auto grid = std::make_shared<const SampleGrid<Q>>(build_grid(sys.tree, Q(1, 8)));
    auto est = omega_limit_estimate(sys.map, {0, Q(1, 7)}, 5, 12, grid);
    std::vector<int> expected{nearest_cell(*grid, {0, Q(2, 7)}),
                              nearest_cell(*grid, {0, Q(4, 7)}),
                              nearest_cell(*grid, {0, Q(6, 7)})};
    std::sort(expected.begin(), expected.end());
    CHECK(est.cells == expected);
    // 17 cells on the unit edge at mesh 1/8; the cycle sits at 5/16, 9/16, 14/16
    CHECK(grid->size() == 17);
    CHECK(est.cells == std::vector<int>{5, 9, 14});
    CHECK_THROWS_AS(omega_limit_estimate(sys.map, {0, Q(0)}, -1, 5, grid), InputError);
    CHECK_THROWS_AS(omega_limit_estimate(sys.map, {0, Q(0)}, 0, 0, grid), InputError);
}

TEST_CASE("fixed point omega limit is a single cell") {
    auto sys = library_contraction<Q>(Q(1, 2));
    auto grid = std::make_shared<const SampleGrid<Q>>(build_grid(sys.tree, Q(1, 4)));
    auto est = omega_limit_estimate(sys.map, {0, Q(1)}, 30, 10, grid);
    CHECK(est.cells == std::vector<int>{nearest_cell(*grid, {0, Q(0)})});
}

TEST_CASE("pair classification separates the three sampled behaviors") {
    auto sys = library_tent<Q>(Q(2));
    {
        // both points fall into the fixed point 0... 1/4 -> 1/2 -> 1 -> 0
        auto cls = classify_pair(sys.map, {0, Q(1, 4)}, {0, Q(1, 8)}, 50, Q(1, 1000));
        CHECK(cls.kind == PairKind::asymptotic);
        CHECK(cls.tail_max == 0);
    }
    {
        // fixed point against the 3-cycle: approaches within 2/7, spreads to 6/7
        auto cls = classify_pair(sys.map, {0, Q(0)}, {0, Q(2, 7)}, 40, Q(3, 10));
        CHECK(cls.kind == PairKind::li_yorke);
        CHECK(cls.tail_min == Q(2, 7));
        CHECK(cls.tail_max == Q(6, 7));
    }
    {
        auto id = library_identity<Q>();
        auto cls = classify_pair(id.map, {0, Q(1, 4)}, {0, Q(3, 4)}, 20, Q(1, 100));
        CHECK(cls.kind == PairKind::distal);
        CHECK(cls.tail_min == Q(1, 2));
    }
    CHECK_THROWS_AS(classify_pair(sys.map, {0, Q(0)}, {0, Q(1)}, 0, Q(1, 10)), InputError);
    CHECK_THROWS_AS(classify_pair(sys.map, {0, Q(0)}, {0, Q(1)}, 10, Q(0)), InputError);
}

TEST_CASE("equicontinuity probe: isometries stay tight, expanding maps spread") {
    auto rot = library_star_rotation<Q>(3);
    std::vector<TreePoint<Q>> samples;
    for (int e = 0; e < 3; ++e)
        for (int k = 0; k <= 8; ++k)
            samples.push_back({static_cast<EdgeId>(e), Q(k) / 8});
    auto leaf = rot.tree->vertex_point(1);
    auto table = equicontinuity_probe(rot.map, leaf, {Q(1, 2), Q(1, 4)}, 9, samples);
    REQUIRE(table.size() == 2);
    CHECK(table[0].max_diameter <= Q(1));   // diam of a radius-1/2 ball sample
    CHECK(table[1].max_diameter <= Q(1, 2));
    CHECK(table[1].points_in_ball >= 2);

    auto tent = library_tent<Q>(Q(2));
    std::vector<TreePoint<Q>> line;
    for (int k = 0; k <= 64; ++k) line.push_back({0, Q(k) / 64});
    auto spread = equicontinuity_probe(tent.map, {0, Q(2, 3)}, {Q(1, 16)}, 12, line);
    REQUIRE(spread.size() == 1);
    CHECK(spread[0].max_diameter > Q(1, 2));

    // probe demands a verified periodic base point
    auto contraction = library_contraction<Q>(Q(1, 2));
    CHECK_THROWS_AS(
        equicontinuity_probe(contraction.map, {0, Q(1)}, {Q(1, 4)}, 10, line),
        InputError);
}
