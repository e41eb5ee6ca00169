#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "neckflow/geometry.hpp"

using namespace neckflow;

TEST_CASE("delta formula") {
    NeckGeometry g(0.01, 1.0, 2.0, 0.5, 1.0);
    CHECK(g.delta(0.1) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(g.delta(0.0) == doctest::Approx(0.01).epsilon(1e-14));

    NeckGeometry g2(1e-4, 0.5, 1.5, 0.5, 1.0);
    CHECK(g2.delta(0.05) == doctest::Approx(2.6e-3).epsilon(1e-12));

    CHECK_THROWS_AS((void)g.delta(1.5), std::domain_error);
}

TEST_CASE("delta positivity and consistency with the two graphs") {
    NeckGeometry g(1e-3, 1.0, 2.0, 0.5, 1.0);
    for (int i = 0; i <= 100; ++i) {
        const double x = -1.0 + 0.02 * i;
        const double d = g.delta(x);
        CHECK(d >= g.eps());
        CHECK(g.h1(x) + g.eps() - g.h(x) == doctest::Approx(d).epsilon(1e-13));
    }
    CHECK(g.delta(0.0) == g.eps());
}

TEST_CASE("classify points") {
    NeckGeometry g(0.01, 1.0, 2.0, 0.5, 1.0);
    const double eps = g.eps();
    CHECK(g.classify({0.0, eps / 2.0}) == RegionTag::Fluid);
    CHECK(g.classify({0.0, eps * (1.0 + 1e-12)}) == RegionTag::Particle);
    CHECK(g.classify({0.0, -1e-9}) == RegionTag::Outside);
    CHECK(g.classify({0.0, eps}) == RegionTag::OnParticleBoundary);
    CHECK(g.classify({0.3, g.h(0.3)}) == RegionTag::OnOuterBoundary);
    // far above the particle cap but inside D
    CHECK(g.classify({0.0, g.particle_curve().top() + 0.5}) == RegionTag::Fluid);
    // outside everything
    CHECK(g.classify({0.0, g.outer_curve().top() + 1.0}) == RegionTag::Outside);
    // interior of the particle, off-axis
    CHECK(g.classify({0.2, 2.0}) == RegionTag::Particle);
}

TEST_CASE("boundary curves coincide with the exact parabolas in the neck") {
    NeckGeometry g(0.01, 1.0, 2.0, 0.5, 1.0);
    const auto& pd = g.outer_curve();
    const auto& pp = g.particle_curve();
    const double R = g.R();

    // sample the outer wall at x1 = R/2
    const double t = pd.t_of_x(R / 2.0);
    const Point2 q = pd.point(t);
    CHECK(q.x == doctest::Approx(R / 2.0).epsilon(1e-14));
    CHECK(q.y == doctest::Approx(g.kappa() * R * R / 4.0).epsilon(1e-13));

    // particle apex
    const Point2 apex = pp.point(0.0);
    CHECK(apex.x == doctest::Approx(0.0));
    CHECK(apex.y == doctest::Approx(g.eps()).epsilon(1e-14));

    // vertical ray-cast gap equals delta to 1e-12 relative
    for (double x : {-0.9, -0.4, 0.0, 0.3, 0.8}) {
        const double yw = pd.point(pd.t_of_x(x)).y;
        const double yp = pp.point(pp.t_of_x(x)).y;
        CHECK(yp - yw == doctest::Approx(g.delta(x)).epsilon(1e-12));
    }
}

TEST_CASE("blend junctions are C^2 with jumps below 1e-10") {
    NeckGeometry g(0.01, 1.0, 2.0, 0.5, 1.0);
    for (CurveId id : {CurveId::Particle, CurveId::Outer}) {
        const auto& c = g.curve(id);
        for (double tj : {c.t_graph_end(), c.t_blend_end(), -c.t_graph_end()}) {
            // one-sided limits of the analytic derivatives across the junction
            auto [xm, ym] = c.jet(tj - 1e-13);
            auto [xp, yp] = c.jet(tj + 1e-13);
            CHECK(std::fabs(ym.v - yp.v) < 1e-10);
            CHECK(std::fabs(ym.dx - yp.dx) < 1e-10);
            CHECK(std::fabs(ym.dxx - yp.dxx) < 1e-8);

            // finite-difference probe validating the analytic derivatives on
            // each side (second-order central differences, O(h^2) accurate)
            auto y = [&](double t) { return c.point(t).y; };
            for (double sgn : {-1.0, 1.0}) {
                const double h = 1e-5;
                const double t0 = tj + sgn * 3e-3;
                auto [xj, yj] = c.jet(t0);
                const double d1 = (y(t0 + h) - y(t0 - h)) / (2 * h);
                const double d2 = (y(t0 + h) - 2 * y(t0) + y(t0 - h)) / (h * h);
                CHECK(d1 == doctest::Approx(yj.dx).epsilon(1e-6));
                CHECK(d2 == doctest::Approx(yj.dxx).epsilon(1e-3).scale(1.0));
            }
        }
    }
}

TEST_CASE("curve is closed, convex (particle), correctly oriented") {
    NeckGeometry g(1e-3, 1.0, 2.0, 0.5, 1.0);
    const auto& pp = g.particle_curve();
    const Point2 a = pp.point(-kPi);
    const Point2 b = pp.point(kPi - 1e-15);
    CHECK((a - b).norm() < 1e-9);
    for (int i = 0; i < 360; ++i) {
        const double t = -kPi + (i + 0.5) * 2.0 * kPi / 360;
        CHECK(pp.curvature(t) > 0.0);
    }
    // outward normal at the apex points down, into the gap
    const Vec2 n = pp.outward_normal(0.0);
    CHECK(n.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(n.y == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("arclength parametrization round-trips") {
    NeckGeometry g(1e-2, 1.0, 2.0, 0.5, 1.0);
    const auto& c = g.outer_curve();
    CHECK(c.length() > 0.0);
    for (double t : {-2.5, -1.0, 0.0, 0.3, 1.7, 3.0}) {
        const double s = c.arclength(t);
        const double t2 = c.t_of_arclength(s);
        CHECK((c.point(t2) - c.point(t)).norm() < 1e-8 * c.length());
    }
}

TEST_CASE("constructor rejects bad parameters") {
    CHECK_THROWS_AS(NeckGeometry(-1.0, 1.0, 2.0, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(NeckGeometry(0.01, 2.0, 1.0, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(NeckGeometry(0.01, 1.0, 2.0, 1.5, 1.0), std::invalid_argument);
    // blend window collapsed onto the graph region
    ClosureSpec bad;
    bad.particle_t2 = 0.1;
    CHECK_THROWS_AS(NeckGeometry(0.01, 1.0, 2.0, 0.5, 1.0, bad), std::invalid_argument);
}

TEST_CASE("flat wall flag") {
    NeckGeometry g(1e-3, 0.0, 1.0, 0.5, 1.0);
    CHECK(g.flat_wall());
    CHECK(g.delta(0.1) == doctest::Approx(1e-3 + 0.01).epsilon(1e-13));
}
