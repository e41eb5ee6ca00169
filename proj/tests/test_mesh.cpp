#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <set>

#include "neckflow/mesh.hpp"

using namespace neckflow;

TEST_CASE("neck mesh basic integrity") {
    NeckGeometry g = NeckGeometry::with_defaults(1e-2);
    TriMesh m = build_neck_mesh(g);
    QualityReport q = quality_report(g, m);

    CHECK(q.n_triangles > 0);
    CHECK(q.min_area > 0.0);
    CHECK(q.boundary_max_dist < 1e-12);
    CHECK(q.max_scaled_aspect <= 10.0);
    CHECK(q.min_layers >= 8);

    // each triangle is a valid index triple; mesh is edge-conforming
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& t : m.triangles) {
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            CHECK(a >= 0);
            CHECK(a < (int)m.vertices.size());
            if (a > b) std::swap(a, b);
            edge_count[{a, b}]++;
        }
    }
    int boundary_like = 0;
    for (const auto& [k, c] : edge_count) {
        CHECK(c <= 2); // conforming: an edge belongs to at most two triangles
        if (c == 1) ++boundary_like;
    }
    CHECK(boundary_like == (int)m.boundary_edges.size());
}

TEST_CASE("every vertical neck fiber crosses at least n_layers cells") {
    NeckGeometry g = NeckGeometry::with_defaults(1e-2);
    MeshParams p;
    p.n_layers = 8;
    TriMesh m = build_neck_mesh(g, p);
    // cast vertical rays at |x1| <= R and count crossed triangles
    for (double x : {-0.45, -0.2, 0.0, 0.13, 0.49}) {
        const double d = g.delta(x);
        std::set<int> crossed;
        for (int s = 0; s < 200; ++s) {
            const Point2 pt{x, g.h(x) + d * (s + 0.5) / 200};
            for (int i = 0; i < m.neck_tri_count; ++i) {
                const auto& t = m.triangles[i];
                const Point2 A = m.vertices[t[0]], B = m.vertices[t[1]], C = m.vertices[t[2]];
                const double a1 = (B - A).cross(pt - A);
                const double a2 = (C - B).cross(pt - B);
                const double a3 = (A - C).cross(pt - C);
                if (a1 >= -1e-15 && a2 >= -1e-15 && a3 >= -1e-15) {
                    crossed.insert(i);
                    break;
                }
            }
        }
        CHECK((int)crossed.size() >= p.n_layers);
    }
}

TEST_CASE("neck element count scales like eps^{-1/2}") {
    NeckGeometry g2 = NeckGeometry::with_defaults(1e-2);
    NeckGeometry g3 = NeckGeometry::with_defaults(1e-3);
    const auto m2 = build_neck_mesh(g2);
    const auto m3 = build_neck_mesh(g3);
    const double slope = std::log(double(m3.neck_tri_count) / m2.neck_tri_count) /
                         std::log(1e-3 / 1e-2);
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.2)); // -0.5 +- 0.1
    CHECK(std::fabs(slope + 0.5) < 0.1);
}

TEST_CASE("gap-scaled regularity is eps-uniform") {
    double lo = 1e300, hi = 0.0;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        NeckGeometry g = NeckGeometry::with_defaults(eps);
        const QualityReport q = quality_report(g, build_neck_mesh(g));
        lo = std::min(lo, q.max_scaled_aspect);
        hi = std::max(hi, q.max_scaled_aspect);
    }
    CHECK((hi - lo) / hi < 0.2);
}

TEST_CASE("precondition failures") {
    NeckGeometry g = NeckGeometry::with_defaults(1e-2);
    MeshParams bad;
    bad.n_layers = 1;
    CHECK_THROWS_AS(build_neck_mesh(g, bad), std::invalid_argument);
    MeshParams bad2;
    bad2.h_far = 0.0;
    CHECK_THROWS_AS(build_neck_mesh(g, bad2), std::invalid_argument);
    NeckGeometry tiny(1e-7, 1.0, 2.0, 0.5, 1.0);
    CHECK_THROWS_AS(build_neck_mesh(tiny), std::invalid_argument);
}

TEST_CASE("uniform refinement quadruples the triangle count and stays conforming") {
    NeckGeometry g = NeckGeometry::with_defaults(1e-2);
    MeshParams p;
    p.theta = 0.3;
    p.h_far = 0.7; // keep the test quick
    TriMesh m = build_neck_mesh(g, p);
    TriMesh r = refine_uniform(g, m);
    CHECK((int)r.triangles.size() == 4 * (int)m.triangles.size());

    const QualityReport q0 = quality_report(g, m);
    const QualityReport q1 = quality_report(g, r);
    CHECK(q1.min_area > 0.0);
    CHECK(q1.boundary_max_dist < 1e-12);
    // refinement must not degrade the minimum gap-scaled angle by more than
    // half (the physical neck angles are tiny by design)
    CHECK(q1.min_scaled_angle_deg > 0.5 * q0.min_scaled_angle_deg);

    // empty marker: identical mesh
    TriMesh same = refine(g, m, {});
    CHECK(same.triangles.size() == m.triangles.size());

    // partial marker: conforming closure, no hanging nodes
    TriMesh part = refine(g, m, {0, 1, 2, 3, 4});
    std::map<std::pair<int, int>, int> ec;
    for (const auto& t : part.triangles)
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            ec[{a, b}]++;
        }
    int bl = 0;
    for (const auto& [k, c] : ec) {
        CHECK(c <= 2);
        if (c == 1) ++bl;
    }
    CHECK(bl == (int)part.boundary_edges.size());

    // out-of-range marker
    CHECK_THROWS_AS(refine(g, m, {999999}), std::invalid_argument);
}

TEST_CASE("boundary length converges to curve length at 2nd order") {
    NeckGeometry g = NeckGeometry::with_defaults(1e-2);
    MeshParams p;
    p.theta = 0.3;
    p.h_far = 0.25; // resolve the closure blend before measuring the order
    const double exact =
        g.outer_curve().length() + g.particle_curve().length();
    auto blen = [&](const TriMesh& m) {
        double L = 0.0;
        for (const auto& e : m.boundary_edges)
            L += (m.vertices[e.a] - m.vertices[e.b]).norm();
        return L;
    };
    TriMesh m0 = build_neck_mesh(g, p);
    TriMesh m1 = refine_uniform(g, m0);
    TriMesh m2 = refine_uniform(g, m1);
    const double e0 = std::fabs(blen(m0) - exact);
    const double e1 = std::fabs(blen(m1) - exact);
    const double e2 = std::fabs(blen(m2) - exact);
    CHECK(e1 < e0);
    CHECK(e2 < e1);
    const double order = std::log2(e1 / e2);
    CHECK(order > 1.7);
}

TEST_CASE("rectangle helper mesh") {
    TriMesh m = rectangle_mesh(2.0, 1.0, 8, 4);
    CHECK((int)m.triangles.size() == 64);
    double area = 0.0;
    for (std::size_t i = 0; i < m.triangles.size(); ++i) area += m.tri_area((int)i);
    CHECK(area == doctest::Approx(2.0).epsilon(1e-13));
}
