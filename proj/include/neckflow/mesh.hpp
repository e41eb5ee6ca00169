// mesh.hpp
//
// Anisotropic neck-graded conforming triangulation of Omega.  The neck
// |x1| <= 2R is a layered lattice: vertical fibers between the exact wall
// and particle parabolas, n_layers cells across the gap, horizontal step
// theta * sqrt(eps/k0) in |x1| <= R and geometrically graded (capped by
// theta * sqrt(delta/k0)) in the outer neck.  The rest of the annulus
// between the two closed curves is a transfinite quad grid matched to the
// neck fibers at the two seams |x1| = 2R.  All quads are split into
// triangles; every boundary vertex lies exactly on its curve and carries
// the curve parameter so refinement can re-project midpoints.

#ifndef NECKFLOW_MESH_HPP
#define NECKFLOW_MESH_HPP

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "neckflow/core.hpp"
#include "neckflow/geometry.hpp"

namespace neckflow {

struct MeshParams {
    int n_layers = 8;     // cells across the gap
    double theta = 0.15;  // inner-neck horizontal step factor
    double growth = 1.2;  // geometric grading in the outer neck
    double h_far = 0.22;  // target tangential spacing of the far annulus
    int far_refine = 1;   // extra conforming refinement passes on the annulus
};

struct TriMesh {
    struct BoundaryEdge {
        int a = 0, b = 0;
        CurveId curve = CurveId::Outer;
    };
    struct BoundaryVertex {
        int v = 0;
        CurveId curve = CurveId::Outer;
        double t = 0.0; // curve parameter
    };

    std::vector<Point2> vertices;
    std::vector<std::array<int, 3>> triangles; // counterclockwise
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<BoundaryVertex> boundary_vertices;
    int neck_tri_count = 0; // neck triangles come first in `triangles`
    int n_layers = 0;
    double theta = 0.0;

    double tri_area(int i) const {
        const auto& t = triangles[i];
        const Vec2 e1 = vertices[t[1]] - vertices[t[0]];
        const Vec2 e2 = vertices[t[2]] - vertices[t[0]];
        return 0.5 * e1.cross(e2);
    }
};

struct QualityReport {
    int n_vertices = 0;
    int n_triangles = 0;
    int neck_triangles = 0;
    double min_angle_deg = 0.0;        // physical; tiny in the neck by design
    double min_scaled_angle_deg = 0.0; // neck cells measured in gap coordinates
    double max_aspect = 0.0;           // physical: longest edge^2 / (2 area)
    double max_scaled_aspect = 0.0;    // gap-scaled width/height of neck cells
    double min_area = 0.0;
    int min_layers = 0;
    double boundary_max_dist = 0.0;    // max distance of boundary vertices to curve
};

namespace meshdetail {

inline void append_graded_steps(std::vector<double>& xs, double from, double to, double dx0,
                                double growth, double theta, const NeckGeometry& g) {
    // geometric growth capped by the local step law, then rescaled to land
    // exactly on `to`
    std::vector<double> steps;
    double x = from, dx = dx0;
    while (x < to) {
        dx = std::min(dx * growth, theta * std::sqrt(g.delta(std::min(x, 2.0 * g.R())) /
                                                     g.kappa0()));
        steps.push_back(dx);
        x += dx;
    }
    const double total = x - from;
    const double scale = (to - from) / total;
    x = from;
    for (double s : steps) {
        x += s * scale;
        xs.push_back(x);
    }
    xs.back() = to;
}

} // namespace meshdetail

inline TriMesh refine(const NeckGeometry& g, const TriMesh& mesh,
                      const std::vector<int>& marker);

inline TriMesh build_neck_mesh(const NeckGeometry& g, const MeshParams& p = {}) {
    if (p.n_layers < 4)
        throw std::invalid_argument("mesh: n_layers must be >= 4");
    if (!(p.h_far > 0.0))
        throw std::invalid_argument("mesh: h_far must be positive");
    if (!(p.theta > 0.0 && p.theta * p.n_layers <= 10.0))
        throw std::invalid_argument("mesh: theta out of range (need theta*n_layers <= 10)");
    if (g.eps() < 1e-6)
        throw std::invalid_argument(
            "mesh: eps below the 1e-6 desk-scale floor; vertex separations would "
            "approach roundoff");

    const double R = g.R(), k0 = g.kappa0();
    const int NL = p.n_layers;

    // ---- horizontal grid ----
    const double dx0 = p.theta * std::sqrt(g.eps() / k0);
    const int m_in = std::max(2, static_cast<int>(std::ceil(R / dx0)));
    std::vector<double> xs_pos; // nodes in (0, 2R]
    for (int i = 1; i <= m_in; ++i) xs_pos.push_back(R * i / m_in);
    meshdetail::append_graded_steps(xs_pos, R, 2.0 * R, R / m_in, p.growth, p.theta, g);
    std::vector<double> xs; // full grid -2R .. 2R
    for (auto it = xs_pos.rbegin(); it != xs_pos.rend(); ++it) xs.push_back(-*it);
    xs.push_back(0.0);
    for (double x : xs_pos) xs.push_back(x);
    const int nfib = static_cast<int>(xs.size());

    TriMesh m;
    m.n_layers = NL;
    m.theta = p.theta;

    // ---- neck fibers ----
    // fiber_idx[i][j] -> vertex index, j = 0 (wall) .. NL (particle)
    std::vector<std::vector<int>> fib(nfib, std::vector<int>(NL + 1));
    const auto& wall = g.outer_curve();
    const auto& part = g.particle_curve();
    for (int i = 0; i < nfib; ++i) {
        const double x = xs[i];
        const double yw = g.h(x);
        const double d = g.delta(x);
        for (int j = 0; j <= NL; ++j) {
            const int v = static_cast<int>(m.vertices.size());
            m.vertices.push_back({x, yw + d * j / NL});
            fib[i][j] = v;
        }
        m.boundary_vertices.push_back({fib[i][0], CurveId::Outer, wall.t_of_x(x)});
        m.boundary_vertices.push_back({fib[i][NL], CurveId::Particle, part.t_of_x(x)});
    }

    auto push_quad = [&](int a, int b, int c, int d, bool flip) {
        // quad a-b-c-d (consistently ordered); split along alternating diagonal
        if (!flip) {
            m.triangles.push_back({a, b, c});
            m.triangles.push_back({a, c, d});
        } else {
            m.triangles.push_back({a, b, d});
            m.triangles.push_back({b, c, d});
        }
    };

    for (int i = 0; i + 1 < nfib; ++i)
        for (int j = 0; j < NL; ++j)
            push_quad(fib[i][j], fib[i + 1][j], fib[i + 1][j + 1], fib[i][j + 1],
                      (i + j) % 2 == 1);
    m.neck_tri_count = static_cast<int>(m.triangles.size());

    for (int i = 0; i + 1 < nfib; ++i) {
        m.boundary_edges.push_back({fib[i][0], fib[i + 1][0], CurveId::Outer});
        m.boundary_edges.push_back({fib[i][NL], fib[i + 1][NL], CurveId::Particle});
    }

    // ---- far annulus: transfinite grid between the two upper arcs ----
    const double tp0 = part.t_graph_end();         // right seam on the particle
    const double to0 = wall.t_graph_end();         // right seam on the outer curve
    const double sp0 = part.arclength(tp0);
    const double so0 = wall.arclength(to0);
    const double arc_p = part.length() - (part.arclength(tp0) - part.arclength(-tp0));
    const double arc_o = wall.length() - (wall.arclength(to0) - wall.arclength(-to0));
    const int n_ang = std::max(24, static_cast<int>(std::ceil(arc_p / p.h_far)));
    const int n_rad = NL; // forced by conformity at the seams

    // station fractions on the outer chain, weighted so strongly curved
    // stretches (the closure blend) receive proportionally more stations
    std::vector<double> f_outer(n_ang + 1);
    {
        const int nprobe = 4 * n_ang;
        std::vector<double> w(nprobe), cum(nprobe + 1, 0.0);
        for (int k = 0; k < nprobe; ++k) {
            const double s = so0 + (k + 0.5) * arc_o / nprobe;
            const double t = wall.t_of_arclength(s);
            const double kap_c = std::fabs(wall.curvature(t));
            w[k] = std::max(1.0, kap_c * p.h_far / 0.35);
            cum[k + 1] = cum[k] + w[k];
        }
        for (int i = 0; i <= n_ang; ++i) {
            const double target = cum[nprobe] * i / n_ang;
            const auto it = std::lower_bound(cum.begin(), cum.end(), target);
            int k = std::max<int>(1, static_cast<int>(it - cum.begin()));
            k = std::min(k, nprobe);
            const double frac = (target - cum[k - 1]) / std::max(cum[k] - cum[k - 1], 1e-300);
            f_outer[i] = (k - 1 + frac) / nprobe;
        }
        f_outer[0] = 0.0;
        f_outer[n_ang] = 1.0;
    }

    // column i of the annulus: particle point P_i, outer point Q_i
    std::vector<std::vector<int>> ann(n_ang + 1, std::vector<int>(n_rad + 1));
    for (int i = 0; i <= n_ang; ++i) {
        if (i == 0) {
            for (int j = 0; j <= n_rad; ++j) ann[0][j] = fib[nfib - 1][NL - j];
            continue;
        }
        if (i == n_ang) {
            for (int j = 0; j <= n_rad; ++j) ann[n_ang][j] = fib[0][NL - j];
            continue;
        }
        const double fp = static_cast<double>(i) / n_ang;
        const double tp = part.t_of_arclength(sp0 + fp * arc_p);
        const double to = wall.t_of_arclength(so0 + f_outer[i] * arc_o);
        const Point2 P = part.point(tp);
        const Point2 Q = wall.point(to);
        for (int j = 0; j <= n_rad; ++j) {
            const double r = static_cast<double>(j) / n_rad;
            if (j == 0) {
                ann[i][0] = static_cast<int>(m.vertices.size());
                m.vertices.push_back(P);
                m.boundary_vertices.push_back({ann[i][0], CurveId::Particle, tp});
            } else if (j == n_rad) {
                ann[i][n_rad] = static_cast<int>(m.vertices.size());
                m.vertices.push_back(Q);
                m.boundary_vertices.push_back({ann[i][n_rad], CurveId::Outer, to});
            } else {
                ann[i][j] = static_cast<int>(m.vertices.size());
                m.vertices.push_back(P + r * (Q - P));
            }
        }
    }
    // split each far quad along the diagonal that maximizes the smallest angle
    auto diag_quality = [&](int a, int b, int c) {
        const Point2 A = m.vertices[a], B = m.vertices[b], C = m.vertices[c];
        auto ang = [](const Vec2& u, const Vec2& v) {
            return std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
        };
        const double a1 = ang(B - A, C - A);
        const double a2 = ang(C - B, A - B);
        return std::min({a1, a2, kPi - a1 - a2});
    };
    for (int i = 0; i < n_ang; ++i)
        for (int j = 0; j < n_rad; ++j) {
            const int a = ann[i][j], b = ann[i + 1][j], c = ann[i + 1][j + 1],
                      d = ann[i][j + 1];
            const double q_ac = std::min(diag_quality(a, b, c), diag_quality(a, c, d));
            const double q_bd = std::min(diag_quality(a, b, d), diag_quality(b, c, d));
            push_quad(a, b, c, d, q_bd > q_ac);
        }
    for (int i = 0; i < n_ang; ++i) {
        m.boundary_edges.push_back({ann[i][0], ann[i + 1][0], CurveId::Particle});
        m.boundary_edges.push_back({ann[i][n_rad], ann[i + 1][n_rad], CurveId::Outer});
    }

    // normalize orientation and validate
    for (auto& t : m.triangles) {
        const Vec2 e1 = m.vertices[t[1]] - m.vertices[t[0]];
        const Vec2 e2 = m.vertices[t[2]] - m.vertices[t[0]];
        if (e1.cross(e2) < 0.0) std::swap(t[1], t[2]);
    }
    for (std::size_t i = 0; i < m.triangles.size(); ++i)
        if (m.tri_area(static_cast<int>(i)) <= 0.0)
            throw std::runtime_error("mesh: degenerate triangle produced");

    // sharpen the far field: the radial cell count of the annulus is tied to
    // n_layers by seam conformity, so extra resolution comes from conforming
    // refinement passes restricted to the annulus
    for (int pass = 0; pass < p.far_refine; ++pass) {
        std::vector<int> marker;
        for (int t = m.neck_tri_count; t < static_cast<int>(m.triangles.size()); ++t)
            marker.push_back(t);
        m = refine(g, m, marker);
    }
    return m;
}

// Conforming refinement: marked triangles are red-split (4 children); the
// closure promotes neighbours until no triangle has two hanging midpoints,
// then bisects those with exactly one.  New boundary vertices are projected
// to the exact curves through their parameter average.
inline TriMesh refine(const NeckGeometry& g, const TriMesh& mesh,
                      const std::vector<int>& marker) {
    const int nt = static_cast<int>(mesh.triangles.size());
    for (int t : marker)
        if (t < 0 || t >= nt) throw std::invalid_argument("refine: marker out of range");
    if (marker.empty()) return mesh;

    std::vector<char> red(nt, 0);
    for (int t : marker) red[t] = 1;

    using EKey = std::pair<int, int>;
    auto ekey = [](int a, int b) { return a < b ? EKey{a, b} : EKey{b, a}; };

    // iterate: an edge is split if any adjacent red triangle touches it;
    // triangles with >= 2 split edges become red
    std::map<EKey, char> split;
    for (;;) {
        split.clear();
        for (int t = 0; t < nt; ++t)
            if (red[t])
                for (int e = 0; e < 3; ++e)
                    split[ekey(mesh.triangles[t][e], mesh.triangles[t][(e + 1) % 3])] = 1;
        bool changed = false;
        for (int t = 0; t < nt; ++t) {
            if (red[t]) continue;
            int cnt = 0;
            for (int e = 0; e < 3; ++e)
                cnt += split.count(ekey(mesh.triangles[t][e], mesh.triangles[t][(e + 1) % 3]));
            if (cnt >= 2) {
                red[t] = 1;
                changed = true;
            }
        }
        if (!changed) break;
    }

    TriMesh out;
    out.n_layers = mesh.n_layers;
    out.theta = mesh.theta;
    out.vertices = mesh.vertices;

    // boundary metadata lookup
    std::map<int, std::pair<CurveId, double>> binfo;
    for (const auto& bv : mesh.boundary_vertices) binfo[bv.v] = {bv.curve, bv.t};
    out.boundary_vertices = mesh.boundary_vertices;
    std::map<EKey, char> bedge;
    std::map<EKey, CurveId> bedge_curve;
    for (const auto& be : mesh.boundary_edges) {
        bedge[ekey(be.a, be.b)] = 1;
        bedge_curve[ekey(be.a, be.b)] = be.curve;
    }

    std::map<EKey, int> midpoint;
    auto get_mid = [&](int a, int b) {
        const EKey k = ekey(a, b);
        auto it = midpoint.find(k);
        if (it != midpoint.end()) return it->second;
        const int v = static_cast<int>(out.vertices.size());
        Point2 pm = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
        if (bedge.count(k)) {
            // project to the curve via the parameter midpoint
            const auto ia = binfo.find(a);
            const auto ib = binfo.find(b);
            if (ia != binfo.end() && ib != binfo.end() && ia->second.first == ib->second.first) {
                const CurveId cid = ia->second.first;
                const double ta = ia->second.second, tb = ib->second.second;
                double dt = ClosedCurve::wrap(tb - ta);
                const double tm = ClosedCurve::wrap(ta + 0.5 * dt);
                pm = g.curve(cid).point(tm);
                out.boundary_vertices.push_back({v, cid, tm});
            }
        }
        out.vertices.push_back(pm);
        midpoint[k] = v;
        return v;
    };

    auto emit_boundary_children = [&](int a, int b, int mid) {
        const EKey k = ekey(a, b);
        if (!bedge.count(k)) return;
        const CurveId c = bedge_curve[k];
        out.boundary_edges.push_back({a, mid, c});
        out.boundary_edges.push_back({mid, b, c});
    };

    // children; keep the neck prefix property by emitting neck triangles first
    auto emit_tri = [&](int a, int b, int c) {
        const Vec2 e1 = out.vertices[b] - out.vertices[a];
        const Vec2 e2 = out.vertices[c] - out.vertices[a];
        if (e1.cross(e2) < 0.0) std::swap(b, c);
        out.triangles.push_back({a, b, c});
    };

    for (int pass = 0; pass < 2; ++pass) {
        for (int t = 0; t < nt; ++t) {
            const bool is_neck = t < mesh.neck_tri_count;
            if ((pass == 0) != is_neck) continue;
            const auto& tri = mesh.triangles[t];
            if (red[t]) {
                const int m01 = get_mid(tri[0], tri[1]);
                const int m12 = get_mid(tri[1], tri[2]);
                const int m20 = get_mid(tri[2], tri[0]);
                emit_tri(tri[0], m01, m20);
                emit_tri(tri[1], m12, m01);
                emit_tri(tri[2], m20, m12);
                emit_tri(m01, m12, m20);
            } else {
                // at most one edge split: green bisection
                int se = -1;
                for (int e = 0; e < 3; ++e)
                    if (split.count(ekey(tri[e], tri[(e + 1) % 3]))) se = e;
                if (se < 0) {
                    out.triangles.push_back(tri);
                } else {
                    const int a = tri[se], b = tri[(se + 1) % 3], c = tri[(se + 2) % 3];
                    const int mid = get_mid(a, b);
                    emit_tri(a, mid, c);
                    emit_tri(mid, b, c);
                }
            }
        }
        if (pass == 0) out.neck_tri_count = static_cast<int>(out.triangles.size());
    }

    // boundary edges: unsplit ones survive, split ones are replaced
    for (const auto& be : mesh.boundary_edges) {
        const EKey k = ekey(be.a, be.b);
        auto it = midpoint.find(k);
        if (it == midpoint.end())
            out.boundary_edges.push_back(be);
        else
            emit_boundary_children(be.a, be.b, it->second);
    }

    for (std::size_t i = 0; i < out.triangles.size(); ++i)
        if (out.tri_area(static_cast<int>(i)) <= 0.0)
            throw std::runtime_error("refine: degenerate triangle produced");
    return out;
}

inline TriMesh refine_uniform(const NeckGeometry& g, const TriMesh& mesh) {
    std::vector<int> all(mesh.triangles.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return refine(g, mesh, all);
}

inline QualityReport quality_report(const NeckGeometry& g, const TriMesh& m) {
    QualityReport q;
    q.n_vertices = static_cast<int>(m.vertices.size());
    q.n_triangles = static_cast<int>(m.triangles.size());
    q.neck_triangles = m.neck_tri_count;
    q.min_angle_deg = 180.0;
    q.min_scaled_angle_deg = 180.0;
    q.min_area = std::numeric_limits<double>::infinity();
    q.min_layers = m.n_layers;

    auto min_angle = [](const Point2& A, const Point2& B, const Point2& C) {
        auto angle = [](const Vec2& u, const Vec2& v) {
            return std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
        };
        const double a1 = angle(B - A, C - A);
        const double a2 = angle(C - B, A - B);
        return std::min({a1, a2, kPi - a1 - a2}) * 180.0 / kPi;
    };

    for (int i = 0; i < q.n_triangles; ++i) {
        const auto& t = m.triangles[i];
        const Point2 A = m.vertices[t[0]], B = m.vertices[t[1]], C = m.vertices[t[2]];
        const double area = m.tri_area(i);
        q.min_area = std::min(q.min_area, area);
        const double lab = (B - A).norm(), lbc = (C - B).norm(), lca = (A - C).norm();
        const double lmax = std::max({lab, lbc, lca});
        q.max_aspect = std::max(q.max_aspect, lmax * lmax / (2.0 * area));
        q.min_angle_deg = std::min(q.min_angle_deg, min_angle(A, B, C));
        if (i < m.neck_tri_count) {
            // measure neck cells in gap coordinates:
            //   x -> x / L(z), y -> (y - h(x)) / delta(x), L = sqrt(delta/k0)
            const double z = (A.x + B.x + C.x) / 3.0;
            const double d = g.delta(std::clamp(z, -2.0 * g.R(), 2.0 * g.R()));
            const double L = std::sqrt(d / g.kappa0());
            auto scaled = [&](const Point2& p) {
                return Point2{p.x / L, (p.y - g.h(p.x)) / g.delta(p.x)};
            };
            const Point2 As = scaled(A), Bs = scaled(B), Cs = scaled(C);
            q.min_scaled_angle_deg = std::min(q.min_scaled_angle_deg, min_angle(As, Bs, Cs));
            const double w = (std::max({A.x, B.x, C.x}) - std::min({A.x, B.x, C.x})) / L;
            const double h = (std::max({A.y, B.y, C.y}) - std::min({A.y, B.y, C.y})) / d;
            q.max_scaled_aspect = std::max(q.max_scaled_aspect, w / h);
        } else {
            q.min_scaled_angle_deg = std::min(q.min_scaled_angle_deg, min_angle(A, B, C));
        }
    }

    for (const auto& bv : m.boundary_vertices) {
        const Point2 p = g.curve(bv.curve).point(bv.t);
        q.boundary_max_dist = std::max(q.boundary_max_dist, (p - m.vertices[bv.v]).norm());
    }
    return q;
}

// structured triangulation of an axis-aligned rectangle (used by the
// manufactured-solution studies; all boundary edges tagged Outer)
inline TriMesh rectangle_mesh(double lx, double ly, int nx, int ny) {
    TriMesh m;
    m.n_layers = ny;
    auto idx = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) m.vertices.push_back({lx * i / nx, ly * j / ny});
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int a = idx(i, j), b = idx(i + 1, j), c = idx(i + 1, j + 1), d = idx(i, j + 1);
            if ((i + j) % 2 == 0) {
                m.triangles.push_back({a, b, c});
                m.triangles.push_back({a, c, d});
            } else {
                m.triangles.push_back({a, b, d});
                m.triangles.push_back({b, c, d});
            }
        }
    for (int i = 0; i < nx; ++i) {
        m.boundary_edges.push_back({idx(i, 0), idx(i + 1, 0), CurveId::Outer});
        m.boundary_edges.push_back({idx(i, ny), idx(i + 1, ny), CurveId::Outer});
    }
    for (int j = 0; j < ny; ++j) {
        m.boundary_edges.push_back({idx(0, j), idx(0, j + 1), CurveId::Outer});
        m.boundary_edges.push_back({idx(nx, j), idx(nx, j + 1), CurveId::Outer});
    }
    return m;
}

} // namespace neckflow

#endif // NECKFLOW_MESH_HPP
