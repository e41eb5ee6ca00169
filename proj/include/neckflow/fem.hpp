// fem.hpp
//
// Mixed finite-element Stokes solver: continuous P2 velocity / continuous P1
// pressure on the triangulations from mesh.hpp, with
//   - Dirichlet velocity data on both boundaries (four-subproblem route),
//   - or the direct rigid-particle problem where the particle trace is
//     sum_alpha C^alpha psi_alpha with the three constants as unknowns,
// a zero-mean pressure gauge enforced by a scalar multiplier row, and a
// sparse direct factorization shared across solves on the same mesh.

#ifndef NECKFLOW_FEM_HPP
#define NECKFLOW_FEM_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "neckflow/aux_fields.hpp"
#include "neckflow/geometry.hpp"
#include "neckflow/mesh.hpp"

namespace neckflow {

// degree-6 Dunavant rule, 12 points, positive weights summing to 1
struct TriQuadrature {
    static constexpr int n = 12;
    // barycentric coordinates (l1, l2); l3 = 1 - l1 - l2
    static const std::array<std::array<double, 2>, 12>& points() {
        static const std::array<std::array<double, 2>, 12> p = {{
            {0.873821971016996, 0.063089014491502},
            {0.063089014491502, 0.873821971016996},
            {0.063089014491502, 0.063089014491502},
            {0.501426509658179, 0.249286745170910},
            {0.249286745170910, 0.501426509658179},
            {0.249286745170910, 0.249286745170910},
            {0.636502499121399, 0.310352451033785},
            {0.636502499121399, 0.053145049844816},
            {0.310352451033785, 0.636502499121399},
            {0.310352451033785, 0.053145049844816},
            {0.053145049844816, 0.636502499121399},
            {0.053145049844816, 0.310352451033785},
        }};
        return p;
    }
    static const std::array<double, 12>& weights() {
        static const std::array<double, 12> w = {
            0.050844906370207, 0.050844906370207, 0.050844906370207,
            0.116786275726379, 0.116786275726379, 0.116786275726379,
            0.082851075618374, 0.082851075618374, 0.082851075618374,
            0.082851075618374, 0.082851075618374, 0.082851075618374};
        return w;
    }
};

// 4-point Gauss on [0,1]
inline const std::array<std::array<double, 2>, 4>& line_gauss4() {
    static const std::array<std::array<double, 2>, 4> g = {{
        {0.069431844202974, 0.173927422568727},
        {0.330009478207572, 0.326072577431273},
        {0.669990521792428, 0.326072577431273},
        {0.930568155797026, 0.173927422568727},
    }};
    return g;
}

// P2 scalar space: nodes = mesh vertices then edge midpoints
class FemSpace {
  public:
    explicit FemSpace(const TriMesh& mesh) : mesh_(&mesh) {
        const int nv = static_cast<int>(mesh.vertices.size());
        auto ekey = [](int a, int b) {
            return a < b ? std::pair<int, int>{a, b} : std::pair<int, int>{b, a};
        };
        for (const auto& t : mesh.triangles)
            for (int e = 0; e < 3; ++e) {
                const auto k = ekey(t[e], t[(e + 1) % 3]);
                if (!edge_id_.count(k)) {
                    const int id = static_cast<int>(edge_id_.size());
                    edge_id_[k] = id;
                    edge_verts_.push_back({k.first, k.second});
                }
            }
        n_vertices_ = nv;
        n_edges_ = static_cast<int>(edge_id_.size());

        tri_nodes_.resize(mesh.triangles.size());
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            const auto& tri = mesh.triangles[t];
            tri_nodes_[t] = {tri[0], tri[1], tri[2],
                             nv + edge_id_.at(ekey(tri[0], tri[1])),
                             nv + edge_id_.at(ekey(tri[1], tri[2])),
                             nv + edge_id_.at(ekey(tri[2], tri[0]))};
        }

        // boundary node tags and curve parameters
        std::map<int, std::pair<CurveId, double>> vparam;
        for (const auto& bv : mesh.boundary_vertices) vparam[bv.v] = {bv.curve, bv.t};
        for (const auto& be : mesh.boundary_edges) {
            const int en = nv + edge_id_.at(ekey(be.a, be.b));
            boundary_nodes_[be.a] = be.curve;
            boundary_nodes_[be.b] = be.curve;
            boundary_nodes_[en] = be.curve;
            const auto ia = vparam.find(be.a), ib = vparam.find(be.b);
            if (ia != vparam.end()) node_param_[be.a] = ia->second;
            if (ib != vparam.end()) node_param_[be.b] = ib->second;
            if (ia != vparam.end() && ib != vparam.end() &&
                ia->second.first == ib->second.first) {
                const double ta = ia->second.second;
                const double dt = ClosedCurve::wrap(ib->second.second - ta);
                node_param_[en] = {ia->second.first, ClosedCurve::wrap(ta + 0.5 * dt)};
            }
            boundary_edge_nodes_.push_back({be.a, be.b, en, be.curve});
        }
    }

    const TriMesh& mesh() const { return *mesh_; }
    int n_scalar() const { return n_vertices_ + n_edges_; }
    int n_vertices() const { return n_vertices_; }
    const std::array<int, 6>& p2_nodes(int t) const { return tri_nodes_[t]; }

    Point2 node_coord(int n) const {
        if (n < n_vertices_) return mesh_->vertices[n];
        const auto& ev = edge_verts_[n - n_vertices_];
        return 0.5 * (mesh_->vertices[ev[0]] + mesh_->vertices[ev[1]]);
    }

    const std::map<int, CurveId>& boundary_nodes() const { return boundary_nodes_; }
    // curve parameter of a boundary node, when known
    std::optional<std::pair<CurveId, double>> node_param(int n) const {
        auto it = node_param_.find(n);
        if (it == node_param_.end()) return std::nullopt;
        return it->second;
    }

    struct BEdgeNodes {
        int a, b, mid;
        CurveId curve;
    };
    const std::vector<BEdgeNodes>& boundary_edge_nodes() const {
        return boundary_edge_nodes_;
    }

  private:
    const TriMesh* mesh_;
    int n_vertices_ = 0, n_edges_ = 0;
    std::map<std::pair<int, int>, int> edge_id_;
    std::vector<std::array<int, 2>> edge_verts_;
    std::vector<std::array<int, 6>> tri_nodes_;
    std::map<int, CurveId> boundary_nodes_;
    std::map<int, std::pair<CurveId, double>> node_param_;
    std::vector<BEdgeNodes> boundary_edge_nodes_;
};

namespace femdetail {

struct P2Basis {
    std::array<double, 6> N;
    std::array<Vec2, 6> grad;
};

inline P2Basis p2_basis(double l1, double l2, const Vec2& g1, const Vec2& g2,
                        const Vec2& g3) {
    const double l3 = 1.0 - l1 - l2;
    P2Basis b;
    b.N = {l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), l3 * (2 * l3 - 1),
           4 * l1 * l2, 4 * l2 * l3, 4 * l3 * l1};
    b.grad[0] = (4 * l1 - 1) * g1;
    b.grad[1] = (4 * l2 - 1) * g2;
    b.grad[2] = (4 * l3 - 1) * g3;
    b.grad[3] = 4.0 * (l2 * g1 + l1 * g2);
    b.grad[4] = 4.0 * (l3 * g2 + l2 * g3);
    b.grad[5] = 4.0 * (l1 * g3 + l3 * g1);
    return b;
}

// gradients of the barycentric coordinates of triangle (A,B,C)
inline void bary_grads(const Point2& A, const Point2& B, const Point2& C, double& area,
                       Vec2& g1, Vec2& g2, Vec2& g3) {
    const double det = (B - A).cross(C - A);
    area = 0.5 * det;
    g1 = Vec2{B.y - C.y, C.x - B.x} * (1.0 / det);
    g2 = Vec2{C.y - A.y, A.x - C.x} * (1.0 / det);
    g3 = Vec2{A.y - B.y, B.x - A.x} * (1.0 / det);
}

} // namespace femdetail

// velocity trace callback: point, which boundary it sits on, and the curve
// parameter when known (NaN otherwise, e.g. on meshes not tied to a geometry)
using TraceFn = std::function<Vec2(const Point2&, CurveId, double)>;
using BodyForceFn = std::function<Vec2(const Point2&)>;

struct StokesSolution {
    Eigen::VectorXd vel;  // 2 * n_scalar, Dirichlet values included
    Eigen::VectorXd pres; // n_vertices, zero mean
    std::array<double, 3> rigid_c{0.0, 0.0, 0.0};
    double div_residual = 0.0;   // ||B u - g|| after solve
    double gauge_defect = 0.0;   // |m^T p|
    double compat_defect = 0.0;  // discrete flux of the boundary data before projection
    double multiplier = 0.0;     // mass-source multiplier absorbed by the gauge row
};

class StokesSolver {
  public:
    // geometry may be null for meshes not tied to the neck domain
    StokesSolver(const NeckGeometry* geom, const TriMesh& mesh, double mu = -1.0)
        : geom_(geom), mesh_(&mesh), space_(mesh), mu_(mu > 0 ? mu : (geom ? geom->mu() : 1.0)) {
        assemble_operators();
        build_locator();
    }

    const FemSpace& space() const { return space_; }
    const TriMesh& mesh() const { return *mesh_; }
    double mu() const { return mu_; }

    // ---- solves -----------------------------------------------------------

    StokesSolution solve_dirichlet(const TraceFn& trace, const BodyForceFn& f = nullptr) {
        return solve_impl(trace, f, false);
    }

    // particle trace = sum C^alpha psi_alpha with C unknown; returns solution
    // with rigid_c filled
    StokesSolution solve_rigid(const TraceFn& outer_trace, const BodyForceFn& f = nullptr) {
        return solve_impl(outer_trace, f, true);
    }

    // ---- energies and norms ------------------------------------------------

    // a(u, v) = int 2 mu e(u):e(v) using the assembled operator, evaluated in
    // the symmetrized form so the value is exactly symmetric in floating point
    double energy_inner(const StokesSolution& a, const StokesSolution& b) const {
        if (a.vel.size() != A_.rows() || b.vel.size() != A_.rows())
            throw std::invalid_argument("energy_inner: solutions from a different mesh");
        return 0.5 * (a.vel.dot(A_ * b.vel) + b.vel.dot(A_ * a.vel));
    }

    double velocity_l2(const Eigen::VectorXd& vel) const {
        double acc = 0.0;
        const auto& qp = TriQuadrature::points();
        const auto& qw = TriQuadrature::weights();
        for (std::size_t t = 0; t < mesh_->triangles.size(); ++t) {
            const auto& nodes = space_.p2_nodes(static_cast<int>(t));
            double area;
            Vec2 g1, g2, g3;
            const auto& tri = mesh_->triangles[t];
            femdetail::bary_grads(mesh_->vertices[tri[0]], mesh_->vertices[tri[1]],
                                  mesh_->vertices[tri[2]], area, g1, g2, g3);
            for (int q = 0; q < TriQuadrature::n; ++q) {
                const auto b = femdetail::p2_basis(qp[q][0], qp[q][1], g1, g2, g3);
                Vec2 u{0.0, 0.0};
                for (int i = 0; i < 6; ++i) {
                    u.x += b.N[i] * vel[2 * nodes[i]];
                    u.y += b.N[i] * vel[2 * nodes[i] + 1];
                }
                acc += qw[q] * area * u.norm2();
            }
        }
        return std::sqrt(acc);
    }

    // ---- pointwise evaluation ----------------------------------------------

    Vec2 eval_velocity(const StokesSolution& s, const Point2& p) const {
        const Located loc = locate(p);
        const auto b = basis_at(loc);
        Vec2 u{0.0, 0.0};
        const auto& nodes = space_.p2_nodes(loc.tri);
        for (int i = 0; i < 6; ++i) {
            u.x += b.N[i] * s.vel[2 * nodes[i]];
            u.y += b.N[i] * s.vel[2 * nodes[i] + 1];
        }
        return u;
    }

    Tensor2 eval_gradient(const StokesSolution& s, const Point2& p) const {
        const Located loc = locate(p);
        const auto b = basis_at(loc);
        Tensor2 gmat;
        const auto& nodes = space_.p2_nodes(loc.tri);
        for (int i = 0; i < 6; ++i) {
            gmat.a11 += b.grad[i].x * s.vel[2 * nodes[i]];
            gmat.a12 += b.grad[i].y * s.vel[2 * nodes[i]];
            gmat.a21 += b.grad[i].x * s.vel[2 * nodes[i] + 1];
            gmat.a22 += b.grad[i].y * s.vel[2 * nodes[i] + 1];
        }
        return gmat;
    }

    double eval_pressure(const StokesSolution& s, const Point2& p) const {
        const Located loc = locate(p);
        const double l1 = loc.l1, l2 = loc.l2, l3 = 1.0 - loc.l1 - loc.l2;
        const auto& tri = mesh_->triangles[loc.tri];
        return l1 * s.pres[tri[0]] + l2 * s.pres[tri[1]] + l3 * s.pres[tri[2]];
    }

    Tensor2 eval_stress(const StokesSolution& s, const Point2& p) const {
        const Tensor2 e = eval_gradient(s, p).sym();
        const double pr = eval_pressure(s, p);
        Tensor2 sig = 2.0 * mu_ * e;
        sig.a11 -= pr;
        sig.a22 -= pr;
        return sig;
    }

    // surface route for the boundary functionals: int_{particle} q . sigma nu ds
    // with q a rigid mode; nu is the outer normal of the particle
    double particle_stress_functional(const StokesSolution& s, RigidMode m) const {
        double acc = 0.0;
        for (const auto& be : space_.boundary_edge_nodes()) {
            if (be.curve != CurveId::Particle) continue;
            const Point2 A = mesh_->vertices[be.a], B = mesh_->vertices[be.b];
            const int tri = edge_tri_.at({std::min(be.a, be.b), std::max(be.a, be.b)});
            const Point2 cen = (mesh_->vertices[mesh_->triangles[tri][0]] +
                                mesh_->vertices[mesh_->triangles[tri][1]] +
                                mesh_->vertices[mesh_->triangles[tri][2]]) *
                               (1.0 / 3.0);
            Vec2 nrm{(B - A).y, -(B - A).x};
            const double len = nrm.norm();
            nrm = nrm * (1.0 / len);
            // outer normal of the particle points toward the fluid triangle
            if (nrm.dot(cen - 0.5 * (A + B)) < 0.0) nrm = -nrm;
            for (const auto& gq : line_gauss4()) {
                const Point2 p = A + gq[0] * (B - A);
                // evaluate stress from the adjacent element
                const Tensor2 sig = stress_in_tri(s, tri, p);
                const Vec2 q = rigid_mode_velocity(m, p);
                acc += gq[1] * len * q.dot(sig.apply(nrm));
            }
        }
        return acc;
    }

    const Eigen::SparseMatrix<double>& stiffness() const { return A_; }

  private:
    struct Located {
        int tri = -1;
        double l1 = 0, l2 = 0;
    };

    void assemble_operators() {
        const int ns = space_.n_scalar();
        const int nv = space_.n_vertices();
        std::vector<Eigen::Triplet<double>> ta, tb;
        mass_row_.assign(nv, 0.0);
        const auto& qp = TriQuadrature::points();
        const auto& qw = TriQuadrature::weights();

        for (std::size_t t = 0; t < mesh_->triangles.size(); ++t) {
            const auto& tri = mesh_->triangles[t];
            const auto& nodes = space_.p2_nodes(static_cast<int>(t));
            double area;
            Vec2 g1, g2, g3;
            femdetail::bary_grads(mesh_->vertices[tri[0]], mesh_->vertices[tri[1]],
                                  mesh_->vertices[tri[2]], area, g1, g2, g3);
            double Ae[12][12] = {};
            double Be[3][12] = {};
            for (int q = 0; q < TriQuadrature::n; ++q) {
                const auto b = femdetail::p2_basis(qp[q][0], qp[q][1], g1, g2, g3);
                const double w = qw[q] * area;
                const double l[3] = {qp[q][0], qp[q][1], 1.0 - qp[q][0] - qp[q][1]};
                for (int i = 0; i < 6; ++i) {
                    for (int j = 0; j < 6; ++j) {
                        // 2 mu e(u):e(v): entry = mu [delta_{ci cj} grad_i.grad_j
                        //                            + d_{ci} phi_j d_{cj} phi_i]
                        const Vec2 gi = b.grad[i], gj = b.grad[j];
                        const double common = gi.dot(gj);
                        Ae[2 * i][2 * j] += w * mu_ * (common + gi.x * gj.x);
                        Ae[2 * i][2 * j + 1] += w * mu_ * (gi.y * gj.x);
                        Ae[2 * i + 1][2 * j] += w * mu_ * (gi.x * gj.y);
                        Ae[2 * i + 1][2 * j + 1] += w * mu_ * (common + gi.y * gj.y);
                    }
                    for (int r = 0; r < 3; ++r) {
                        Be[r][2 * i] += w * l[r] * b.grad[i].x;
                        Be[r][2 * i + 1] += w * l[r] * b.grad[i].y;
                    }
                }
                for (int r = 0; r < 3; ++r) mass_row_[tri[r]] += w * l[r];
            }
            for (int i = 0; i < 6; ++i)
                for (int ci = 0; ci < 2; ++ci)
                    for (int j = 0; j < 6; ++j)
                        for (int cj = 0; cj < 2; ++cj)
                            ta.emplace_back(2 * nodes[i] + ci, 2 * nodes[j] + cj,
                                            Ae[2 * i + ci][2 * j + cj]);
            for (int r = 0; r < 3; ++r)
                for (int j = 0; j < 6; ++j)
                    for (int cj = 0; cj < 2; ++cj)
                        tb.emplace_back(tri[r], 2 * nodes[j] + cj, Be[r][2 * j + cj]);
        }
        A_.resize(2 * ns, 2 * ns);
        A_.setFromTriplets(ta.begin(), ta.end());
        A_ = 0.5 * (Eigen::SparseMatrix<double>(A_.transpose()) + A_);
        B_.resize(nv, 2 * ns);
        B_.setFromTriplets(tb.begin(), tb.end());

        // edge -> adjacent triangle (any one) for boundary stress evaluation
        for (std::size_t t = 0; t < mesh_->triangles.size(); ++t) {
            const auto& tri = mesh_->triangles[t];
            for (int e = 0; e < 3; ++e) {
                const int a = std::min(tri[e], tri[(e + 1) % 3]);
                const int b = std::max(tri[e], tri[(e + 1) % 3]);
                edge_tri_[{a, b}] = static_cast<int>(t);
            }
        }
    }

    // ---- main solve --------------------------------------------------------

    // dof classification and reduced-system factorization for one structure
    // (all-boundary Dirichlet, or Dirichlet outer + rigid-combo particle)
    struct Pattern {
        std::vector<int> kind; // -1 free, -2 rigid combo, 0 Dirichlet
        std::vector<int> fidx;
        int nfree = 0, c0 = 0, p0 = 0, l0 = 0, ntot = 0;
        Eigen::SparseMatrix<double> elim; // rhs = -elim * dval  (reduced x full)
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    };

    // rigid combo coefficient of mode alpha at a velocity dof
    double rigid_coef(int dof, int alpha) const {
        const Point2 xp = space_.node_coord(dof / 2);
        const Vec2 psi = rigid_mode_velocity(static_cast<RigidMode>(alpha + 1), xp);
        return dof % 2 == 0 ? psi.x : psi.y;
    }

    Pattern& ensure_pattern(bool rigid) {
        auto& pat = rigid ? pat_rigid_ : pat_dirichlet_;
        if (pat) return *pat;
        pat = std::make_unique<Pattern>();
        Pattern& P = *pat;
        const int ns = space_.n_scalar();
        const int nv = space_.n_vertices();

        P.kind.assign(2 * ns, -1);
        for (const auto& [node, curve] : space_.boundary_nodes()) {
            const int code = (rigid && curve == CurveId::Particle) ? -2 : 0;
            P.kind[2 * node] = code;
            P.kind[2 * node + 1] = code;
        }
        P.fidx.assign(2 * ns, -1);
        for (int d = 0; d < 2 * ns; ++d)
            if (P.kind[d] == -1) P.fidx[d] = P.nfree++;
        P.c0 = P.nfree;
        P.p0 = P.nfree + (rigid ? 3 : 0);
        P.l0 = P.p0 + nv;
        P.ntot = P.l0 + 1;

        auto col_targets = [&](int dof, std::vector<std::pair<int, double>>& out) {
            out.clear();
            if (P.kind[dof] == -1) {
                out.emplace_back(P.fidx[dof], 1.0);
            } else if (P.kind[dof] == -2) {
                for (int a = 0; a < 3; ++a) {
                    const double c = rigid_coef(dof, a);
                    if (c != 0.0) out.emplace_back(P.c0 + a, c);
                }
            }
        };

        std::vector<Eigen::Triplet<double>> ts, te;
        std::vector<std::pair<int, double>> rows, cols;
        for (int k = 0; k < A_.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(A_, k); it; ++it) {
                const int di = static_cast<int>(it.row());
                const int dj = static_cast<int>(it.col());
                const double v = it.value();
                col_targets(di, rows);
                if (rows.empty()) continue;
                if (P.kind[dj] == 0) {
                    for (auto& [ri, rc] : rows) te.emplace_back(ri, dj, rc * v);
                } else {
                    col_targets(dj, cols);
                    for (auto& [ri, rc] : rows)
                        for (auto& [cj, cc] : cols) ts.emplace_back(ri, cj, rc * v * cc);
                }
            }
        }
        for (int k = 0; k < B_.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(B_, k); it; ++it) {
                const int r = static_cast<int>(it.row());
                const int dj = static_cast<int>(it.col());
                const double v = it.value();
                if (P.kind[dj] == 0) {
                    te.emplace_back(P.p0 + r, dj, v);
                } else {
                    col_targets(dj, cols);
                    for (auto& [cj, cc] : cols) {
                        ts.emplace_back(P.p0 + r, cj, v * cc);
                        ts.emplace_back(cj, P.p0 + r, v * cc); // B^T block
                    }
                }
            }
        }
        for (int r = 0; r < nv; ++r) {
            ts.emplace_back(P.p0 + r, P.l0, mass_row_[r]);
            ts.emplace_back(P.l0, P.p0 + r, mass_row_[r]);
        }

        Eigen::SparseMatrix<double> S(P.ntot, P.ntot);
        S.setFromTriplets(ts.begin(), ts.end());
        S.makeCompressed();
        P.elim.resize(P.ntot, 2 * ns);
        P.elim.setFromTriplets(te.begin(), te.end());
        P.lu.compute(S);
        if (P.lu.info() != Eigen::Success)
            throw std::runtime_error("stokes solve: singular saddle system "
                                     "(gauge status: zero-mean row present)");
        return P;
    }

    StokesSolution solve_impl(const TraceFn& trace, const BodyForceFn& f, bool rigid) {
        const int ns = space_.n_scalar();
        const int nv = space_.n_vertices();
        Pattern& P = ensure_pattern(rigid);

        Eigen::VectorXd dval = Eigen::VectorXd::Zero(2 * ns);
        for (const auto& [node, curve] : space_.boundary_nodes()) {
            if (P.kind[2 * node] != 0) continue;
            const auto par = space_.node_param(node);
            const double tpar = par ? par->second : std::numeric_limits<double>::quiet_NaN();
            const Vec2 val = trace(space_.node_coord(node), curve, tpar);
            dval[2 * node] = val.x;
            dval[2 * node + 1] = val.y;
        }

        check_continuum_compatibility(trace, rigid);

        StokesSolution sol;
        sol.compat_defect = discrete_flux(P.kind, dval);
        project_flux_defect(P.kind, dval, sol.compat_defect);

        Eigen::VectorXd rhs = -(P.elim * dval);

        if (f) {
            const auto& qp = TriQuadrature::points();
            const auto& qw = TriQuadrature::weights();
            for (std::size_t t = 0; t < mesh_->triangles.size(); ++t) {
                const auto& tri = mesh_->triangles[t];
                const auto& nodes = space_.p2_nodes(static_cast<int>(t));
                double area;
                Vec2 g1, g2, g3;
                femdetail::bary_grads(mesh_->vertices[tri[0]], mesh_->vertices[tri[1]],
                                      mesh_->vertices[tri[2]], area, g1, g2, g3);
                for (int q = 0; q < TriQuadrature::n; ++q) {
                    const double l1 = qp[q][0], l2 = qp[q][1], l3 = 1 - l1 - l2;
                    const Point2 xq = l1 * mesh_->vertices[tri[0]] +
                                      l2 * mesh_->vertices[tri[1]] +
                                      l3 * mesh_->vertices[tri[2]];
                    const Vec2 fv = f(xq);
                    const auto b = femdetail::p2_basis(l1, l2, g1, g2, g3);
                    for (int i = 0; i < 6; ++i) {
                        for (int c = 0; c < 2; ++c) {
                            const int dof = 2 * nodes[i] + c;
                            const double contrib =
                                qw[q] * area * b.N[i] * (c == 0 ? fv.x : fv.y);
                            if (P.kind[dof] == -1) {
                                rhs[P.fidx[dof]] += contrib;
                            } else if (P.kind[dof] == -2) {
                                for (int a = 0; a < 3; ++a)
                                    rhs[P.c0 + a] += rigid_coef(dof, a) * contrib;
                            }
                        }
                    }
                }
            }
        }

        const Eigen::VectorXd x = P.lu.solve(rhs);

        sol.vel = Eigen::VectorXd::Zero(2 * ns);
        for (int d = 0; d < 2 * ns; ++d) {
            if (P.kind[d] == -1) {
                sol.vel[d] = x[P.fidx[d]];
            } else if (P.kind[d] == 0) {
                sol.vel[d] = dval[d];
            } else {
                double v = 0.0;
                for (int a = 0; a < 3; ++a) v += rigid_coef(d, a) * x[P.c0 + a];
                sol.vel[d] = v;
            }
        }
        // the assembled continuity block is +B, so the solved multiplier is
        // the negative of the physical pressure
        sol.pres = -x.segment(P.p0, nv);
        if (rigid) for (int a = 0; a < 3; ++a) sol.rigid_c[a] = x[P.c0 + a];
        sol.multiplier = x[P.l0];

        double gauge = 0.0;
        for (int r = 0; r < nv; ++r) gauge += mass_row_[r] * sol.pres[r];
        sol.gauge_defect = std::fabs(gauge);
        Eigen::VectorXd bres = B_ * sol.vel;
        for (int r = 0; r < nv; ++r) bres[r] += mass_row_[r] * sol.multiplier;
        sol.div_residual = bres.norm();
        return sol;
    }

    // continuum compatibility of the prescribed data (zero net flux through
    // the exact boundary); violation is a caller error
    void check_continuum_compatibility(const TraceFn& trace, bool rigid) const {
        double flux = 0.0, scale = 1.0;
        if (geom_) {
            for (CurveId cid : {CurveId::Outer, CurveId::Particle}) {
                if (rigid && cid == CurveId::Particle) continue; // rigid modes are flux-free
                const ClosedCurve& c = geom_->curve(cid);
                const int n = 2048;
                for (int i = 0; i < n; ++i) {
                    const double t = -kPi + (i + 0.5) * 2.0 * kPi / n;
                    auto [xj, yj] = c.jet(t);
                    const double sp = std::hypot(xj.dx, yj.dx);
                    const Vec2 nu{yj.dx / sp, -xj.dx / sp};
                    const Vec2 u = trace({xj.v, yj.v}, cid, t);
                    // the particle's outer normal points into the fluid; the
                    // outer curve's outward normal leaves the fluid: the net
                    // flux out of Omega is outer minus particle
                    const double sgn = (cid == CurveId::Outer) ? 1.0 : -1.0;
                    flux += sgn * u.dot(nu) * sp * 2.0 * kPi / n;
                    scale += u.norm() * sp * 2.0 * kPi / n;
                }
            }
        } else {
            for (const auto& be : space_.boundary_edge_nodes()) {
                const Point2 A = mesh_->vertices[be.a], B = mesh_->vertices[be.b];
                Vec2 nrm{(B - A).y, -(B - A).x};
                for (const auto& gq : line_gauss4()) {
                    const Point2 p = A + gq[0] * (B - A);
                    const Vec2 u = trace(p, be.curve, std::numeric_limits<double>::quiet_NaN());
                    flux += gq[1] * u.dot(nrm) * orient_sign(be);
                    scale += gq[1] * u.norm() * nrm.norm();
                }
            }
        }
        if (std::fabs(flux) > 1e-8 * scale)
            throw std::invalid_argument(
                "stokes solve: boundary data violates the zero-net-flux "
                "compatibility condition (net flux " + std::to_string(flux) + ")");
    }

    double orient_sign(const FemSpace::BEdgeNodes& be) const {
        // +1 if the straight-edge normal (dy, -dx) points out of the fluid
        const int tri = edge_tri_.at({std::min(be.a, be.b), std::max(be.a, be.b)});
        const Point2 cen = (mesh_->vertices[mesh_->triangles[tri][0]] +
                            mesh_->vertices[mesh_->triangles[tri][1]] +
                            mesh_->vertices[mesh_->triangles[tri][2]]) *
                           (1.0 / 3.0);
        const Point2 A = mesh_->vertices[be.a], B = mesh_->vertices[be.b];
        const Vec2 nrm{(B - A).y, -(B - A).x};
        return nrm.dot(cen - 0.5 * (A + B)) < 0.0 ? 1.0 : -1.0;
    }

    // net discrete flux of the interpolated Dirichlet data over the mesh
    // boundary (Simpson is exact for the quadratic trace on a straight edge)
    double discrete_flux(const std::vector<int>& kind, const Eigen::VectorXd& dval) const {
        double flux = 0.0;
        for (const auto& be : space_.boundary_edge_nodes()) {
            const Point2 A = mesh_->vertices[be.a], B = mesh_->vertices[be.b];
            const Vec2 nrm{(B - A).y, -(B - A).x};
            const double sgn = orient_sign(be);
            auto val = [&](int node) -> Vec2 {
                const int d = 2 * node;
                if (kind[d] != 0) return {0.0, 0.0}; // rigid combos are flux-free
                return {dval[d], dval[d + 1]};
            };
            const Vec2 va = val(be.a), vb = val(be.b), vm = val(be.mid);
            const Vec2 simpson = (va + 4.0 * vm + vb) * (1.0 / 6.0);
            flux += sgn * simpson.dot(nrm);
        }
        return flux;
    }

    // remove the discrete flux defect with a normal bump supported near the
    // top of the outer boundary
    void project_flux_defect(const std::vector<int>& kind, Eigen::VectorXd& dval,
                             double defect) const {
        if (!geom_ || defect == 0.0) return;
        const ClosedCurve& oc = geom_->outer_curve();
        auto bump = [&](int node) -> Vec2 {
            const auto par = space_.node_param(node);
            if (!par || par->first != CurveId::Outer) return {0.0, 0.0};
            const double t = par->second;
            const double u = std::fabs(ClosedCurve::wrap(t - kPi)) / 0.8;
            if (u >= 1.0) return {0.0, 0.0};
            const double w = 1.0 - smoothstep7(u);
            return w * oc.outward_normal(t);
        };
        Eigen::VectorXd dpatch = Eigen::VectorXd::Zero(dval.size());
        for (const auto& [node, curve] : space_.boundary_nodes()) {
            if (curve != CurveId::Outer || kind[2 * node] != 0) continue;
            const Vec2 b = bump(node);
            dpatch[2 * node] = b.x;
            dpatch[2 * node + 1] = b.y;
        }
        const double fpatch = discrete_flux(kind, dpatch);
        if (std::fabs(fpatch) < 1e-14) return;
        const double c = defect / fpatch;
        for (int d = 0; d < dval.size(); ++d)
            if (kind[d] == 0) dval[d] -= c * dpatch[d];
    }

    // ---- point location ----------------------------------------------------

    void build_locator() {
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (const auto& v : mesh_->vertices) {
            xmin = std::min(xmin, v.x);
            xmax = std::max(xmax, v.x);
            ymin = std::min(ymin, v.y);
            ymax = std::max(ymax, v.y);
        }
        bb_ = {xmin, ymin};
        const int n = std::max(8, static_cast<int>(std::sqrt(mesh_->triangles.size())));
        nbx_ = n;
        nby_ = n;
        hx_ = (xmax - xmin) / nbx_ * (1.0 + 1e-12) + 1e-300;
        hy_ = (ymax - ymin) / nby_ * (1.0 + 1e-12) + 1e-300;
        bins_.assign(static_cast<std::size_t>(nbx_) * nby_, {});
        for (std::size_t t = 0; t < mesh_->triangles.size(); ++t) {
            const auto& tri = mesh_->triangles[t];
            double tx0 = 1e300, tx1 = -1e300, ty0 = 1e300, ty1 = -1e300;
            for (int i = 0; i < 3; ++i) {
                const Point2& p = mesh_->vertices[tri[i]];
                tx0 = std::min(tx0, p.x);
                tx1 = std::max(tx1, p.x);
                ty0 = std::min(ty0, p.y);
                ty1 = std::max(ty1, p.y);
            }
            const int i0 = std::clamp(static_cast<int>((tx0 - bb_.x) / hx_), 0, nbx_ - 1);
            const int i1 = std::clamp(static_cast<int>((tx1 - bb_.x) / hx_), 0, nbx_ - 1);
            const int j0 = std::clamp(static_cast<int>((ty0 - bb_.y) / hy_), 0, nby_ - 1);
            const int j1 = std::clamp(static_cast<int>((ty1 - bb_.y) / hy_), 0, nby_ - 1);
            for (int i = i0; i <= i1; ++i)
                for (int jj = j0; jj <= j1; ++jj)
                    bins_[static_cast<std::size_t>(jj) * nbx_ + i].push_back(
                        static_cast<int>(t));
        }
    }

    Located locate(const Point2& p) const {
        const int i = std::clamp(static_cast<int>((p.x - bb_.x) / hx_), 0, nbx_ - 1);
        const int j = std::clamp(static_cast<int>((p.y - bb_.y) / hy_), 0, nby_ - 1);
        Located best;
        double best_short = -1e300;
        for (int t : bins_[static_cast<std::size_t>(j) * nbx_ + i]) {
            const auto& tri = mesh_->triangles[t];
            const Point2 A = mesh_->vertices[tri[0]], B = mesh_->vertices[tri[1]],
                         C = mesh_->vertices[tri[2]];
            const double det = (B - A).cross(C - A);
            const double w1 = (B - p).cross(C - p) / det;
            const double w2 = (C - p).cross(A - p) / det;
            const double w3 = 1.0 - w1 - w2;
            const double shortfall = std::min({w1, w2, w3});
            if (shortfall > best_short) {
                best_short = shortfall;
                best = {t, w1, w2};
            }
            if (shortfall >= -1e-12) return {t, w1, w2};
        }
        if (best.tri >= 0 && best_short > -1e-6) return best;
        throw std::invalid_argument("eval: point outside the mesh");
    }

    femdetail::P2Basis basis_at(const Located& loc) const {
        const auto& tri = mesh_->triangles[loc.tri];
        double area;
        Vec2 g1, g2, g3;
        femdetail::bary_grads(mesh_->vertices[tri[0]], mesh_->vertices[tri[1]],
                              mesh_->vertices[tri[2]], area, g1, g2, g3);
        return femdetail::p2_basis(loc.l1, loc.l2, g1, g2, g3);
    }

    Tensor2 stress_in_tri(const StokesSolution& s, int t, const Point2& p) const {
        const auto& tri = mesh_->triangles[t];
        const Point2 A = mesh_->vertices[tri[0]], B = mesh_->vertices[tri[1]],
                     C = mesh_->vertices[tri[2]];
        const double det = (B - A).cross(C - A);
        const double w1 = (B - p).cross(C - p) / det;
        const double w2 = (C - p).cross(A - p) / det;
        double area;
        Vec2 g1, g2, g3;
        femdetail::bary_grads(A, B, C, area, g1, g2, g3);
        const auto b = femdetail::p2_basis(w1, w2, g1, g2, g3);
        Tensor2 gmat;
        const auto& nodes = space_.p2_nodes(t);
        for (int i = 0; i < 6; ++i) {
            gmat.a11 += b.grad[i].x * s.vel[2 * nodes[i]];
            gmat.a12 += b.grad[i].y * s.vel[2 * nodes[i]];
            gmat.a21 += b.grad[i].x * s.vel[2 * nodes[i] + 1];
            gmat.a22 += b.grad[i].y * s.vel[2 * nodes[i] + 1];
        }
        const double w3 = 1.0 - w1 - w2;
        const double pr = w1 * s.pres[tri[0]] + w2 * s.pres[tri[1]] + w3 * s.pres[tri[2]];
        Tensor2 sig = 2.0 * mu_ * gmat.sym();
        sig.a11 -= pr;
        sig.a22 -= pr;
        return sig;
    }

    const NeckGeometry* geom_;
    const TriMesh* mesh_;
    FemSpace space_;
    double mu_;

    Eigen::SparseMatrix<double> A_, B_;
    std::vector<double> mass_row_;
    std::map<std::pair<int, int>, int> edge_tri_;

    std::unique_ptr<Pattern> pat_dirichlet_, pat_rigid_;

    Point2 bb_;
    int nbx_ = 1, nby_ = 1;
    double hx_ = 1, hy_ = 1;
    std::vector<std::vector<int>> bins_;
};

} // namespace neckflow

#endif // NECKFLOW_FEM_HPP
