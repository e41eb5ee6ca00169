// aux_fields.hpp
//
// Closed-form gap fields on the neck Omega_2R: the normalized gap coordinate
// k(x) in [-1/2, 1/2], divergence-free auxiliary velocity/pressure pairs for
// the three rigid modes and for the polynomial boundary-data families, with
// exact first and second derivatives via jet propagation.
//
// Every velocity profile here is the thin-gap (lubrication) form
//     v = (boundary shear interpolant) + (Poiseuille bracket) * (k^2 - 1/4),
// with the brackets chosen so that div v = 0 holds identically in the neck
// and the traces on k = +-1/2 are exact.

#ifndef NECKFLOW_AUX_FIELDS_HPP
#define NECKFLOW_AUX_FIELDS_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "neckflow/core.hpp"
#include "neckflow/geometry.hpp"

namespace neckflow {

enum class RigidMode : int { Translate1 = 1, Translate2 = 2, Rotate = 3 };

inline Vec2 rigid_mode_velocity(RigidMode m, const Point2& p) {
    switch (m) {
        case RigidMode::Translate1: return {1.0, 0.0};
        case RigidMode::Translate2: return {0.0, 1.0};
        case RigidMode::Rotate: return {p.y, -p.x};
    }
    return {};
}

enum class BcClass { Phi1, Phi2, Phi3, Phi4, Custom };

struct BcSpec {
    BcClass cls = BcClass::Phi1;
    int l = 1; // polynomial degree for Phi3 (l1) / Phi4 (l2)

    // class value on the lower gap boundary
    Vec2 wall_value(double x1) const {
        switch (cls) {
            case BcClass::Phi1: return {1.0, 0.0};
            case BcClass::Phi2: return {0.0, 1.0};
            case BcClass::Phi3: return {std::pow(x1, l), 0.0};
            case BcClass::Phi4: return {0.0, std::pow(x1, l)};
            case BcClass::Custom: break;
        }
        throw std::invalid_argument("wall_value: custom data has no class polynomial");
    }

    std::string name() const {
        switch (cls) {
            case BcClass::Phi1: return "phi1";
            case BcClass::Phi2: return "phi2";
            case BcClass::Phi3: return "phi3_l" + std::to_string(l);
            case BcClass::Phi4: return "phi4_l" + std::to_string(l);
            case BcClass::Custom: return "custom";
        }
        return "?";
    }
};

// normalized gap coordinate: -1/2 on the wall, +1/2 on the particle
inline double keller(const NeckGeometry& g, const Point2& p) {
    if (std::fabs(p.x) > 2.0 * g.R() * (1.0 + 1e-12))
        throw std::domain_error("keller: point outside the neck");
    return (p.y - g.h(p.x)) / g.delta(p.x) - 0.5;
}

inline Vec2 keller_grad(const NeckGeometry& g, const Point2& p) {
    const double d = g.delta(p.x);
    const double k = keller(g, p);
    const double K = g.kappa1() + g.kappa();
    const double k0 = g.kappa0();
    return {-(K + 2.0 * k0 * k) * p.x / d, 1.0 / d};
}

// full jet evaluation of one auxiliary pair at a point
struct AuxEval {
    Jet2 v1, v2;                       // velocity components with derivatives
    double p = 0, px = 0, py = 0;      // pressure value and gradient

    Vec2 velocity() const { return {v1.v, v2.v}; }
    Tensor2 gradient() const { return {v1.dx, v1.dy, v2.dx, v2.dy}; }
    double divergence() const { return v1.dx + v2.dy; }
    Vec2 laplacian() const { return {v1.dxx + v1.dyy, v2.dxx + v2.dyy}; }
    double pressure() const { return p; }
    Vec2 pressure_grad() const { return {px, py}; }
    // f = mu lap(v) - grad(p); the caller supplies mu
    Vec2 residual(double mu) const {
        return {mu * (v1.dxx + v1.dyy) - px, mu * (v2.dxx + v2.dyy) - py};
    }
};

namespace detail {

// jet whose value is the y-derivative of f; only first-order slots are
// propagated (second-order slots would need third derivatives of f)
inline Jet2 dy_of(const Jet2& f) { return {f.dy, f.dxy, f.dyy, 0.0, 0.0, 0.0}; }

struct GapJets {
    Jet2 X, Y, dj, kj, KK; // position, gap width, keller coord, k^2-1/4
    double mu, kap, kap1, k0, K;
};

inline GapJets gap_jets(const NeckGeometry& g, const Point2& p) {
    GapJets j;
    j.mu = g.mu();
    j.kap = g.kappa();
    j.kap1 = g.kappa1();
    j.k0 = g.kappa0();
    j.K = g.kappa1() + g.kappa();
    j.X = Jet2::var_x(p.x);
    j.Y = Jet2::var_y(p.y);
    j.dj = g.eps() + j.k0 * j.X * j.X;
    j.kj = (j.Y - j.kap * j.X * j.X) / j.dj - 0.5;
    j.KK = j.kj * j.kj - 0.25;
    return j;
}

} // namespace detail

// One closed-form velocity/pressure pair.  Valid on the neck |x1| <= 2R;
// evaluation is extended by a C^3 taper to zero on 2R < |x1| < 2.5R so the
// pair has bounded norms outside the region it is designed for.
class AuxPair {
  public:
    static AuxPair rigid(const NeckGeometry& g, RigidMode m) {
        AuxPair a(g);
        a.kind_ = static_cast<int>(m);
        return a;
    }

    static AuxPair boundary(const NeckGeometry& g, BcSpec bc) {
        if (bc.cls == BcClass::Custom)
            throw std::invalid_argument(
                "aux pair: no closed-form auxiliary exists for custom boundary data");
        if ((bc.cls == BcClass::Phi3 || bc.cls == BcClass::Phi4) && bc.l < 1)
            throw std::invalid_argument("aux pair: polynomial degree must be >= 1");
        AuxPair a(g);
        a.kind_ = 10 + static_cast<int>(bc.cls);
        a.l_ = bc.l;
        return a;
    }

    const NeckGeometry& geometry() const { return *geom_; }

    // the half-width of the region where the pair satisfies its identities
    double valid_half_width() const { return 2.0 * geom_->R(); }

    AuxEval eval(const Point2& p) const {
        const double aw = std::fabs(p.x);
        const double w0 = valid_half_width();
        const double w1 = 1.25 * w0;
        if (aw >= w1) return {};
        AuxEval e = eval_core(p);
        if (aw > w0) {
            // C^3 taper to zero
            const double sgn = p.x < 0.0 ? -1.0 : 1.0;
            Jet2 u = (Jet2::var_x(p.x) * sgn - w0) / (w1 - w0);
            const double uu = u.v;
            Jet2 chi(1.0 - smoothstep7(uu));
            const double d1 = -smoothstep7_d1(uu);
            const double d2 =
                -(uu * uu * (420.0 + uu * (-1680.0 + uu * (2100.0 - 840.0 * uu))));
            chi.dx = d1 * u.dx;
            chi.dxx = d2 * u.dx * u.dx;
            e.v1 = e.v1 * chi;
            e.v2 = e.v2 * chi;
            const double pv = e.p;
            e.p = pv * chi.v;
            e.px = e.px * chi.v + pv * chi.dx;
            e.py = e.py * chi.v;
        }
        return e;
    }

    Vec2 velocity(const Point2& p) const { return eval(p).velocity(); }
    Tensor2 gradient(const Point2& p) const { return eval(p).gradient(); }
    double pressure(const Point2& p) const { return eval(p).p; }
    Vec2 residual(const Point2& p) const { return eval(p).residual(geom_->mu()); }

    // prescribed traces on the two gap boundaries (for tests)
    Vec2 trace_particle(double x1) const {
        if (kind_ >= 1 && kind_ <= 3)
            return rigid_mode_velocity(static_cast<RigidMode>(kind_),
                                       {x1, geom_->eps() + geom_->h1(x1)});
        return {0.0, 0.0};
    }
    Vec2 trace_wall(double x1) const {
        if (kind_ >= 1 && kind_ <= 3) return {0.0, 0.0};
        return bc_spec().wall_value(x1);
    }

    BcSpec bc_spec() const {
        if (kind_ < 10) throw std::logic_error("bc_spec: rigid-mode pair");
        return {static_cast<BcClass>(kind_ - 10), l_};
    }

  private:
    explicit AuxPair(const NeckGeometry& g) : geom_(&g) {}

    AuxEval eval_core(const Point2& p) const {
        using namespace detail;
        const GapJets j = gap_jets(*geom_, p);
        const double mu = j.mu;
        AuxEval e;
        switch (kind_) {
            case 1: { // translation along the wall
                const Jet2 H = 1.0 / j.k0 - 4.0 * j.X * j.X / j.dj;
                e.v1 = (j.kj + 0.5) + j.K * H * j.KK;
                e.v2 = j.KK * j.X *
                       (2.0 * j.K * (1.0 + j.k0 * H) * j.kj + (j.k0 + j.K * j.K * H));
                const Jet2 t1 = (2.0 * mu * j.K / j.k0) * j.X / (j.dj * j.dj);
                const Jet2 pr = t1 + mu * dy_of(e.v2);
                e.p = pr.v; e.px = pr.dx; e.py = pr.dy;
                break;
            }
            case 2: { // translation normal to the wall (squeeze)
                e.v1 = (6.0 * j.X / j.dj) * j.KK;
                const Jet2 G2 = -2.0 * j.kj + (6.0 * j.X * j.X / j.dj) * (j.K + 2.0 * j.k0 * j.kj);
                e.v2 = (j.kj + 0.5) + G2 * j.KK;
                const Jet2 pr = -3.0 * mu / (j.k0 * j.dj * j.dj) +
                                (2.0 * mu / j.dj) *
                                    ((6.0 * j.k0 * j.X * j.X / j.dj - 1.0) * j.kj * j.kj +
                                     j.kj * G2);
                e.p = pr.v; e.px = pr.dx; e.py = pr.dy;
                break;
            }
            case 3: { // rotation
                const Jet2 W = 1.0 / j.k0 - 4.0 * j.X * j.X / j.dj - 3.0 * j.Y * j.Y / j.dj;
                e.v1 = j.Y * (j.kj + 0.5) + (W - 2.0 * j.kj * j.Y) * j.KK;
                const Jet2 G3 = 2.0 * j.X * j.kj + j.X * (j.K + 2.0 * j.k0 * j.kj) * W;
                e.v2 = -j.X * (j.kj + 0.5) + G3 * j.KK;
                const Jet2 pr = (2.0 * mu / j.k0) * j.X / (j.dj * j.dj) +
                                mu * (-j.X / j.dj + dy_of(G3) * j.KK + 2.0 * j.kj * G3 / j.dj);
                e.p = pr.v; e.px = pr.dx; e.py = pr.dy;
                break;
            }
            case 10: { // Phi1: complement of mode 1
                AuxEval m1 = AuxPair::rigid(*geom_, RigidMode::Translate1).eval_core(p);
                e.v1 = 1.0 - m1.v1;
                e.v2 = -m1.v2;
                e.p = -m1.p; e.px = -m1.px; e.py = -m1.py;
                break;
            }
            case 11: { // Phi2: complement of mode 2
                AuxEval m2 = AuxPair::rigid(*geom_, RigidMode::Translate2).eval_core(p);
                e.v1 = -m2.v1;
                e.v2 = 1.0 - m2.v2;
                const Jet2 pr = 3.0 * mu / (j.k0 * j.dj * j.dj) + mu * dy_of(e.v2);
                e.p = pr.v; e.px = pr.dx; e.py = pr.dy;
                break;
            }
            case 12: { // Phi3: tangential polynomial x1^l on the wall
                const int l = l_;
                const Jet2 dk1 = -(j.K + 2.0 * j.k0 * j.kj) * j.X / j.dj;
                const Jet2 Xl = pow_int(j.X, l);
                const Jet2 poly32 = (32.0 * j.k0 * j.kj + 12.0 * j.kap) / double(l + 2);
                const Jet2 br = poly32 * pow_int(j.X, l + 2) / j.dj - (8.0 * j.kj - 3.0) * Xl;
                e.v1 = Xl * (0.5 - j.kj) + br * j.KK;
                const Jet2 G03 = (2.0 * j.kj - 1.0) * j.kj * j.dj * double(l) * pow_int(j.X, l - 1) -
                                 2.0 * pow_int(j.X, l + 1) * j.kj * (j.K + 2.0 * j.k0 * j.kj) -
                                 dk1 * (poly32 * pow_int(j.X, l + 2) - (8.0 * j.kj - 3.0) * Xl * j.dj);
                e.v2 = G03 * j.KK;
                e.p = 0.0; e.px = 0.0; e.py = 0.0;
                break;
            }
            case 13: { // Phi4: normal polynomial x1^l on the wall
                const int l = l_;
                const Jet2 dk1 = -(j.K + 2.0 * j.k0 * j.kj) * j.X / j.dj;
                if (l == 1) {
                    const Jet2 H = 1.0 / j.k0 - 4.0 * j.X * j.X / j.dj;
                    e.v1 = H * j.KK;
                    const Jet2 G04 = 2.0 * j.X * j.kj - j.dj * dk1 * H;
                    e.v2 = j.X * (0.5 - j.kj) + G04 * j.KK;
                    const Jet2 pr =
                        (2.0 * mu / j.k0) * j.X / (j.dj * j.dj) + mu * dy_of(e.v2);
                    e.p = pr.v; e.px = pr.dx; e.py = pr.dy;
                } else {
                    const Jet2 Xl = pow_int(j.X, l);
                    e.v1 = (-6.0 * pow_int(j.X, l + 1) / (double(l + 1) * j.dj)) * j.KK;
                    const Jet2 G04 = 2.0 * Xl * j.kj + 6.0 * dk1 * pow_int(j.X, l + 1) / double(l + 1);
                    e.v2 = Xl * (0.5 - j.kj) + G04 * j.KK;
                    e.p = 0.0; e.px = 0.0; e.py = 0.0;
                }
                break;
            }
            default:
                throw std::logic_error("aux pair: bad kind");
        }
        return e;
    }

    const NeckGeometry* geom_;
    int kind_ = 1;
    int l_ = 1;
};

// printed first-derivative formulas, kept separate from the jet route so the
// two can be cross-checked against each other
namespace printed {

inline double dx2_v1_comp1(const NeckGeometry& g, const Point2& p) {
    const double d = g.delta(p.x);
    const double k = keller(g, p);
    const double K = g.kappa1() + g.kappa();
    return 1.0 / d + (2.0 * K * k / d) * (-4.0 * p.x * p.x / d + 1.0 / g.kappa0());
}

inline double dx2_v2_comp1(const NeckGeometry& g, const Point2& p) {
    const double d = g.delta(p.x);
    return 12.0 * p.x * keller(g, p) / (d * d);
}

inline double dx2x2_v1_comp1(const NeckGeometry& g, const Point2& p) {
    const double d = g.delta(p.x);
    const double K = g.kappa1() + g.kappa();
    return (2.0 * K / (d * d)) * (-4.0 * p.x * p.x / d + 1.0 / g.kappa0());
}

inline double dx2_v3_comp1(const NeckGeometry& g, const Point2& p) {
    const double d = g.delta(p.x);
    const double k = keller(g, p);
    const double k0 = g.kappa0();
    const double W = 1.0 / k0 - 4.0 * p.x * p.x / d - 3.0 * p.y * p.y / d;
    return (k + 0.5) + p.y / d - (2.0 * k + 8.0 * p.y / d) * (k * k - 0.25) +
           (2.0 * k / d) * (W - 2.0 * k * p.y);
}

} // namespace printed

// uniform sampling of the neck Omega_r in (x1, k) coordinates
struct NeckSampler {
    NeckSampler(const NeckGeometry& g, int nx, int nk, double half_width)
        : geom(&g), nx_(nx), nk_(nk), hw_(half_width) {}

    int count() const { return nx_ * nk_; }
    Point2 point(int i) const {
        const int ix = i % nx_, ik = i / nx_;
        const double x = -hw_ + (ix + 0.5) * 2.0 * hw_ / nx_;
        const double k = -0.5 + (ik + 0.5) / nk_;
        return {x, geom->h(x) + geom->delta(x) * (k + 0.5)};
    }

    const NeckGeometry* geom;
    int nx_, nk_;
    double hw_;
};

enum class EnvelopeKind { InvDelta, AbsX1OverDelta2, InvSqrtDelta, Const, InvDeltaPlusAbsX1OverDelta2 };
enum class AuxQuantity { GradientNorm, ResidualNorm, DivergenceRel };

inline double envelope_value(EnvelopeKind e, const NeckGeometry& g, double x1) {
    const double d = g.delta(x1);
    switch (e) {
        case EnvelopeKind::InvDelta: return 1.0 / d;
        case EnvelopeKind::AbsX1OverDelta2: return std::fabs(x1) / (d * d);
        case EnvelopeKind::InvSqrtDelta: return 1.0 / std::sqrt(d);
        case EnvelopeKind::Const: return 1.0;
        case EnvelopeKind::InvDeltaPlusAbsX1OverDelta2:
            return 1.0 / d + std::fabs(x1) / (d * d);
    }
    return 1.0;
}

struct BoundReport {
    double sup_ratio = 0.0; // empirical constant: sup quantity/envelope
    Point2 argmax;
    int samples = 0;
};

inline BoundReport verify_bounds(const NeckGeometry& g, const AuxPair& pair, AuxQuantity q,
                                 EnvelopeKind env, int nx = 200, int nk = 20,
                                 double half_width = -1.0) {
    if (half_width <= 0.0) half_width = g.R();
    NeckSampler s(g, nx, nk, half_width);
    BoundReport r;
    r.samples = s.count();
    for (int i = 0; i < s.count(); ++i) {
        const Point2 p = s.point(i);
        const AuxEval e = pair.eval(p);
        double val = 0.0;
        switch (q) {
            case AuxQuantity::GradientNorm: val = e.gradient().frobenius(); break;
            case AuxQuantity::ResidualNorm: val = e.residual(g.mu()).norm(); break;
            case AuxQuantity::DivergenceRel:
                val = std::fabs(e.divergence()) /
                      std::max(e.gradient().frobenius(), 1e-300);
                break;
        }
        const double ratio = val / envelope_value(env, g, p.x);
        if (ratio > r.sup_ratio) {
            r.sup_ratio = ratio;
            r.argmax = p;
        }
    }
    return r;
}

} // namespace neckflow

#endif // NECKFLOW_AUX_FIELDS_HPP
