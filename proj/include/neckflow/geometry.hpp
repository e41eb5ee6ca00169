// geometry.hpp
//
// Fluid domain Omega = D \ closure(D1): a convex particle D1 hovering a
// distance eps above the boundary of D.  Inside |x1| <= 2R the two
// boundaries are exact parabolas,
//     wall:      x2 = h(x1)  = kappa  * x1^2,
//     particle:  x2 = eps + h1(x1),  h1 = kappa1 * x1^2,
// so the gap width is delta(x1) = eps + (kappa1 - kappa) x1^2.  Away from
// the neck each parabolic arc is morphed C^3-smoothly into an ellipse that
// closes the curve.

#ifndef NECKFLOW_GEOMETRY_HPP
#define NECKFLOW_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "neckflow/core.hpp"

namespace neckflow {

enum class RegionTag {
    Fluid,
    Particle,
    Outside,
    OnParticleBoundary,
    OnOuterBoundary,
};

enum class CurveId { Outer, Particle };

// Closure parameters.  Each curve is an ellipse morphed onto the exact
// parabola for |x1| <= 2R; the morph weight is 1 on the graph region
// |t| <= t1 = asin(2R/a) and tapers to 0 by |t| = t2 with a C^3 smoothstep.
//
// The particle ellipse is fitted tangent to its parabola at the blend start,
// which keeps the blended body convex.  The outer ellipse is a wide dome
// whose floor sits at depth `outer_floor` below the origin, so the domain
// opens up immediately past the neck instead of hugging the wall parabola;
// the gap flow discharges into a wide chamber and the far-field energy stays
// an ordinary O(1) quantity.
struct ClosureSpec {
    double particle_a_scale = 1.3;
    double particle_t2 = 1.35;
    double outer_a_scale = 3.5;
    double outer_t2 = 0.65;
    double outer_b_scale = 2.0; // dome vertical semi-axis as multiple of its width
    double outer_floor = 0.5;   // depth of the dome floor below y = 0 at the seam
};

// Closed C^3 curve: graph piece blended into an ellipse.  Parametrized by
// t in [-pi, pi), t = 0 at the bottom apex, counterclockwise (interior on
// the left).  x(t) = a sin t; y(t) = ell(t) + mu(t) * (graph(x(t)) - ell(t)).
class ClosedCurve {
  public:
    enum class Fit { Tangent, Dome };

    ClosedCurve() = default;

    // graph(x) = g0 + g2 x^2 on |x| <= 2R
    ClosedCurve(double g0, double g2, double two_R, double a_scale, double t2,
                Fit fit = Fit::Tangent, double b_scale = 2.0, double floor_y = 0.0) {
        g0_ = g0;
        g2_ = g2;
        xg_ = two_R;
        a_ = a_scale * two_R;
        if (a_ <= two_R)
            throw std::invalid_argument("closure: ellipse semi-axis must exceed 2R");
        t1_ = std::asin(two_R / a_);
        t2_ = t2;
        if (!(t2_ > t1_ && t2_ < 0.5 * kPi))
            throw std::invalid_argument("closure: need t1 < t2 < pi/2");
        const double c1 = std::cos(t1_);
        if (fit == Fit::Tangent) {
            // ellipse tangent to the graph at the blend start; it lies above
            // the graph and curves more, keeping the blended body convex
            const double x1 = a_ * std::sin(t1_);
            b_ = std::max(2.0 * g2_ * a_ * a_ * c1, 1.5 * a_);
            yc_ = graph(x1) + b_ * c1;
        } else {
            // wide dome whose lower rim passes depth floor_y at the seam angle
            b_ = b_scale * a_;
            yc_ = floor_y + b_ * c1;
        }
        build_arclength_table();
    }

    double graph(double x) const { return g0_ + g2_ * x * x; }
    double graph_d1(double x) const { return 2.0 * g2_ * x; }

    double a() const { return a_; }
    double b() const { return b_; }
    double yc() const { return yc_; }
    double t_graph_end() const { return t1_; }
    double t_blend_end() const { return t2_; }
    double top() const { return yc_ + b_; }

    // parameter of the graph point with abscissa x, |x| <= 2R
    double t_of_x(double x) const { return std::asin(std::clamp(x / a_, -1.0, 1.0)); }

    static double wrap(double t) {
        while (t >= kPi) t -= 2.0 * kPi;
        while (t < -kPi) t += 2.0 * kPi;
        return t;
    }

    Point2 point(double t) const {
        auto [xj, yj] = jet(t);
        return {xj.v, yj.v};
    }

    // x(t), y(t) as jets in t (the x-slot of Jet2 drives t).
    std::pair<Jet2, Jet2> jet(double t) const {
        const double tw = wrap(t);
        const Jet2 tj = Jet2::var_x(tw);
        const Jet2 x = a_ * jsin(tj);
        const Jet2 ell = yc_ - b_ * jcos(tj);
        const double at = std::fabs(tw);
        Jet2 y;
        if (at >= t2_) {
            y = ell;
        } else {
            const Jet2 g = g0_ + g2_ * x * x;
            if (at <= t1_) {
                y = g;
            } else {
                const Jet2 u = (((tw < 0.0) ? -tj : tj) - t1_) / (t2_ - t1_);
                Jet2 s(smoothstep7(u.v));
                // chain rule through the scalar smoothstep
                const double d1 = smoothstep7_d1(u.v);
                const double uu = u.v;
                const double d2 = uu * uu * (420.0 + uu * (-1680.0 + uu * (2100.0 - 840.0 * uu)));
                s.dx = d1 * u.dx;
                s.dxx = d2 * u.dx * u.dx + d1 * u.dxx;
                y = g + s * (ell - g);
            }
        }
        return {x, y};
    }

    Vec2 tangent(double t) const {
        auto [xj, yj] = jet(t);
        const double n = std::hypot(xj.dx, yj.dx);
        return {xj.dx / n, yj.dx / n};
    }

    // unit normal pointing to the right of the tangent; for this orientation
    // that is the outward normal of the enclosed region
    Vec2 outward_normal(double t) const {
        const Vec2 tg = tangent(t);
        return {tg.y, -tg.x};
    }

    // signed curvature (positive = convex for counterclockwise orientation)
    double curvature(double t) const {
        auto [xj, yj] = jet(t);
        const double num = xj.dx * yj.dxx - yj.dx * xj.dxx;
        const double sp = std::hypot(xj.dx, yj.dx);
        return num / (sp * sp * sp);
    }

    double length() const { return arclen_.back(); }

    // arclength measured from t = -pi
    double arclength(double t) const {
        const double tw = wrap(t);
        const double u = (tw + kPi) / (2.0 * kPi) * kNseg;
        const int i = std::min(static_cast<int>(u), kNseg - 1);
        const double t0 = -kPi + i * (2.0 * kPi / kNseg);
        // 4-point Gauss on the partial segment
        static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                     0.3399810435848563, 0.8611363115940526};
        static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                     0.6521451548625461, 0.3478548451374538};
        double acc = arclen_[i];
        const double hseg = tw - t0;
        for (int q = 0; q < 4; ++q) {
            const double tq = t0 + 0.5 * hseg * (1.0 + gx[q]);
            auto [xj, yj] = jet(tq);
            acc += 0.5 * hseg * gw[q] * std::hypot(xj.dx, yj.dx);
        }
        return acc;
    }

    // parameter at a given arclength from t = -pi (Newton on the table)
    double t_of_arclength(double s) const {
        const double L = length();
        s = std::fmod(s, L);
        if (s < 0.0) s += L;
        auto it = std::upper_bound(arclen_.begin(), arclen_.end(), s);
        int i = std::max(0, static_cast<int>(it - arclen_.begin()) - 1);
        double t = -kPi + (i + (s - arclen_[i]) / std::max(arclen_[i + 1] - arclen_[i], 1e-300)) *
                              (2.0 * kPi / kNseg);
        for (int iter = 0; iter < 30; ++iter) {
            auto [xj, yj] = jet(t);
            const double sp = std::hypot(xj.dx, yj.dx);
            const double f = arclength(t) - s;
            if (std::fabs(f) < 1e-13 * L) break;
            t -= f / sp;
        }
        return wrap(t);
    }

    // winding-number point-in-region test against a cached fine polyline
    bool contains(const Point2& p) const {
        int w = 0;
        const auto& pl = polyline_;
        for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
            const Point2& A = pl[i];
            const Point2& B = pl[i + 1];
            if (A.y <= p.y) {
                if (B.y > p.y && (B - A).cross(p - A) > 0.0) ++w;
            } else {
                if (B.y <= p.y && (B - A).cross(p - A) < 0.0) --w;
            }
        }
        return w != 0;
    }

    double distance_to_polyline(const Point2& p) const {
        double d2 = std::numeric_limits<double>::infinity();
        const auto& pl = polyline_;
        for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
            const Vec2 e = pl[i + 1] - pl[i];
            const double len2 = e.norm2();
            double tt = len2 > 0.0 ? std::clamp((p - pl[i]).dot(e) / len2, 0.0, 1.0) : 0.0;
            const Vec2 q = pl[i] + tt * e;
            d2 = std::min(d2, (p - q).norm2());
        }
        return std::sqrt(d2);
    }

  private:
    static constexpr int kNseg = 2048;

    void build_arclength_table() {
        static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                     0.3399810435848563, 0.8611363115940526};
        static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                     0.6521451548625461, 0.3478548451374538};
        arclen_.assign(kNseg + 1, 0.0);
        polyline_.clear();
        polyline_.reserve(kNseg + 1);
        const double ht = 2.0 * kPi / kNseg;
        polyline_.push_back(point(-kPi));
        for (int i = 0; i < kNseg; ++i) {
            const double t0 = -kPi + i * ht;
            double seg = 0.0;
            for (int q = 0; q < 4; ++q) {
                const double tq = t0 + 0.5 * ht * (1.0 + gx[q]);
                auto [xj, yj] = jet(tq);
                seg += 0.5 * ht * gw[q] * std::hypot(xj.dx, yj.dx);
            }
            arclen_[i + 1] = arclen_[i] + seg;
            polyline_.push_back(point(t0 + ht));
        }
    }

    double g0_ = 0.0, g2_ = 0.0, xg_ = 0.0;
    double a_ = 0.0, b_ = 0.0, yc_ = 0.0;
    double t1_ = 0.0, t2_ = 0.0;
    std::vector<double> arclen_;
    std::vector<Point2> polyline_;
};

class NeckGeometry {
  public:
    NeckGeometry(double eps, double kappa, double kappa1, double R, double mu,
                 ClosureSpec closure = {})
        : eps_(eps), kappa_(kappa), kappa1_(kappa1), R_(R), mu_(mu), closure_(closure) {
        if (!(eps > 0.0)) throw std::invalid_argument("geometry: eps must be positive");
        if (!(kappa1 > kappa)) throw std::invalid_argument("geometry: need kappa1 > kappa");
        if (kappa < 0.0) throw std::invalid_argument("geometry: kappa must be >= 0");
        if (!(R > 0.0 && R < 1.0)) throw std::invalid_argument("geometry: need 0 < R < 1");
        if (!(mu > 0.0)) throw std::invalid_argument("geometry: mu must be positive");
        if (kappa * eps >= 0.5)
            throw std::invalid_argument("geometry: eps too large for this wall curvature");

        particle_ =
            ClosedCurve(eps, kappa1, 2.0 * R, closure.particle_a_scale, closure.particle_t2);
        // enlarge the outer dome until it clears the particle
        std::string fail;
        for (int attempt = 0; attempt < 4; ++attempt) {
            const double scale = closure.outer_a_scale * std::pow(1.5, attempt);
            outer_ = ClosedCurve(0.0, kappa, 2.0 * R, scale, closure.outer_t2,
                                 ClosedCurve::Fit::Dome, closure.outer_b_scale,
                                 -closure.outer_floor);
            fail = validate_closure();
            if (fail.empty()) break;
        }
        if (!fail.empty()) throw std::invalid_argument(fail);
    }

    static NeckGeometry with_defaults(double eps) {
        return NeckGeometry(eps, 1.0, 2.0, 0.5, 1.0);
    }

    double eps() const { return eps_; }
    double kappa() const { return kappa_; }
    double kappa1() const { return kappa1_; }
    double R() const { return R_; }
    double mu() const { return mu_; }
    double kappa0() const { return kappa1_ - kappa_; }
    bool flat_wall() const { return kappa_ == 0.0; }
    const ClosureSpec& closure() const { return closure_; }

    double h(double x1) const { return kappa_ * x1 * x1; }
    double h1(double x1) const { return kappa1_ * x1 * x1; }

    // gap width; only the quadratic profile inside the neck is guaranteed
    double delta(double x1) const {
        if (std::fabs(x1) > 2.0 * R_ * (1.0 + 1e-12))
            throw std::domain_error("delta: |x1| > 2R is outside the neck");
        return eps_ + (kappa1_ - kappa_) * x1 * x1;
    }

    const ClosedCurve& outer_curve() const { return outer_; }
    const ClosedCurve& particle_curve() const { return particle_; }
    const ClosedCurve& curve(CurveId id) const {
        return id == CurveId::Outer ? outer_ : particle_;
    }

    RegionTag classify(const Point2& p) const {
        const double band = 32.0 * std::numeric_limits<double>::epsilon() *
                            (std::fabs(p.y) + std::fabs(p.x) + eps_);
        if (std::fabs(p.x) <= 2.0 * R_) {
            const double yw = h(p.x);
            const double yp = eps_ + h1(p.x);
            if (std::fabs(p.y - yw) <= band) return RegionTag::OnOuterBoundary;
            if (p.y < yw) return RegionTag::Outside;
            if (std::fabs(p.y - yp) <= band) return RegionTag::OnParticleBoundary;
            if (p.y < yp) return RegionTag::Fluid;
            // above the particle's lower boundary: inside the particle until
            // its upper boundary, then back in the fluid until the outer cap
            if (particle_.contains(p)) return RegionTag::Particle;
            if (particle_.distance_to_polyline(p) < 1e-9) return RegionTag::OnParticleBoundary;
            if (outer_.contains(p)) return RegionTag::Fluid;
            if (outer_.distance_to_polyline(p) < 1e-9) return RegionTag::OnOuterBoundary;
            return RegionTag::Outside;
        }
        if (particle_.contains(p)) return RegionTag::Particle;
        if (particle_.distance_to_polyline(p) < 1e-9) return RegionTag::OnParticleBoundary;
        if (outer_.contains(p)) return RegionTag::Fluid;
        if (outer_.distance_to_polyline(p) < 1e-9) return RegionTag::OnOuterBoundary;
        return RegionTag::Outside;
    }

  private:
    // empty string on success, reason on failure
    std::string validate_closure() const {
        const int n = 720;
        for (int i = 0; i < n; ++i) {
            const double t = -kPi + (i + 0.5) * 2.0 * kPi / n;
            if (particle_.curvature(t) <= 0.0)
                return "closure: particle blend breaks convexity";
            const Point2 p = particle_.point(t);
            if (!outer_.contains(p)) return "closure: particle not contained in D";
        }
        if (particle_.top() >= outer_.top())
            return "closure: outer cap does not clear the particle";
        return {};
    }

    double eps_, kappa_, kappa1_, R_, mu_;
    ClosureSpec closure_;
    ClosedCurve outer_, particle_;
};

// the two closed boundary curves (outer domain boundary, particle boundary)
inline std::pair<const ClosedCurve&, const ClosedCurve&>
boundary_curves(const NeckGeometry& g) {
    return {g.outer_curve(), g.particle_curve()};
}

} // namespace neckflow

#endif // NECKFLOW_GEOMETRY_HPP
