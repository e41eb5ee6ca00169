#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "neckflow/aux_fields.hpp"

using namespace neckflow;

static std::vector<AuxPair> all_pairs(const NeckGeometry& g) {
    std::vector<AuxPair> v;
    v.push_back(AuxPair::rigid(g, RigidMode::Translate1));
    v.push_back(AuxPair::rigid(g, RigidMode::Translate2));
    v.push_back(AuxPair::rigid(g, RigidMode::Rotate));
    v.push_back(AuxPair::boundary(g, {BcClass::Phi1, 0}));
    v.push_back(AuxPair::boundary(g, {BcClass::Phi2, 0}));
    for (int l : {1, 2, 3}) v.push_back(AuxPair::boundary(g, {BcClass::Phi3, l}));
    for (int l : {1, 2, 3}) v.push_back(AuxPair::boundary(g, {BcClass::Phi4, l}));
    return v;
}

TEST_CASE("keller coordinate and its gradient") {
    NeckGeometry g(1e-2, 1.0, 2.0, 0.5, 1.0);
    const double eps = g.eps();
    CHECK(keller(g, {0.0, eps / 2}) == doctest::Approx(0.0).epsilon(1e-14));
    for (double x : {-0.7, -0.2, 0.35, 0.9}) {
        CHECK(keller(g, {x, eps + g.h1(x)}) == doctest::Approx(0.5).epsilon(1e-13));
        CHECK(keller(g, {x, g.h(x)}) == doctest::Approx(-0.5).epsilon(1e-13));
    }
    CHECK_THROWS_AS((void)keller(g, {1.5, 0.0}), std::domain_error);

    // gradient matches the closed form and central differences
    const Point2 p{0.23, g.h(0.23) + 0.4 * g.delta(0.23)};
    const Vec2 kg = keller_grad(g, p);
    const double d = g.delta(p.x);
    const double k = keller(g, p);
    CHECK(kg.x == doctest::Approx(-(g.kappa1() + g.kappa()) * p.x / d -
                                  2.0 * g.kappa0() * p.x * k / d)
                      .epsilon(1e-13));
    CHECK(kg.y == doctest::Approx(1.0 / d).epsilon(1e-13));
    const double h = 1e-4 * d;
    CHECK(kg.x ==
          doctest::Approx((keller(g, {p.x + h, p.y}) - keller(g, {p.x - h, p.y})) / (2 * h))
              .epsilon(1e-7));
    CHECK(kg.y ==
          doctest::Approx((keller(g, {p.x, p.y + h}) - keller(g, {p.x, p.y - h})) / (2 * h))
              .epsilon(1e-7));
}

TEST_CASE("all pairs are divergence-free in the neck") {
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        NeckGeometry g(eps, 1.0, 2.0, 0.5, 1.0);
        NeckSampler s(g, 60, 12, 2.0 * g.R());
        for (const auto& pair : all_pairs(g)) {
            double worst = 0.0;
            for (int i = 0; i < s.count(); ++i) {
                const AuxEval e = pair.eval(s.point(i));
                const double scale = std::max(e.gradient().frobenius(), 1e-300);
                worst = std::max(worst, std::fabs(e.divergence()) / scale);
            }
            CAPTURE(eps);
            CHECK(worst < 1e-10);
        }
    }
}

TEST_CASE("boundary traces are exact") {
    NeckGeometry g(1e-3, 1.0, 2.0, 0.5, 1.0);
    const auto pairs = all_pairs(g);
    for (double x : {-0.95, -0.4, 0.01, 0.33, 0.8}) {
        const Point2 top{x, g.eps() + g.h1(x)};
        const Point2 bot{x, g.h(x)};
        for (const auto& pair : pairs) {
            const Vec2 vt = pair.velocity(top);
            const Vec2 vb = pair.velocity(bot);
            const Vec2 et = pair.trace_particle(x);
            const Vec2 eb = pair.trace_wall(x);
            CHECK(std::fabs(vt.x - et.x) < 1e-12);
            CHECK(std::fabs(vt.y - et.y) < 1e-12);
            CHECK(std::fabs(vb.x - eb.x) < 1e-12);
            CHECK(std::fabs(vb.y - eb.y) < 1e-12);
        }
    }
}

TEST_CASE("mode 1 midpoint values") {
    NeckGeometry g(1e-2, 1.0, 2.0, 0.5, 1.0);
    AuxPair v1 = AuxPair::rigid(g, RigidMode::Translate1);
    const Point2 mid{0.0, g.eps() / 2};
    const AuxEval e = v1.eval(mid);
    // velocity (1/2 + (kappa1+kappa)/(kappa1-kappa) * (-1/4), 0) = (-1/4, 0)
    CHECK(e.velocity().x == doctest::Approx(-0.25).epsilon(1e-13));
    CHECK(e.velocity().y == doctest::Approx(0.0).epsilon(1e-13));
    // shear entry is exactly 1/eps
    CHECK(e.gradient().a12 == doctest::Approx(1.0 / g.eps()).epsilon(1e-13));
    // pressure normalisation
    CHECK(std::fabs(e.p) < 1e-12);
    // vertical residual component vanishes on the symmetry axis
    CHECK(std::fabs(e.residual(g.mu()).y) < 1e-9 / g.eps());
}

TEST_CASE("mode 1 at particle boundary is psi_1") {
    NeckGeometry g(1e-2, 1.0, 2.0, 0.5, 1.0);
    AuxPair v1 = AuxPair::rigid(g, RigidMode::Translate1);
    for (double x : {-0.8, 0.0, 0.5}) {
        const Vec2 v = v1.velocity({x, g.eps() + g.h1(x)});
        CHECK(v.x == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::fabs(v.y) < 1e-13);
    }
}

TEST_CASE("complement identities for locally constant data") {
    NeckGeometry g(1e-3, 1.0, 2.0, 0.5, 1.0);
    AuxPair v1 = AuxPair::rigid(g, RigidMode::Translate1);
    AuxPair v01 = AuxPair::boundary(g, {BcClass::Phi1, 0});
    AuxPair v2 = AuxPair::rigid(g, RigidMode::Translate2);
    AuxPair v02 = AuxPair::boundary(g, {BcClass::Phi2, 0});
    NeckSampler s(g, 24, 8, 2.0 * g.R());
    for (int i = 0; i < s.count(); ++i) {
        const Point2 p = s.point(i);
        const AuxEval a = v1.eval(p), b = v01.eval(p);
        CHECK(a.velocity().x + b.velocity().x == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::fabs(a.velocity().y + b.velocity().y) < 1e-12);
        // gradients cancel exactly
        CHECK((a.gradient() + b.gradient()).frobenius() < 1e-9);
        // pressures are opposite
        CHECK(a.p + b.p == doctest::Approx(0.0).epsilon(1e-12));

        const AuxEval c = v2.eval(p), d = v02.eval(p);
        CHECK(std::fabs(c.velocity().x + d.velocity().x) < 1e-12);
        CHECK(c.velocity().y + d.velocity().y == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((c.gradient() + d.gradient()).frobenius() < 1e-9);
    }
}

TEST_CASE("jet gradients agree with central differences") {
    NeckGeometry g(1e-3, 1.0, 2.0, 0.5, 1.0);
    NeckSampler s(g, 9, 5, 0.9 * 2.0 * g.R());
    for (const auto& pair : all_pairs(g)) {
        for (int i = 0; i < s.count(); ++i) {
            const Point2 p = s.point(i);
            const double h = 1e-4 * g.delta(p.x);
            const Tensor2 grad = pair.gradient(p);
            const Vec2 vxp = pair.velocity({p.x + h, p.y});
            const Vec2 vxm = pair.velocity({p.x - h, p.y});
            const Vec2 vyp = pair.velocity({p.x, p.y + h});
            const Vec2 vym = pair.velocity({p.x, p.y - h});
            const double scale = std::max(1.0, grad.frobenius());
            CHECK(std::fabs(grad.a11 - (vxp.x - vxm.x) / (2 * h)) < 1e-6 * scale);
            CHECK(std::fabs(grad.a12 - (vyp.x - vym.x) / (2 * h)) < 1e-6 * scale);
            CHECK(std::fabs(grad.a21 - (vxp.y - vxm.y) / (2 * h)) < 1e-6 * scale);
            CHECK(std::fabs(grad.a22 - (vyp.y - vym.y) / (2 * h)) < 1e-6 * scale);
        }
    }
}

TEST_CASE("printed first-derivative formulas match the jets") {
    NeckGeometry g(1e-3, 1.0, 2.0, 0.5, 1.0);
    AuxPair v1 = AuxPair::rigid(g, RigidMode::Translate1);
    AuxPair v2 = AuxPair::rigid(g, RigidMode::Translate2);
    AuxPair v3 = AuxPair::rigid(g, RigidMode::Rotate);
    NeckSampler s(g, 15, 7, 2.0 * g.R());
    for (int i = 0; i < s.count(); ++i) {
        const Point2 p = s.point(i);
        const double sc1 = std::max(1.0, std::fabs(printed::dx2_v1_comp1(g, p)));
        CHECK(std::fabs(v1.eval(p).v1.dy - printed::dx2_v1_comp1(g, p)) < 1e-10 * sc1);
        const double sc2 = std::max(1.0, std::fabs(printed::dx2_v2_comp1(g, p)));
        CHECK(std::fabs(v2.eval(p).v1.dy - printed::dx2_v2_comp1(g, p)) < 1e-10 * sc2);
        const double sc3 = std::max(1.0, std::fabs(printed::dx2_v3_comp1(g, p)));
        CHECK(std::fabs(v3.eval(p).v1.dy - printed::dx2_v3_comp1(g, p)) < 1e-10 * sc3);
        const double sc4 = std::max(1.0, std::fabs(printed::dx2x2_v1_comp1(g, p)));
        CHECK(std::fabs(v1.eval(p).v1.dyy - printed::dx2x2_v1_comp1(g, p)) < 1e-10 * sc4);
    }
}

TEST_CASE("mode 2 vertical momentum balance is exact") {
    NeckGeometry g(1e-3, 1.0, 2.0, 0.5, 1.0);
    AuxPair v2 = AuxPair::rigid(g, RigidMode::Translate2);
    NeckSampler s(g, 20, 8, 2.0 * g.R());
    for (int i = 0; i < s.count(); ++i) {
        const AuxEval e = v2.eval(s.point(i));
        const double scale = std::max(std::fabs(e.py), 1.0);
        CHECK(std::fabs(g.mu() * e.v2.dyy - e.py) < 1e-9 * scale);
    }
}

TEST_CASE("residual envelopes are stable across eps") {
    // sup of the normalized residual should vary by < 20% across eps
    std::vector<double> eps_list{1e-2, 1e-3, 1e-4};
    auto stability = [&](RigidMode m, EnvelopeKind env) {
        double lo = 1e300, hi = 0.0;
        for (double eps : eps_list) {
            NeckGeometry g(eps, 1.0, 2.0, 0.5, 1.0);
            AuxPair pair = AuxPair::rigid(g, m);
            const BoundReport r =
                verify_bounds(g, pair, AuxQuantity::ResidualNorm, env, 200, 20);
            lo = std::min(lo, r.sup_ratio);
            hi = std::max(hi, r.sup_ratio);
        }
        return hi / lo;
    };
    CHECK(stability(RigidMode::Translate1, EnvelopeKind::InvDelta) < 1.2);
    CHECK(stability(RigidMode::Translate2, EnvelopeKind::AbsX1OverDelta2) < 1.2);
    CHECK(stability(RigidMode::Rotate, EnvelopeKind::InvDelta) < 1.2);
}

TEST_CASE("gradient envelopes") {
    // |grad v1| <= C/delta with a stable constant, |grad v2| against the
    // combined envelope, and the l1=2 tangential-data pair stays bounded
    std::vector<double> eps_list{1e-2, 1e-3, 1e-4};
    double lo1 = 1e300, hi1 = 0.0, lo2 = 1e300, hi2 = 0.0, hi3 = 0.0;
    for (double eps : eps_list) {
        NeckGeometry g(eps, 1.0, 2.0, 0.5, 1.0);
        const BoundReport r1 = verify_bounds(g, AuxPair::rigid(g, RigidMode::Translate1),
                                             AuxQuantity::GradientNorm, EnvelopeKind::InvDelta);
        lo1 = std::min(lo1, r1.sup_ratio);
        hi1 = std::max(hi1, r1.sup_ratio);
        const BoundReport r2 =
            verify_bounds(g, AuxPair::rigid(g, RigidMode::Translate2),
                          AuxQuantity::GradientNorm, EnvelopeKind::InvDeltaPlusAbsX1OverDelta2);
        lo2 = std::min(lo2, r2.sup_ratio);
        hi2 = std::max(hi2, r2.sup_ratio);
        const BoundReport r3 = verify_bounds(g, AuxPair::boundary(g, {BcClass::Phi3, 2}),
                                             AuxQuantity::GradientNorm, EnvelopeKind::Const);
        hi3 = std::max(hi3, r3.sup_ratio);
    }
    CHECK(hi1 / lo1 < 1.25);
    CHECK(hi2 / lo2 < 1.25);
    CHECK(hi3 < 50.0); // bounded independently of eps
}

TEST_CASE("custom data has no closed-form pair") {
    NeckGeometry g(1e-2, 1.0, 2.0, 0.5, 1.0);
    CHECK_THROWS_AS(AuxPair::boundary(g, {BcClass::Custom, 0}), std::invalid_argument);
}

TEST_CASE("taper extension vanishes past the neck") {
    NeckGeometry g(1e-2, 1.0, 2.0, 0.5, 1.0);
    AuxPair v1 = AuxPair::rigid(g, RigidMode::Translate1);
    const double w = v1.valid_half_width();
    CHECK(v1.velocity({1.25 * w + 0.01, 1.0}).norm() == 0.0);
    // continuous through the taper
    const Vec2 a = v1.velocity({w * 1.1, g.h(0.99 * w)});
    CHECK(std::isfinite(a.x));
}
