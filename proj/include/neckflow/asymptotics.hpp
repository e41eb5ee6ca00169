// asymptotics.hpp
//
// Closed-form leading-order coefficients of the interaction matrix entries,
// its determinant and cofactors, the boundary-data functionals, and the free
// constants, together with the 1D gap integrals behind them.
//
// Coefficients are (rational in kappa, kappa1, mu) multiples of powers of pi
// and are reported with the rational factor and pi power separated.

#ifndef NECKFLOW_ASYMPTOTICS_HPP
#define NECKFLOW_ASYMPTOTICS_HPP

#include <array>
#include <cmath>
#include <stdexcept>

#include "neckflow/aux_fields.hpp"
#include "neckflow/geometry.hpp"

namespace neckflow {

enum class EnvelopeLaw { None, Log, Const, InvSqrt };

struct LeadingTerm {
    double coefficient = 0.0;    // rational_factor * pi^pi_power
    double rational_factor = 0.0;
    int pi_power = 0;
    Frac power{0, 1};            // exponent of eps
    bool bound_only = false;     // no coefficient claim, envelope shape only
    EnvelopeLaw envelope = EnvelopeLaw::None;
    bool degenerate = false;     // kappa1 -> kappa pole

    // evaluate coefficient * eps^power (coefficient terms only)
    double value_at(double eps) const {
        return coefficient * std::pow(eps, power.value());
    }

    static LeadingTerm coeff(double rational, int pi_pow, Frac p, bool degen) {
        LeadingTerm t;
        t.rational_factor = rational;
        t.pi_power = pi_pow;
        t.coefficient = rational * std::pow(kPi, pi_pow);
        t.power = p;
        t.degenerate = degen;
        return t;
    }
    static LeadingTerm bound(EnvelopeLaw law) {
        LeadingTerm t;
        t.bound_only = true;
        t.envelope = law;
        return t;
    }
};

namespace detail {
inline bool near_degenerate(const NeckGeometry& g) {
    return g.kappa0() < 1e-6 * (g.kappa1() + g.kappa() + 1.0);
}
} // namespace detail

// I(p, q) = integral of x^p / delta(x)^q over [-R', R'], delta = eps + k0 x^2.
// Exact via the arctangent reduction; all recurrences have positive terms so
// no cancellation is possible.
inline double gap_integral(const NeckGeometry& g, int p, int q, double Rp) {
    if (p < 0 || q < 1) throw std::invalid_argument("gap_integral: need p >= 0, q >= 1");
    if (!(Rp > 0.0 && Rp <= g.R() * (1.0 + 1e-12)))
        throw std::invalid_argument("gap_integral: need 0 < R' <= R");
    if (p % 2 == 1) return 0.0;
    const double eps = g.eps(), k0 = g.kappa0();

    // I(0, q) ladder
    auto I0 = [&](int qq) {
        double I = 2.0 * std::atan(Rp * std::sqrt(k0 / eps)) / std::sqrt(k0 * eps);
        double dRq = eps + k0 * Rp * Rp; // delta(R')^j running power
        for (int j = 1; j < qq; ++j) {
            I = (2.0 * Rp / dRq + (2.0 * j - 1.0) * I) / (2.0 * j * eps);
            dRq *= (eps + k0 * Rp * Rp);
        }
        return I;
    };
    // plain moments I(p, 0)
    auto M = [&](int pp) { return 2.0 * std::pow(Rp, pp + 1) / (pp + 1); };

    // peel x^2 factors: I(p,q) = (I(p-2,q-1) - eps I(p-2,q)) / k0
    std::function<double(int, int)> I = [&](int pp, int qq) -> double {
        if (qq == 0) return M(pp);
        if (pp == 0) return I0(qq);
        return (I(pp - 2, qq - 1) - eps * I(pp - 2, qq)) / k0;
    };
    return I(p, q);
}

// independent route: tan-substituted Gauss-Legendre quadrature
inline double gap_integral_quadrature(const NeckGeometry& g, int p, int q, double Rp,
                                      int npts = 200) {
    if (p % 2 == 1) return 0.0;
    const double eps = g.eps(), k0 = g.kappa0();
    const double w = std::sqrt(eps / k0);
    const double tau_max = std::atan(Rp / w);
    // x = w tan(tau), delta = eps sec^2(tau)
    double acc = 0.0;
    for (int i = 0; i < npts; ++i) {
        // Gauss-Legendre via Chebyshev-like midpoint refinement: use
        // composite 4-point Gauss on npts/4 panels
        const int panels = npts / 4;
        const int panel = i / 4, node = i % 4;
        static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                     0.3399810435848563, 0.8611363115940526};
        static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                     0.6521451548625461, 0.3478548451374538};
        const double h = 2.0 * tau_max / panels;
        const double t0 = -tau_max + panel * h;
        const double tau = t0 + 0.5 * h * (1.0 + gx[node]);
        const double x = w * std::tan(tau);
        const double sec2 = 1.0 + std::tan(tau) * std::tan(tau);
        const double d = eps * sec2;
        acc += 0.5 * h * gw[node] * std::pow(x, p) / std::pow(d, q) * (w * sec2);
    }
    return acc;
}

// Leading term of the interaction-matrix entry a_{alpha beta}.
inline LeadingTerm a_leading(const NeckGeometry& g, int alpha, int beta) {
    if (alpha < 1 || alpha > 3 || beta < 1 || beta > 3)
        throw std::invalid_argument("a_leading: indices in 1..3");
    const double mu = g.mu(), kap = g.kappa(), kap1 = g.kappa1();
    const double k0 = g.kappa0(), K = kap1 + kap;
    const bool degen = detail::near_degenerate(g);
    if (alpha > beta) std::swap(alpha, beta);

    if (alpha == 1 && beta == 1) {
        const double r = mu / std::sqrt(k0) *
                         (1.0 + K * K / (k0 * k0) + kap * K * K / (3.0 * k0 * k0 * k0));
        return LeadingTerm::coeff(r, 1, {-1, 2}, degen);
    }
    if (alpha == 2 && beta == 2) {
        const double r = 1.5 * mu / std::pow(k0, 1.5);
        return LeadingTerm::coeff(r, 1, {-3, 2}, degen);
    }
    if (alpha == 3 && beta == 3) {
        const double r = mu / (3.0 * std::pow(k0, 2.5)) * (3.0 + kap / k0);
        return LeadingTerm::coeff(r, 1, {-1, 2}, degen);
    }
    if (alpha == 1 && beta == 3) {
        const double r = mu * K / (3.0 * std::pow(k0, 2.5)) * (3.0 + kap / k0);
        return LeadingTerm::coeff(r, 1, {-1, 2}, degen);
    }
    // (1,2) and (2,3) carry only a logarithmic envelope
    return LeadingTerm::bound(EnvelopeLaw::Log);
}

inline LeadingTerm detA_leading(const NeckGeometry& g) {
    const double mu = g.mu(), kap = g.kappa(), kap1 = g.kappa1();
    const double k0 = g.kappa0();
    const double r = std::pow(mu, 3) / (2.0 * std::pow(k0, 4.5)) *
                     (1.0 + (2.0 * kap1 - kap) / k0);
    return LeadingTerm::coeff(r, 3, {-5, 2}, detail::near_degenerate(g));
}

// cofactors of the first column that drive the Cramer quotients
inline LeadingTerm cof_leading(const NeckGeometry& g, int row) {
    const double mu = g.mu(), kap = g.kappa();
    const double k0 = g.kappa0(), K = g.kappa1() + kap;
    const bool degen = detail::near_degenerate(g);
    if (row == 1) {
        const double r = mu * mu / (2.0 * std::pow(k0, 4)) * (3.0 + kap / k0);
        return LeadingTerm::coeff(r, 2, {-2, 1}, degen);
    }
    if (row == 3) {
        const double r = -K * mu * mu / (2.0 * std::pow(k0, 4)) * (3.0 + kap / k0);
        return LeadingTerm::coeff(r, 2, {-2, 1}, degen);
    }
    if (row == 2) {
        LeadingTerm t = LeadingTerm::bound(EnvelopeLaw::InvSqrt);
        return t;
    }
    throw std::invalid_argument("cof_leading: row in {1,2,3}");
}

// leading coefficient of the combination Q1 - (kappa1+kappa) Q3 for the
// tangential constant-data class; this is the robust blow-up normalizer
inline LeadingTerm blowup_combination_leading(const NeckGeometry& g) {
    const double r = g.mu() / std::sqrt(g.kappa0());
    return LeadingTerm::coeff(r, 1, {-1, 2}, detail::near_degenerate(g));
}

inline std::array<LeadingTerm, 3> q_leading(const NeckGeometry& g, const BcSpec& bc) {
    switch (bc.cls) {
        case BcClass::Phi1:
            return {a_leading(g, 1, 1), LeadingTerm::bound(EnvelopeLaw::Log),
                    a_leading(g, 1, 3)};
        case BcClass::Phi2:
            return {LeadingTerm::bound(EnvelopeLaw::Log), a_leading(g, 2, 2),
                    LeadingTerm::bound(EnvelopeLaw::Log)};
        case BcClass::Phi3: {
            const EnvelopeLaw q2 = bc.l == 1 ? EnvelopeLaw::Log : EnvelopeLaw::Const;
            return {LeadingTerm::bound(EnvelopeLaw::Const), LeadingTerm::bound(q2),
                    LeadingTerm::bound(EnvelopeLaw::Const)};
        }
        case BcClass::Phi4: {
            if (bc.l == 1)
                return {LeadingTerm::bound(EnvelopeLaw::InvSqrt),
                        LeadingTerm::bound(EnvelopeLaw::InvSqrt),
                        LeadingTerm::bound(EnvelopeLaw::InvSqrt)};
            const EnvelopeLaw q2 = bc.l == 2 ? EnvelopeLaw::Log : EnvelopeLaw::Const;
            return {LeadingTerm::bound(EnvelopeLaw::Const), LeadingTerm::bound(q2),
                    LeadingTerm::bound(EnvelopeLaw::Const)};
        }
        case BcClass::Custom: break;
    }
    throw std::invalid_argument("q_leading: unsupported boundary data class");
}

// center value and deviation envelope of each free constant
struct ConstantLeading {
    double center = 0.0;
    Frac dev_power{1, 2};
};

inline std::array<ConstantLeading, 3> c_leading(const NeckGeometry&, const BcSpec& bc) {
    if (bc.cls == BcClass::Phi1)
        return {ConstantLeading{1.0, {1, 2}}, ConstantLeading{0.0, {3, 2}},
                ConstantLeading{0.0, {1, 2}}};
    if (bc.cls == BcClass::Phi2)
        return {ConstantLeading{0.0, {1, 2}}, ConstantLeading{1.0, {1, 1}},
                ConstantLeading{0.0, {1, 2}}};
    throw std::invalid_argument(
        "c_leading: closed-form constants exist only for the constant-data classes");
}

} // namespace neckflow

#endif // NECKFLOW_ASYMPTOTICS_HPP
