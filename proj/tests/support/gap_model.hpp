// gap_model.hpp  (test support, not part of the library)
//
// Independent 1D reduction of the neck energies.  Each velocity field in the
// thin gap is, to leading order, a shear interpolant of its boundary data
// plus a Poiseuille bracket fixed by mass conservation and by a zero net
// pressure drop through the neck.  The gap energies
//     a_red(alpha,beta) = mu * int [ U_a U_b / delta + P_a P_b / (3 delta) ]
// then reduce to the arctangent integrals I(p,q).  This route never touches
// the closed-form pair implementations and serves as the oracle for both the
// pair energies and the finite-element interaction matrix.

#ifndef NECKFLOW_TEST_GAP_MODEL_HPP
#define NECKFLOW_TEST_GAP_MODEL_HPP

#include "neckflow/asymptotics.hpp"
#include "neckflow/geometry.hpp"

namespace neckflow::gapmodel {

// mode 1 (tangential translation): U = 1, P = (6/delta)(a1 - K s^2 / 2),
// a1 = eps K / (6 k0) from the zero pressure-drop condition
inline double a11(const NeckGeometry& g, double Rp = -1.0) {
    if (Rp <= 0.0) Rp = g.R();
    const double mu = g.mu(), k0 = g.kappa0(), K = g.kappa1() + g.kappa();
    const double eps = g.eps();
    const double a1 = eps * K / (6.0 * k0);
    const double I01 = gap_integral(g, 0, 1, Rp);
    const double I03 = gap_integral(g, 0, 3, Rp);
    const double I23 = gap_integral(g, 2, 3, Rp);
    const double I43 = gap_integral(g, 4, 3, Rp);
    return mu * (I01 + 12.0 * (a1 * a1 * I03 - a1 * K * I23 + 0.25 * K * K * I43));
}

// mode 2 (squeeze): U = 0, P = 6 s / delta
inline double a22(const NeckGeometry& g, double Rp = -1.0) {
    if (Rp <= 0.0) Rp = g.R();
    return 12.0 * g.mu() * gap_integral(g, 2, 3, Rp);
}

// mode 3 (rotation): U = eps + kappa1 s^2,
// P = (6/delta)(A0 - s^2/2 - kappa1 kappa s^4 / 2), A0 from zero net drop
inline double a33(const NeckGeometry& g, double Rp = -1.0) {
    if (Rp <= 0.0) Rp = g.R();
    const double mu = g.mu(), eps = g.eps();
    const double kap = g.kappa(), kap1 = g.kappa1();
    const double c = kap1 * kap;
    const double I01 = gap_integral(g, 0, 1, Rp);
    const double I21 = gap_integral(g, 2, 1, Rp);
    const double I41 = gap_integral(g, 4, 1, Rp);
    const double I03 = gap_integral(g, 0, 3, Rp);
    const double I23 = gap_integral(g, 2, 3, Rp);
    const double I43 = gap_integral(g, 4, 3, Rp);
    const double I63 = gap_integral(g, 6, 3, Rp);
    const double I83 = gap_integral(g, 8, 3, Rp);
    const double A0 = (0.5 * I23 + 0.5 * c * I43) / I03;
    const double shear = eps * eps * I01 + 2.0 * eps * kap1 * I21 + kap1 * kap1 * I41;
    const double pois = 12.0 * (A0 * A0 * I03 - A0 * (I23 + c * I43) + 0.25 * I43 +
                                0.5 * c * I63 + 0.25 * c * c * I83);
    return mu * (shear + pois);
}

inline double a13(const NeckGeometry& g, double Rp = -1.0) {
    if (Rp <= 0.0) Rp = g.R();
    const double mu = g.mu(), eps = g.eps();
    const double kap = g.kappa(), kap1 = g.kappa1();
    const double k0 = g.kappa0(), K = kap1 + kap;
    const double c = kap1 * kap;
    const double a1 = eps * K / (6.0 * k0);
    const double I01 = gap_integral(g, 0, 1, Rp);
    const double I21 = gap_integral(g, 2, 1, Rp);
    const double I03 = gap_integral(g, 0, 3, Rp);
    const double I23 = gap_integral(g, 2, 3, Rp);
    const double I43 = gap_integral(g, 4, 3, Rp);
    const double I63 = gap_integral(g, 6, 3, Rp);
    const double A0 = (0.5 * I23 + 0.5 * c * I43) / I03;
    const double shear = eps * I01 + kap1 * I21;
    const double pois = 12.0 * (a1 * A0 * I03 - 0.5 * (a1 + K * A0) * I23 +
                                (0.25 * K - 0.5 * a1 * c) * I43 + 0.25 * K * c * I63);
    return mu * (shear + pois);
}

} // namespace neckflow::gapmodel

#endif // NECKFLOW_TEST_GAP_MODEL_HPP
