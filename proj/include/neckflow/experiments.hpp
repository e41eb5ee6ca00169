// experiments.hpp
//
// eps sweeps over the full decomposition pipeline, log-log rate fitting,
// midpoint and pressure probes, and extrapolation of the touching-limit
// functionals with the eps^{1/8} model.

#ifndef NECKFLOW_EXPERIMENTS_HPP
#define NECKFLOW_EXPERIMENTS_HPP

#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "neckflow/functionals.hpp"
#include "neckflow/mesh.hpp"

namespace neckflow {

struct GeometryParams {
    double kappa = 1.0;
    double kappa1 = 2.0;
    double R = 0.5;
    double mu = 1.0;
    ClosureSpec closure{};

    NeckGeometry make(double eps) const {
        return NeckGeometry(eps, kappa, kappa1, R, mu, closure);
    }
};

struct SweepConfig {
    GeometryParams geometry{};
    MeshParams mesh{};
    BcSpec bc{BcClass::Phi1, 0};
    std::vector<double> eps_list{0.0316227766016838, 1e-2, 3.16227766016838e-3, 1e-3};
    int probe_nx = 200; // neck sampling grid for sup and oscillation probes
    int probe_nk = 20;
};

struct SweepRecord {
    double eps = 0.0;
    Eigen::Matrix3d A;
    Eigen::Vector3d Q, C;
    Eigen::Vector3d shifted1, shifted2;
    double cond = 0.0;
    double grad_mid = 0.0;        // |grad u|_F at (0, eps/2), reconstruction
    double grad_mid_direct = 0.0; // same from the direct rigid solve
    double p_osc = 0.0;           // half peak-to-peak of p over Omega_R
    double sup_delta_grad = 0.0;  // sup over neck samples of delta |grad u|
    double blowup_h = 0.0;        // class blow-up combination at this eps
    double recon_vs_direct_l2 = 0.0;
    double c_diff = 0.0;
    // stamps
    double q_surface[3] = {0, 0, 0}; // boundary-stress route for Q
    double compat_defect = 0.0;
    double div_residual = 0.0;
    double min_scaled_angle = 0.0;
    int n_triangles = 0;
};

struct SweepReport {
    SweepConfig config;
    std::vector<SweepRecord> records;
};

inline double midpoint_probe(const StokesSolver& solver, const StokesSolution& s,
                             const NeckGeometry& g) {
    return solver.eval_gradient(s, {0.0, g.eps() / 2}).frobenius();
}

inline double pressure_oscillation(const StokesSolver& solver, const StokesSolution& s,
                                   const NeckGeometry& g, int nx = 200, int nk = 20) {
    NeckSampler samp(g, nx, nk, g.R());
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < samp.count(); ++i) {
        const double p = solver.eval_pressure(s, samp.point(i));
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    return 0.5 * (hi - lo);
}

inline double sup_delta_gradient(const StokesSolver& solver, const StokesSolution& s,
                                 const NeckGeometry& g, int nx = 200, int nk = 20) {
    NeckSampler samp(g, nx, nk, g.R());
    double sup = 0.0;
    for (int i = 0; i < samp.count(); ++i) {
        const Point2 p = samp.point(i);
        sup = std::max(sup, g.delta(p.x) * solver.eval_gradient(s, p).frobenius());
    }
    return sup;
}

inline SweepReport run_sweep(const SweepConfig& cfg) {
    if (cfg.eps_list.size() < 1)
        throw std::invalid_argument("sweep: empty eps list");
    for (std::size_t i = 0; i + 1 < cfg.eps_list.size(); ++i)
        if (!(cfg.eps_list[i] > cfg.eps_list[i + 1]))
            throw std::invalid_argument("sweep: eps values must be strictly decreasing");
    for (double e : cfg.eps_list)
        if (!(e >= 1e-6 && e <= 1e-1))
            throw std::invalid_argument("sweep: eps outside [1e-6, 1e-1]");

    SweepReport rep;
    rep.config = cfg;
    for (double eps : cfg.eps_list) {
        NeckGeometry g = cfg.geometry.make(eps);
        TriMesh mesh = build_neck_mesh(g, cfg.mesh);
        StokesSolver solver(&g, mesh);
        BoundaryData bd = BoundaryData::from_class(g, cfg.bc);

        StokesSolution u1 = solver.solve_dirichlet(rigid_mode_trace(RigidMode::Translate1));
        StokesSolution u2 = solver.solve_dirichlet(rigid_mode_trace(RigidMode::Translate2));
        StokesSolution u3 = solver.solve_dirichlet(rigid_mode_trace(RigidMode::Rotate));
        StokesSolution u0 = solver.solve_dirichlet(bd.trace());

        InteractionSystem sys = assemble_interaction(solver, u1, u2, u3, u0, eps, cfg.bc);
        StokesSolution full = reconstruct(u1, u2, u3, u0, sys.C);
        StokesSolution direct = solver.solve_rigid(bd.trace());

        SweepRecord r;
        r.eps = eps;
        r.A = sys.A;
        r.Q = sys.Q;
        r.C = sys.C;
        r.shifted1 = sys.shifted_q(1);
        r.shifted2 = sys.shifted_q(2);
        r.cond = sys.cond;
        r.grad_mid = midpoint_probe(solver, full, g);
        r.grad_mid_direct = midpoint_probe(solver, direct, g);
        r.p_osc = pressure_oscillation(solver, full, g, cfg.probe_nx, cfg.probe_nk);
        r.sup_delta_grad = sup_delta_gradient(solver, full, g, cfg.probe_nx, cfg.probe_nk);
        switch (cfg.bc.cls) {
            case BcClass::Phi1: r.blowup_h = blowup_factor(sys, g, BlowupMode::H1); break;
            case BcClass::Phi2: r.blowup_h = blowup_factor(sys, g, BlowupMode::H2); break;
            default: {
                const bool h3_ok = (cfg.bc.cls == BcClass::Phi3 && cfg.bc.l >= 2) ||
                                   (cfg.bc.cls == BcClass::Phi4 && cfg.bc.l >= 3);
                r.blowup_h = h3_ok ? blowup_factor(sys, g, BlowupMode::H3) : 0.0;
                break;
            }
        }
        const double du = solver.velocity_l2(full.vel - direct.vel);
        const double nu = solver.velocity_l2(direct.vel);
        r.recon_vs_direct_l2 = du / std::max(nu, 1e-300);
        for (int a = 0; a < 3; ++a)
            r.c_diff = std::max(r.c_diff, std::fabs(sys.C(a) - direct.rigid_c[a]));
        for (int b = 0; b < 3; ++b)
            r.q_surface[b] =
                solver.particle_stress_functional(u0, static_cast<RigidMode>(b + 1));
        r.compat_defect = u0.compat_defect;
        r.div_residual = std::max({u0.div_residual, u1.div_residual, u2.div_residual,
                                   u3.div_residual});
        const QualityReport q = quality_report(g, mesh);
        r.min_scaled_angle = q.min_scaled_angle_deg;
        r.n_triangles = q.n_triangles;
        rep.records.push_back(r);
    }
    return rep;
}

// ---- rate fitting -----------------------------------------------------------

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0; // of log(value) against log(eps)
    double ci = 0.0;        // ~95% half-width on the slope
};

inline RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 3)
        throw std::invalid_argument("fit_rate: need at least 3 points");
    const int n = static_cast<int>(pairs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [e, v] : pairs) {
        if (!(v > 0.0))
            throw std::invalid_argument("fit_rate: values must be positive");
        const double x = std::log(e), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double xbar = sx / n, ybar = sy / n;
    const double sxx_c = sxx - n * xbar * xbar;
    RateFit f;
    f.slope = (sxy - n * xbar * ybar) / sxx_c;
    f.intercept = ybar - f.slope * xbar;
    double ss = 0.0;
    for (const auto& [e, v] : pairs) {
        const double r = std::log(v) - (f.intercept + f.slope * std::log(e));
        ss += r * r;
    }
    if (n > 2) f.ci = 1.96 * std::sqrt(ss / (n - 2) / sxx_c);
    return f;
}

// ---- touching-limit extrapolation ------------------------------------------

// Is the requested functional family bounded as eps -> 0?  Shift j = 0 means
// the plain Q_beta; j = 1 or 2 the shifted families.
inline bool qstar_family_bounded(const BcSpec& bc, int beta, int shift_j) {
    if (shift_j == 1) return bc.cls == BcClass::Phi1;
    if (shift_j == 2) return bc.cls == BcClass::Phi2;
    if (bc.cls == BcClass::Phi3) return beta == 2 ? bc.l >= 2 : true;
    if (bc.cls == BcClass::Phi4) return beta == 2 ? bc.l >= 3 : bc.l >= 2;
    return false;
}

struct QstarFit {
    double limit = 0.0;
    double uncertainty = 0.0; // standard error of the limit
    double slope_coef = 0.0;  // coefficient of eps^theta
    double theta = 0.125;
};

// fit value(eps) = c0 + c1 eps^theta; theta defaults to the proven 1/8
inline QstarFit extrapolate_qstar(const std::vector<std::pair<double, double>>& pairs,
                                  double theta = 0.125, bool free_theta = false) {
    if (pairs.size() < 3)
        throw std::invalid_argument("extrapolate_qstar: need at least 3 records");
    const int n = static_cast<int>(pairs.size());

    auto fit_for = [&](double th, QstarFit& out) {
        double s1 = n, sx = 0, sxx = 0, sy = 0, sxy = 0;
        for (const auto& [e, v] : pairs) {
            const double x = std::pow(e, th);
            sx += x;
            sxx += x * x;
            sy += v;
            sxy += x * v;
        }
        const double det = s1 * sxx - sx * sx;
        out.limit = (sxx * sy - sx * sxy) / det;
        out.slope_coef = (s1 * sxy - sx * sy) / det;
        out.theta = th;
        double ss = 0.0;
        for (const auto& [e, v] : pairs) {
            const double r = v - (out.limit + out.slope_coef * std::pow(e, th));
            ss += r * r;
        }
        if (n > 2) out.uncertainty = std::sqrt(std::max(ss, 0.0) / (n - 2) * sxx / det);
        return ss;
    };

    QstarFit best;
    if (!free_theta) {
        fit_for(theta, best);
        return best;
    }
    // golden-section search on theta
    double lo = 0.02, hi = 0.9;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    QstarFit fa, fb;
    double va = fit_for(a, fa), vb = fit_for(b, fb);
    for (int it = 0; it < 60; ++it) {
        if (va < vb) {
            hi = b;
            b = a;
            vb = va;
            a = hi - gr * (hi - lo);
            va = fit_for(a, fa);
        } else {
            lo = a;
            a = b;
            va = vb;
            b = lo + gr * (hi - lo);
            vb = fit_for(b, fb);
        }
    }
    fit_for(0.5 * (lo + hi), best);
    return best;
}

} // namespace neckflow

#endif // NECKFLOW_EXPERIMENTS_HPP
