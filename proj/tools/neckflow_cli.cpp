// neckflow command-line driver
//
// Subcommands:
//   check-aux       divergence / trace / residual-envelope report for the
//                   closed-form gap pairs over the configured eps list
//   asym            table of closed-form leading coefficients and envelopes
//   solve           one full solve at geometry.eps: fields, interaction
//                   system (both routes), diagnostics
//   sweep           eps sweep with rate fits and touching-limit extrapolation
//   fit             log-log rate fit of a column of a sweep CSV
//   oracle-compare  decomposition vs direct rigid solve on the eps list
//
// Exit codes: 0 ok, 1 config error, 2 compute error, 3 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "neckflow/io.hpp"

using namespace neckflow;
namespace fs = std::filesystem;

namespace {

int g_log_level = 1;

void logmsg(int level, const std::string& msg) {
    if (level <= g_log_level) std::cerr << "[neckflow] " << msg << "\n";
}

void ensure_outdir(const RunConfig& cfg) { fs::create_directories(cfg.out_dir); }

struct ModeSolves {
    StokesSolution u1, u2, u3, u0;
};

ModeSolves solve_modes(StokesSolver& solver, const BoundaryData& bd) {
    ModeSolves ms;
    ms.u1 = solver.solve_dirichlet(rigid_mode_trace(RigidMode::Translate1));
    ms.u2 = solver.solve_dirichlet(rigid_mode_trace(RigidMode::Translate2));
    ms.u3 = solver.solve_dirichlet(rigid_mode_trace(RigidMode::Rotate));
    ms.u0 = solver.solve_dirichlet(bd.trace());
    return ms;
}

// ---------------------------------------------------------------------------

int cmd_check_aux(const RunConfig& cfg) {
    ensure_outdir(cfg);
    json report;
    report["pairs"] = json::array();

    std::ostringstream rows;
    const std::string header = "pair,eps,x1,x2,abs_div,f1,f2,grad_norm";

    struct Entry {
        std::string name;
        EnvelopeKind env;
        std::function<AuxPair(const NeckGeometry&)> make;
    };
    const std::vector<Entry> entries = {
        {"v1", EnvelopeKind::InvDelta,
         [](const NeckGeometry& g) { return AuxPair::rigid(g, RigidMode::Translate1); }},
        {"v2", EnvelopeKind::AbsX1OverDelta2,
         [](const NeckGeometry& g) { return AuxPair::rigid(g, RigidMode::Translate2); }},
        {"v3", EnvelopeKind::InvDelta,
         [](const NeckGeometry& g) { return AuxPair::rigid(g, RigidMode::Rotate); }},
    };

    for (const auto& ent : entries) {
        json pj;
        pj["pair"] = ent.name;
        pj["residual_envelope"] = json::array();
        double env_lo = 1e300, env_hi = 0.0, div_worst = 0.0, trace_worst = 0.0;
        for (double eps : cfg.eps_list) {
            NeckGeometry g = cfg.geometry.make(eps);
            AuxPair pair = ent.make(g);
            const BoundReport rdiv = verify_bounds(g, pair, AuxQuantity::DivergenceRel,
                                                   EnvelopeKind::Const, cfg.probe_nx,
                                                   cfg.probe_nk);
            const BoundReport rres = verify_bounds(g, pair, AuxQuantity::ResidualNorm,
                                                   ent.env, cfg.probe_nx, cfg.probe_nk);
            div_worst = std::max(div_worst, rdiv.sup_ratio);
            env_lo = std::min(env_lo, rres.sup_ratio);
            env_hi = std::max(env_hi, rres.sup_ratio);
            for (double x : {-0.8, -0.3, 0.2, 0.7}) {
                const double xx = x * 2.0 * g.R();
                const Vec2 dt = pair.velocity({xx, g.eps() + g.h1(xx)}) -
                                pair.trace_particle(xx);
                const Vec2 db = pair.velocity({xx, g.h(xx)}) - pair.trace_wall(xx);
                trace_worst = std::max({trace_worst, dt.norm(), db.norm()});
            }
            pj["residual_envelope"].push_back(
                {{"eps", eps}, {"sup_ratio", rres.sup_ratio}});
            NeckSampler samp(g, 25, 5, g.R());
            for (int i = 0; i < samp.count(); ++i) {
                const Point2 p = samp.point(i);
                const AuxEval e = pair.eval(p);
                const Vec2 f = e.residual(g.mu());
                rows << ent.name << "," << fmt17(eps) << "," << fmt17(p.x) << ","
                     << fmt17(p.y) << "," << fmt17(std::fabs(e.divergence())) << ","
                     << fmt17(f.x) << "," << fmt17(f.y) << ","
                     << fmt17(e.gradient().frobenius()) << "\n";
            }
        }
        pj["max_rel_divergence"] = div_worst;
        pj["max_trace_defect"] = trace_worst;
        pj["envelope_trend_max_over_min"] = env_hi / env_lo;
        report["pairs"].push_back(pj);
    }

    write_stamped_csv(cfg.out_dir + "/check_aux_samples.csv", header, rows.str(), cfg);
    write_stamped_json(cfg.out_dir + "/check_aux_report.json", report, cfg);
    logmsg(1, "check-aux: wrote " + cfg.out_dir + "/check_aux_report.json");
    return 0;
}

// ---------------------------------------------------------------------------

json leading_to_json(const LeadingTerm& t) {
    json j;
    if (t.bound_only) {
        j["bound_only"] = true;
        j["envelope"] = t.envelope == EnvelopeLaw::Log     ? "log"
                        : t.envelope == EnvelopeLaw::Const ? "const"
                                                           : "inv_sqrt";
    } else {
        j["coefficient"] = t.coefficient;
        j["rational_factor"] = t.rational_factor;
        j["pi_power"] = t.pi_power;
        j["eps_power"] = t.power.str();
        j["degenerate"] = t.degenerate;
    }
    return j;
}

int cmd_asym(const RunConfig& cfg) {
    ensure_outdir(cfg);
    NeckGeometry g = cfg.geometry.make(cfg.eps);
    json out;
    for (int a = 1; a <= 3; ++a)
        for (int b = a; b <= 3; ++b)
            out["a"][std::to_string(a) + std::to_string(b)] =
                leading_to_json(a_leading(g, a, b));
    out["detA"] = leading_to_json(detA_leading(g));
    out["cof11"] = leading_to_json(cof_leading(g, 1));
    out["cof31"] = leading_to_json(cof_leading(g, 3));
    out["blowup_combination"] = leading_to_json(blowup_combination_leading(g));
    const auto q = q_leading(g, cfg.bc);
    for (int b = 0; b < 3; ++b)
        out["q"][std::to_string(b + 1)] = leading_to_json(q[b]);
    if (cfg.bc.cls == BcClass::Phi1 || cfg.bc.cls == BcClass::Phi2) {
        const auto c = c_leading(g, cfg.bc);
        for (int a = 0; a < 3; ++a)
            out["c"][std::to_string(a + 1)] = {{"center", c[a].center},
                                               {"deviation_power", c[a].dev_power.str()}};
    }

    std::ostringstream rows;
    auto row = [&](const std::string& name, const LeadingTerm& t) {
        rows << name << ",";
        if (t.bound_only)
            rows << ",,bound_only\n";
        else
            rows << fmt17(t.coefficient) << "," << t.power.str() << ",coefficient\n";
    };
    for (int a = 1; a <= 3; ++a)
        for (int b = a; b <= 3; ++b)
            row("a" + std::to_string(a) + std::to_string(b), a_leading(g, a, b));
    row("detA", detA_leading(g));
    write_stamped_csv(cfg.out_dir + "/asym_table.csv", "entry,coefficient,eps_power,kind",
                      rows.str(), cfg);
    write_stamped_json(cfg.out_dir + "/asym_table.json", out, cfg);
    std::cout << out.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_solve(const RunConfig& cfg) {
    ensure_outdir(cfg);
    NeckGeometry g = cfg.geometry.make(cfg.eps);
    logmsg(1, "building mesh at eps = " + fmt17(cfg.eps));
    TriMesh mesh = build_neck_mesh(g, cfg.mesh);
    StokesSolver solver(&g, mesh);
    BoundaryData bd = BoundaryData::from_class(g, cfg.bc);
    logmsg(1, "solving the four Dirichlet subproblems");
    ModeSolves ms = solve_modes(solver, bd);
    InteractionSystem sys =
        assemble_interaction(solver, ms.u1, ms.u2, ms.u3, ms.u0, cfg.eps, cfg.bc);
    StokesSolution full = reconstruct(ms.u1, ms.u2, ms.u3, ms.u0, sys.C);
    logmsg(1, "direct rigid solve");
    StokesSolution direct = solver.solve_rigid(bd.trace());

    // field samples over the measured neck
    std::ostringstream rows;
    NeckSampler samp(g, cfg.probe_nx, cfg.probe_nk, g.R());
    for (int i = 0; i < samp.count(); ++i) {
        const Point2 p = samp.point(i);
        const Vec2 u = solver.eval_velocity(full, p);
        const Tensor2 du = solver.eval_gradient(full, p);
        rows << fmt17(p.x) << "," << fmt17(p.y) << "," << fmt17(u.x) << "," << fmt17(u.y)
             << "," << fmt17(du.a11) << "," << fmt17(du.a12) << "," << fmt17(du.a21)
             << "," << fmt17(du.a22) << "," << fmt17(solver.eval_pressure(full, p))
             << "\n";
    }
    write_stamped_csv(cfg.out_dir + "/fields.csv",
                      "x1,x2,u1,u2,du1dx1,du1dx2,du2dx1,du2dx2,p", rows.str(), cfg);

    json sysj = interaction_to_json(sys);
    sysj["direct_C"] = {direct.rigid_c[0], direct.rigid_c[1], direct.rigid_c[2]};
    for (int b = 0; b < 3; ++b)
        sysj["q_surface"][b] =
            solver.particle_stress_functional(ms.u0, static_cast<RigidMode>(b + 1));
    write_stamped_json(cfg.out_dir + "/interaction.json", sysj, cfg);

    const QualityReport q = quality_report(g, mesh);
    json diag = {
        {"mesh",
         {{"n_triangles", q.n_triangles},
          {"n_vertices", q.n_vertices},
          {"neck_triangles", q.neck_triangles},
          {"min_scaled_angle_deg", q.min_scaled_angle_deg},
          {"max_scaled_aspect", q.max_scaled_aspect},
          {"boundary_max_dist", q.boundary_max_dist}}},
        {"solves",
         {{"compat_defect", ms.u0.compat_defect},
          {"div_residual", ms.u0.div_residual},
          {"gauge_defect", ms.u0.gauge_defect}}},
        {"probes",
         {{"grad_mid", midpoint_probe(solver, full, g)},
          {"grad_mid_direct", midpoint_probe(solver, direct, g)},
          {"p_osc", pressure_oscillation(solver, full, g, cfg.probe_nx, cfg.probe_nk)},
          {"sup_delta_grad",
           sup_delta_gradient(solver, full, g, cfg.probe_nx, cfg.probe_nk)}}},
    };
    write_stamped_json(cfg.out_dir + "/diagnostics.json", diag, cfg);
    logmsg(1, "solve: wrote fields.csv, interaction.json, diagnostics.json");
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_sweep(const RunConfig& cfg) {
    ensure_outdir(cfg);
    SweepConfig sc;
    sc.geometry = cfg.geometry;
    sc.mesh = cfg.mesh;
    sc.bc = cfg.bc;
    sc.eps_list = cfg.eps_list;
    sc.probe_nx = cfg.probe_nx;
    sc.probe_nk = cfg.probe_nk;
    logmsg(1, "sweep over " + std::to_string(sc.eps_list.size()) + " eps values");
    SweepReport rep = run_sweep(sc);

    json out;
    out["records"] = json::array();
    std::ostringstream rows;
    std::vector<std::pair<double, double>> grad_pairs;
    for (const SweepRecord& r : rep.records) {
        out["records"].push_back(record_to_json(r));
        rows << sweep_csv_row(r) << "\n";
        grad_pairs.push_back({r.eps, r.grad_mid});
    }

    if (grad_pairs.size() >= 3) {
        const RateFit f = fit_rate(grad_pairs);
        out["fits"]["grad_mid"] = {{"slope", f.slope}, {"intercept", f.intercept},
                                   {"ci", f.ci}};
    }
    // touching-limit extrapolation for the bounded families of this class
    const int shift = sc.bc.cls == BcClass::Phi1 ? 1 : sc.bc.cls == BcClass::Phi2 ? 2 : 0;
    for (int beta = 1; beta <= 3; ++beta) {
        if (!qstar_family_bounded(sc.bc, beta, shift)) continue;
        std::vector<std::pair<double, double>> pairs;
        for (const SweepRecord& r : rep.records) {
            const double v = shift == 1   ? r.shifted1(beta - 1)
                             : shift == 2 ? r.shifted2(beta - 1)
                                          : r.Q(beta - 1);
            pairs.push_back({r.eps, v});
        }
        if (pairs.size() < 3) continue;
        const QstarFit qf = extrapolate_qstar(pairs);
        out["qstar"][(shift ? "shifted_q" : "q") + std::to_string(beta)] = {
            {"limit", qf.limit},
            {"uncertainty", qf.uncertainty},
            {"theta", qf.theta},
            {"shift", shift}};
    }

    write_stamped_csv(cfg.out_dir + "/sweep.csv", sweep_csv_header(), rows.str(), cfg);
    write_stamped_json(cfg.out_dir + "/sweep.json", out, cfg);
    logmsg(1, "sweep: wrote sweep.csv and sweep.json");
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_fit(const std::string& input, const std::string& column,
            const std::string& out_path) {
    std::ifstream f(input);
    if (!f) throw ConfigError("cannot open " + input);
    std::string line;
    std::vector<std::string> cols;
    std::vector<std::pair<double, double>> pairs;
    int eps_idx = -1, val_idx = -1;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> parts;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) parts.push_back(tok);
        if (cols.empty()) {
            cols = parts;
            for (std::size_t i = 0; i < cols.size(); ++i) {
                if (cols[i] == "eps") eps_idx = static_cast<int>(i);
                if (cols[i] == column) val_idx = static_cast<int>(i);
            }
            if (eps_idx < 0) throw ConfigError("csv has no 'eps' column");
            if (val_idx < 0) throw ConfigError("csv has no '" + column + "' column");
            continue;
        }
        pairs.push_back({std::stod(parts[eps_idx]), std::stod(parts[val_idx])});
    }
    const RateFit fit = fit_rate(pairs);
    json out = {{"column", column},
                {"n", pairs.size()},
                {"slope", fit.slope},
                {"intercept", fit.intercept},
                {"ci", fit.ci}};
    std::cout << out.dump(2) << "\n";
    if (!out_path.empty()) {
        std::ofstream of(out_path);
        of << out.dump(2) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_oracle_compare(const RunConfig& cfg) {
    ensure_outdir(cfg);
    json out;
    out["records"] = json::array();
    bool ok = true;
    for (double eps : cfg.eps_list) {
        NeckGeometry g = cfg.geometry.make(eps);
        TriMesh mesh = build_neck_mesh(g, cfg.mesh);
        StokesSolver solver(&g, mesh);
        BoundaryData bd = BoundaryData::from_class(g, cfg.bc);
        ModeSolves ms = solve_modes(solver, bd);
        InteractionSystem sys =
            assemble_interaction(solver, ms.u1, ms.u2, ms.u3, ms.u0, eps, cfg.bc);
        StokesSolution full = reconstruct(ms.u1, ms.u2, ms.u3, ms.u0, sys.C);
        StokesSolution direct = solver.solve_rigid(bd.trace());
        const double rel = solver.velocity_l2(full.vel - direct.vel) /
                           std::max(solver.velocity_l2(direct.vel), 1e-300);
        double cdiff = 0.0;
        for (int a = 0; a < 3; ++a)
            cdiff = std::max(cdiff, std::fabs(sys.C(a) - direct.rigid_c[a]));
        ok = ok && rel < 1e-8 && cdiff < 1e-8;
        out["records"].push_back({{"eps", eps},
                                  {"rel_l2_velocity_diff", rel},
                                  {"max_c_diff", cdiff},
                                  {"C_decomposition", {sys.C(0), sys.C(1), sys.C(2)}},
                                  {"C_direct",
                                   {direct.rigid_c[0], direct.rigid_c[1],
                                    direct.rigid_c[2]}}});
        logmsg(1, "eps " + fmt17(eps) + ": rel L2 " + fmt17(rel) + ", max |dC| " +
                      fmt17(cdiff));
    }
    out["all_within_1e-8"] = ok;
    write_stamped_json(cfg.out_dir + "/oracle_compare.json", out, cfg);
    std::cout << out.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"neckflow: Stokes flow with a rigid particle near the boundary"};
    app.require_subcommand(1);

    std::string config_path, out_override, fit_input, fit_column = "grad_mid",
                             fit_out;
    int threads = 1;
    app.add_option("--threads", threads,
                   "accepted for interface compatibility; the solver is single-threaded");
    app.add_option("--log-level", g_log_level, "0 = quiet, 1 = progress, 2 = verbose");

    auto add_config = [&](CLI::App* sub) {
        sub->fallthrough();
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_override, "output directory override");
    };

    CLI::App* c_checkaux = app.add_subcommand("check-aux", "verify the closed-form pairs");
    add_config(c_checkaux);
    CLI::App* c_asym = app.add_subcommand("asym", "closed-form leading coefficients");
    add_config(c_asym);
    CLI::App* c_solve = app.add_subcommand("solve", "one full solve at geometry.eps");
    add_config(c_solve);
    CLI::App* c_sweep = app.add_subcommand("sweep", "eps sweep with fits");
    add_config(c_sweep);
    CLI::App* c_oracle = app.add_subcommand("oracle-compare",
                                            "decomposition vs direct rigid solve");
    add_config(c_oracle);
    CLI::App* c_fit = app.add_subcommand("fit", "log-log rate fit of a sweep column");
    c_fit->add_option("--input", fit_input, "sweep CSV")->required();
    c_fit->add_option("--column", fit_column, "column name (default grad_mid)");
    c_fit->add_option("--out", fit_out, "optional JSON output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(c_fit)) return cmd_fit(fit_input, fit_column, fit_out);

        RunConfig cfg = load_config(config_path);
        if (!out_override.empty()) {
            cfg.out_dir = out_override;
            cfg.resolved["output"]["dir"] = out_override;
        }
        if (app.got_subcommand(c_checkaux)) return cmd_check_aux(cfg);
        if (app.got_subcommand(c_asym)) return cmd_asym(cfg);
        if (app.got_subcommand(c_solve)) return cmd_solve(cfg);
        if (app.got_subcommand(c_sweep)) return cmd_sweep(cfg);
        if (app.got_subcommand(c_oracle)) return cmd_oracle_compare(cfg);
        std::cerr << json{{"error", "unknown subcommand"}}.dump() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << json{{"error", "config"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << json{{"error", "config"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::runtime_error& e) {
        std::cerr << json{{"error", "compute"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return 3;
    }
}
