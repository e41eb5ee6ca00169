// io.hpp
//
// JSON run configuration, stamped output writers (every file carries the
// resolved configuration and a content hash), and serializers for the
// interaction system and sweep reports.

#ifndef NECKFLOW_IO_HPP
#define NECKFLOW_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "neckflow/experiments.hpp"
#include "neckflow/functionals.hpp"

namespace neckflow {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    double eps = 1e-2; // single-solve eps
    GeometryParams geometry{};
    MeshParams mesh{};
    BcSpec bc{BcClass::Phi1, 0};
    std::vector<double> eps_list{0.0316227766016838, 1e-2, 3.16227766016838e-3, 1e-3};
    int probe_nx = 200;
    int probe_nk = 20;
    std::string out_dir = "out";
    json resolved; // the fully-resolved configuration
};

inline BcSpec parse_bc(const json& j) {
    BcSpec bc;
    const std::string cls = j.value("class", "phi1");
    if (cls == "phi1") bc.cls = BcClass::Phi1;
    else if (cls == "phi2") bc.cls = BcClass::Phi2;
    else if (cls == "phi3") bc.cls = BcClass::Phi3;
    else if (cls == "phi4") bc.cls = BcClass::Phi4;
    else throw ConfigError("bc.class must be one of phi1|phi2|phi3|phi4 (custom traces "
                           "are only available through the library API)");
    bc.l = j.value("l", 1);
    if ((bc.cls == BcClass::Phi3 || bc.cls == BcClass::Phi4) && bc.l < 1)
        throw ConfigError("bc.l must be a positive integer");
    return bc;
}

inline std::string bc_class_name(BcClass c) {
    switch (c) {
        case BcClass::Phi1: return "phi1";
        case BcClass::Phi2: return "phi2";
        case BcClass::Phi3: return "phi3";
        case BcClass::Phi4: return "phi4";
        case BcClass::Custom: return "custom";
    }
    return "?";
}

inline RunConfig config_from_json(const json& j) {
    RunConfig c;
    try {
        if (j.contains("geometry")) {
            const json& g = j["geometry"];
            c.eps = g.value("eps", c.eps);
            c.geometry.kappa = g.value("kappa", c.geometry.kappa);
            c.geometry.kappa1 = g.value("kappa1", c.geometry.kappa1);
            c.geometry.R = g.value("R", c.geometry.R);
            c.geometry.mu = g.value("mu", c.geometry.mu);
            if (g.contains("closure")) {
                const json& cl = g["closure"];
                const std::string type = cl.value("type", "ellipse_morph");
                if (type != "ellipse_morph")
                    throw ConfigError("closure.type: only 'ellipse_morph' is implemented");
                const json p = cl.value("params", json::object());
                ClosureSpec& cs = c.geometry.closure;
                cs.particle_a_scale = p.value("particle_a_scale", cs.particle_a_scale);
                cs.particle_t2 = p.value("particle_t2", cs.particle_t2);
                cs.outer_a_scale = p.value("outer_a_scale", cs.outer_a_scale);
                cs.outer_t2 = p.value("outer_t2", cs.outer_t2);
                cs.outer_b_scale = p.value("outer_b_scale", cs.outer_b_scale);
                cs.outer_floor = p.value("outer_floor", cs.outer_floor);
            }
        }
        if (j.contains("mesh")) {
            const json& m = j["mesh"];
            c.mesh.n_layers = m.value("n_layers", c.mesh.n_layers);
            c.mesh.theta = m.value("theta", c.mesh.theta);
            c.mesh.growth = m.value("growth", c.mesh.growth);
            c.mesh.h_far = m.value("h_far", c.mesh.h_far);
            c.mesh.far_refine = m.value("far_refine", c.mesh.far_refine);
        }
        if (j.contains("bc")) c.bc = parse_bc(j["bc"]);
        if (j.contains("experiment")) {
            const json& e = j["experiment"];
            if (e.contains("eps_list"))
                c.eps_list = e["eps_list"].get<std::vector<double>>();
            c.probe_nx = e.value("probe_nx", c.probe_nx);
            c.probe_nk = e.value("probe_nk", c.probe_nk);
        }
        if (j.contains("output")) c.out_dir = j["output"].value("dir", c.out_dir);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("malformed config: ") + ex.what());
    }

    // basic validation before any compute
    if (!(c.eps > 0.0)) throw ConfigError("geometry.eps must be positive");
    if (!(c.geometry.kappa1 > c.geometry.kappa))
        throw ConfigError("geometry: need kappa1 > kappa");
    if (c.eps_list.empty()) throw ConfigError("experiment.eps_list must be nonempty");
    for (std::size_t i = 0; i + 1 < c.eps_list.size(); ++i)
        if (!(c.eps_list[i] > c.eps_list[i + 1]))
            throw ConfigError("experiment.eps_list must be strictly decreasing");

    c.resolved = {
        {"geometry",
         {{"eps", c.eps},
          {"kappa", c.geometry.kappa},
          {"kappa1", c.geometry.kappa1},
          {"R", c.geometry.R},
          {"mu", c.geometry.mu},
          {"closure",
           {{"type", "ellipse_morph"},
            {"params",
             {{"particle_a_scale", c.geometry.closure.particle_a_scale},
              {"particle_t2", c.geometry.closure.particle_t2},
              {"outer_a_scale", c.geometry.closure.outer_a_scale},
              {"outer_t2", c.geometry.closure.outer_t2},
              {"outer_b_scale", c.geometry.closure.outer_b_scale},
              {"outer_floor", c.geometry.closure.outer_floor}}}}}}},
        {"mesh",
         {{"n_layers", c.mesh.n_layers},
          {"theta", c.mesh.theta},
          {"growth", c.mesh.growth},
          {"h_far", c.mesh.h_far},
          {"far_refine", c.mesh.far_refine}}},
        {"bc", {{"class", bc_class_name(c.bc.cls)}, {"l", c.bc.l}}},
        {"experiment",
         {{"eps_list", c.eps_list}, {"probe_nx", c.probe_nx}, {"probe_nk", c.probe_nk}}},
        {"output", {{"dir", c.out_dir}}},
    };
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
    }
    return config_from_json(j);
}

// 17 significant digits round-trips doubles exactly
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// write a JSON payload with the resolved config and a content hash of the
// payload body
inline void write_stamped_json(const std::string& path, json payload,
                               const RunConfig& cfg) {
    payload["config"] = cfg.resolved;
    const std::string body = payload.dump();
    payload["content_hash"] = fnv1a64(body);
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << payload.dump(2) << "\n";
}

// write a CSV with config and hash carried in leading comment lines
inline void write_stamped_csv(const std::string& path, const std::string& header,
                              const std::string& rows, const RunConfig& cfg) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    const std::string body = header + "\n" + rows;
    f << "# config: " << cfg.resolved.dump() << "\n";
    f << "# content_hash: " << fnv1a64(body) << "\n";
    f << body;
}

inline json interaction_to_json(const InteractionSystem& s) {
    json a = json::array();
    for (int i = 0; i < 3; ++i)
        a.push_back({s.A(i, 0), s.A(i, 1), s.A(i, 2)});
    const Eigen::Vector3d s1 = s.shifted_q(1), s2 = s.shifted_q(2);
    return {
        {"eps", s.eps},
        {"bc", {{"class", bc_class_name(s.bc.cls)}, {"l", s.bc.l}}},
        {"A", a},
        {"Q", {s.Q(0), s.Q(1), s.Q(2)}},
        {"C", {s.C(0), s.C(1), s.C(2)}},
        {"cond", s.cond},
        {"cramer_diff", s.cramer_diff},
        {"conditioning_warning", s.conditioning_warning},
        {"shifted", {{"q1", {s1(0), s1(1), s1(2)}}, {"q2", {s2(0), s2(1), s2(2)}}}},
    };
}

inline json record_to_json(const SweepRecord& r) {
    json a = json::array();
    for (int i = 0; i < 3; ++i)
        a.push_back({r.A(i, 0), r.A(i, 1), r.A(i, 2)});
    return {
        {"eps", r.eps},
        {"A", a},
        {"Q", {r.Q(0), r.Q(1), r.Q(2)}},
        {"C", {r.C(0), r.C(1), r.C(2)}},
        {"shifted_q1", {r.shifted1(0), r.shifted1(1), r.shifted1(2)}},
        {"shifted_q2", {r.shifted2(0), r.shifted2(1), r.shifted2(2)}},
        {"cond", r.cond},
        {"grad_mid", r.grad_mid},
        {"grad_mid_direct", r.grad_mid_direct},
        {"p_osc", r.p_osc},
        {"sup_delta_grad", r.sup_delta_grad},
        {"blowup_h", r.blowup_h},
        {"recon_vs_direct_l2", r.recon_vs_direct_l2},
        {"c_diff", r.c_diff},
        {"q_surface", {r.q_surface[0], r.q_surface[1], r.q_surface[2]}},
        {"compat_defect", r.compat_defect},
        {"div_residual", r.div_residual},
        {"min_scaled_angle", r.min_scaled_angle},
        {"n_triangles", r.n_triangles},
    };
}

// fixed, documented column set for the per-record sweep CSV
inline std::string sweep_csv_header() {
    return "eps,a11,a12,a13,a22,a23,a33,q1,q2,q3,c1,c2,c3,"
           "sq1_1,sq1_2,sq1_3,sq2_1,sq2_2,sq2_3,"
           "grad_mid,grad_mid_direct,p_osc,sup_delta_grad,blowup_h,"
           "recon_vs_direct_l2,c_diff,cond,n_triangles";
}

inline std::string sweep_csv_row(const SweepRecord& r) {
    std::ostringstream os;
    auto F = [&](double v) { os << fmt17(v) << ","; };
    F(r.eps);
    F(r.A(0, 0)); F(r.A(0, 1)); F(r.A(0, 2)); F(r.A(1, 1)); F(r.A(1, 2)); F(r.A(2, 2));
    F(r.Q(0)); F(r.Q(1)); F(r.Q(2));
    F(r.C(0)); F(r.C(1)); F(r.C(2));
    F(r.shifted1(0)); F(r.shifted1(1)); F(r.shifted1(2));
    F(r.shifted2(0)); F(r.shifted2(1)); F(r.shifted2(2));
    F(r.grad_mid); F(r.grad_mid_direct); F(r.p_osc); F(r.sup_delta_grad); F(r.blowup_h);
    F(r.recon_vs_direct_l2); F(r.c_diff); F(r.cond);
    os << r.n_triangles;
    return os.str();
}

} // namespace neckflow

#endif // NECKFLOW_IO_HPP
