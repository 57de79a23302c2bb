#pragma once

// Scenario files, trajectory files and result artifacts (CSV, JSON, run
// manifest). One JSON scenario plus a seed reproduces any run.

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "magbot/actuation.hpp"
#include "magbot/crosstalk.hpp"
#include "magbot/dynamics.hpp"
#include "magbot/magnetics.hpp"
#include "magbot/version.hpp"

namespace magbot {

using json = nlohmann::json;

/// Bad or inconsistent configuration; the message starts with the field path.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(const std::string& field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Scenario {
    CylMagnet ipm{0.005, 0.005, 1.45};
    IpmConfiguration layout{0.15, std::numbers::pi / 2};
    CylMagnet epm_reference{0.1, 0.1, 1.45};
    int epm_reference_count = 2;
    int n_epms = 2;
    ConstraintSet constraints;
    SolverSettings solver;
    ActivationScale scale;
    double infeasible_residual = 0.1;
    std::vector<Dipole<double>> sources;  // explicit dipoles for field queries
    std::vector<std::string> trajectories;  // optional default pair for simulate

    RobotParams robot;
    PidGains gains;
    SimConfig sim;

    SweepGrid sweep{{0.05, 0.10, 0.15}, {0.0, std::numbers::pi / 4, std::numbers::pi / 2}, {2, 3}};

    // Derived on load, never read from file.
    double ipm_moment = 0.0;
    std::vector<double> epm_moments;

    void derive() {
        ipm_moment = moment_from_cylinder(ipm);
        epm_moments.clear();
        for (const auto& m : split_cylinder_volume(epm_reference, epm_reference_count, n_epms))
            epm_moments.push_back(moment_from_cylinder(m));
        robot.ipm = ipm;
    }

    StudyConfig study() const {
        StudyConfig s;
        s.ipm = ipm;
        s.epm_reference = epm_reference;
        s.epm_reference_count = epm_reference_count;
        s.constraints = constraints;
        s.solver = solver;
        s.scale = scale;
        s.infeasible_residual = infeasible_residual;
        return s;
    }
};

namespace detail {

inline void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ValidationError(field, what);
}

template <class T>
T read(const json& j, const char* key, const T& fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(path + "." + key, "has the wrong type");
    }
}

inline CylMagnet read_magnet(const json& j, const CylMagnet& fallback, const std::string& path) {
    if (!j.is_object()) throw ValidationError(path, "must be an object");
    CylMagnet m;
    m.diameter = read(j, "diameter", fallback.diameter, path);
    m.length = read(j, "length", fallback.length, path);
    m.remanence = read(j, "remanence", fallback.remanence, path);
    require(m.diameter > 0.0, path + ".diameter", "must be > 0");
    require(m.length > 0.0, path + ".length", "must be > 0");
    require(m.remanence > 0.0, path + ".remanence", "must be > 0");
    return m;
}

inline json magnet_json(const CylMagnet& m) {
    return {{"diameter", m.diameter}, {"length", m.length}, {"remanence", m.remanence}};
}

inline ChannelGains read_channel(const json& j, const ChannelGains& fb, const std::string& path) {
    ChannelGains g{read(j, "kp", fb.kp, path), read(j, "ki", fb.ki, path), read(j, "kd", fb.kd, path)};
    require(g.kp >= 0.0, path + ".kp", "must be >= 0");
    require(g.ki >= 0.0, path + ".ki", "must be >= 0");
    require(g.kd >= 0.0, path + ".kd", "must be >= 0");
    return g;
}

inline json channel_json(const ChannelGains& g) { return {{"kp", g.kp}, {"ki", g.ki}, {"kd", g.kd}}; }

inline Vec3<double> read_vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw ValidationError(path, "must be an array of three numbers");
    try {
        return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    } catch (const json::exception&) {
        throw ValidationError(path, "must be an array of three numbers");
    }
}

inline double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }
inline double deg_to_rad(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace detail

/// Parse and validate. Missing blocks take the documented defaults.
inline Scenario scenario_from_json(const json& j) {
    using namespace detail;
    if (!j.is_object()) throw ValidationError("$", "scenario must be a JSON object");
    Scenario s;

    if (j.contains("ipm")) s.ipm = read_magnet(j["ipm"], s.ipm, "ipm");

    if (j.contains("layout")) {
        const json& l = j["layout"];
        s.layout.separation = read(l, "d", s.layout.separation, "layout");
        s.layout.relative_angle = deg_to_rad(read(l, "theta_deg", rad_to_deg(s.layout.relative_angle), "layout"));
        require(s.layout.separation > 0.0, "layout.d", "must be > 0");
        require(s.layout.relative_angle >= 0.0 && s.layout.relative_angle <= std::numbers::pi / 2 + 1e-12,
                "layout.theta_deg", "must be within [0, 90]");
    }

    if (j.contains("epms")) {
        const json& e = j["epms"];
        if (e.contains("reference")) s.epm_reference = read_magnet(e["reference"], s.epm_reference, "epms.reference");
        s.epm_reference_count = read(e, "reference_count", s.epm_reference_count, "epms");
        s.n_epms = read(e, "count", s.n_epms, "epms");
        require(s.epm_reference_count >= 1, "epms.reference_count", "must be >= 1");
        require(s.n_epms >= 1, "epms.count", "must be >= 1");
    }

    if (j.contains("constraints")) {
        const json& c = j["constraints"];
        auto& cs = s.constraints;
        cs.r_min = read(c, "r_min", cs.r_min, "constraints");
        cs.r_max = read(c, "r_max", cs.r_max, "constraints");
        cs.f_attract_max = read(c, "f_attract_max", cs.f_attract_max, "constraints");
        cs.epm_min_gap = read(c, "epm_min_gap", cs.epm_min_gap, "constraints");
    }
    require(s.constraints.r_min > 0.0, "constraints.r_min", "must be > 0");
    require(s.constraints.r_max > s.constraints.r_min, "constraints.r_max", "must exceed r_min");
    require(s.constraints.f_attract_max > 0.0, "constraints.f_attract_max", "must be > 0");
    require(s.constraints.epm_min_gap >= 0.0, "constraints.epm_min_gap", "must be >= 0");

    if (j.contains("solver")) {
        const json& o = j["solver"];
        auto& st = s.solver;
        st.max_restarts = read(o, "max_restarts", st.max_restarts, "solver");
        st.max_iters = read(o, "max_iters", st.max_iters, "solver");
        st.grad_tol = read(o, "grad_tol", st.grad_tol, "solver");
        st.step_tol = read(o, "step_tol", st.step_tol, "solver");
        st.weight_torque = read(o, "weight_torque", st.weight_torque, "solver");
        st.weight_force = read(o, "weight_force", st.weight_force, "solver");
        st.rng_seed = read(o, "rng_seed", st.rng_seed, "solver");
        st.include_inter_agent = read(o, "include_inter_agent", st.include_inter_agent, "solver");
        st.max_start_attempts = read(o, "max_start_attempts", st.max_start_attempts, "solver");
    }
    require(s.solver.max_restarts >= 1, "solver.max_restarts", "must be >= 1");
    require(s.solver.max_iters >= 1, "solver.max_iters", "must be >= 1");
    require(s.solver.weight_torque > 0.0, "solver.weight_torque", "must be > 0");
    require(s.solver.weight_force > 0.0, "solver.weight_force", "must be > 0");
    require(s.solver.max_start_attempts >= 1, "solver.max_start_attempts", "must be >= 1");

    if (j.contains("normalization")) {
        const json& n = j["normalization"];
        s.scale.torque = read(n, "torque", s.scale.torque, "normalization");
        s.scale.force = read(n, "force", s.scale.force, "normalization");
        s.infeasible_residual = read(n, "infeasible_residual", s.infeasible_residual, "normalization");
    }
    require(s.scale.torque > 0.0, "normalization.torque", "must be > 0");
    require(s.scale.force > 0.0, "normalization.force", "must be > 0");

    if (j.contains("sources")) {
        const json& src = j["sources"];
        if (!src.is_array()) throw ValidationError("sources", "must be an array");
        for (std::size_t i = 0; i < src.size(); ++i) {
            const std::string p = "sources[" + std::to_string(i) + "]";
            if (!src[i].is_object() || !src[i].contains("position") || !src[i].contains("moment"))
                throw ValidationError(p, "needs position and moment");
            s.sources.push_back({read_vec3(src[i]["position"], p + ".position"), read_vec3(src[i]["moment"], p + ".moment")});
        }
    }

    if (j.contains("trajectories")) {
        const json& t = j["trajectories"];
        if (!t.is_array() || t.size() != 2) throw ValidationError("trajectories", "must list exactly two files");
        for (std::size_t i = 0; i < 2; ++i) {
            if (!t[i].is_string()) throw ValidationError("trajectories[" + std::to_string(i) + "]", "must be a path");
            s.trajectories.push_back(t[i].get<std::string>());
        }
    }

    if (j.contains("dynamics")) {
        const json& d = j["dynamics"];
        auto& r = s.robot;
        r.mass = read(d, "mass", r.mass, "dynamics");
        r.yaw_inertia = read(d, "yaw_inertia", r.yaw_inertia, "dynamics");
        r.linear_damping = read(d, "linear_damping", r.linear_damping, "dynamics");
        r.angular_damping = read(d, "angular_damping", r.angular_damping, "dynamics");
        require(r.mass > 0.0, "dynamics.mass", "must be > 0");
        require(r.yaw_inertia > 0.0, "dynamics.yaw_inertia", "must be > 0");
        require(r.linear_damping > 0.0, "dynamics.linear_damping", "must be > 0");
        require(r.angular_damping > 0.0, "dynamics.angular_damping", "must be > 0");
        s.sim.control_period = read(d, "control_period", s.sim.control_period, "dynamics");
        s.sim.dt_physics = read(d, "dt_physics", s.sim.dt_physics, "dynamics");
        s.sim.inter_agent = read(d, "inter_agent", s.sim.inter_agent, "dynamics");
        s.sim.gradient_tie_tolerance =
            read(d, "gradient_tie_tolerance", s.sim.gradient_tie_tolerance, "dynamics");
        require(s.sim.gradient_tie_tolerance >= 0.0, "dynamics.gradient_tie_tolerance", "must be >= 0");
        require(s.sim.control_period > 0.0, "dynamics.control_period", "must be > 0");
        require(s.sim.dt_physics > 0.0 && s.sim.dt_physics <= s.sim.control_period, "dynamics.dt_physics",
                "must be in (0, control_period]");
        if (d.contains("gains")) {
            const json& g = d["gains"];
            auto& pg = s.gains;
            if (g.contains("x")) pg.x = read_channel(g["x"], pg.x, "dynamics.gains.x");
            if (g.contains("y")) pg.y = read_channel(g["y"], pg.y, "dynamics.gains.y");
            if (g.contains("psi")) pg.psi = read_channel(g["psi"], pg.psi, "dynamics.gains.psi");
            pg.force_clamp = read(g, "force_clamp", pg.force_clamp, "dynamics.gains");
            pg.torque_clamp = read(g, "torque_clamp", pg.torque_clamp, "dynamics.gains");
            pg.integral_fraction = read(g, "integral_fraction", pg.integral_fraction, "dynamics.gains");
            require(pg.force_clamp > 0.0, "dynamics.gains.force_clamp", "must be > 0");
            require(pg.torque_clamp > 0.0, "dynamics.gains.torque_clamp", "must be > 0");
            require(pg.integral_fraction > 0.0, "dynamics.gains.integral_fraction", "must be > 0");
        }
        if (d.contains("failure")) {
            const json& f = d["failure"];
            auto& ft = s.sim.failure;
            ft.position_error = read(f, "position_error", ft.position_error, "dynamics.failure");
            ft.residual = read(f, "residual", ft.residual, "dynamics.failure");
            ft.separation = read(f, "separation", ft.separation, "dynamics.failure");
        }
    }

    if (j.contains("sweep")) {
        const json& w = j["sweep"];
        s.sweep.separations = read(w, "d_values", s.sweep.separations, "sweep");
        std::vector<double> deg;
        for (double a : s.sweep.angles) deg.push_back(rad_to_deg(a));
        deg = read(w, "theta_deg_values", deg, "sweep");
        s.sweep.angles.clear();
        for (double a : deg) s.sweep.angles.push_back(deg_to_rad(a));
        s.sweep.n_epms = read(w, "n_epms_values", s.sweep.n_epms, "sweep");
        require(!s.sweep.separations.empty(), "sweep.d_values", "must not be empty");
        require(!s.sweep.angles.empty(), "sweep.theta_deg_values", "must not be empty");
        require(!s.sweep.n_epms.empty(), "sweep.n_epms_values", "must not be empty");
    }

    s.derive();
    return s;
}

inline json to_json(const Scenario& s) {
    using namespace detail;
    json sources = json::array();
    for (const auto& d : s.sources)
        sources.push_back({{"position", {d.position.x, d.position.y, d.position.z}},
                           {"moment", {d.moment.x, d.moment.y, d.moment.z}}});
    std::vector<double> deg;
    for (double a : s.sweep.angles) deg.push_back(rad_to_deg(a));
    return {
        {"ipm", magnet_json(s.ipm)},
        {"layout", {{"d", s.layout.separation}, {"theta_deg", rad_to_deg(s.layout.relative_angle)}}},
        {"epms", {{"reference", magnet_json(s.epm_reference)}, {"reference_count", s.epm_reference_count}, {"count", s.n_epms}}},
        {"constraints",
         {{"r_min", s.constraints.r_min}, {"r_max", s.constraints.r_max},
          {"f_attract_max", s.constraints.f_attract_max}, {"epm_min_gap", s.constraints.epm_min_gap}}},
        {"solver",
         {{"max_restarts", s.solver.max_restarts}, {"max_iters", s.solver.max_iters},
          {"grad_tol", s.solver.grad_tol}, {"step_tol", s.solver.step_tol},
          {"weight_torque", s.solver.weight_torque}, {"weight_force", s.solver.weight_force},
          {"rng_seed", s.solver.rng_seed}, {"include_inter_agent", s.solver.include_inter_agent},
          {"max_start_attempts", s.solver.max_start_attempts}}},
        {"normalization",
         {{"torque", s.scale.torque}, {"force", s.scale.force}, {"infeasible_residual", s.infeasible_residual}}},
        {"sources", sources},
        {"trajectories", s.trajectories},
        {"dynamics",
         {{"mass", s.robot.mass}, {"yaw_inertia", s.robot.yaw_inertia},
          {"linear_damping", s.robot.linear_damping}, {"angular_damping", s.robot.angular_damping},
          {"control_period", s.sim.control_period}, {"dt_physics", s.sim.dt_physics},
          {"inter_agent", s.sim.inter_agent}, {"gradient_tie_tolerance", s.sim.gradient_tie_tolerance},
          {"gains",
           {{"x", channel_json(s.gains.x)}, {"y", channel_json(s.gains.y)}, {"psi", channel_json(s.gains.psi)},
            {"force_clamp", s.gains.force_clamp}, {"torque_clamp", s.gains.torque_clamp},
            {"integral_fraction", s.gains.integral_fraction}}},
          {"failure",
           {{"position_error", s.sim.failure.position_error}, {"residual", s.sim.failure.residual},
            {"separation", s.sim.failure.separation}}}}},
        {"sweep", {{"d_values", s.sweep.separations}, {"theta_deg_values", deg}, {"n_epms_values", s.sweep.n_epms}}},
    };
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string(), std::string("JSON parse error: ") + e.what());
    }
}

/// Relative trajectory paths are resolved against the scenario's directory.
/// `overrides` is merge-patched onto the file before validation.
inline Scenario load_scenario(const std::filesystem::path& path, const json& overrides = json::object()) {
    json j = read_json_file(path);
    if (!j.is_object()) throw ValidationError("$", "scenario must be a JSON object");
    j.merge_patch(overrides);
    Scenario s = scenario_from_json(j);
    for (auto& t : s.trajectories)
        if (std::filesystem::path(t).is_relative()) t = (path.parent_path() / t).lexically_normal().string();
    return s;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

inline void save_scenario(const Scenario& s, const std::filesystem::path& path) { write_text(path, to_json(s).dump(2) + "\n"); }

/// SHA-256 of the canonical serialization (object keys sorted), so key order
/// in the source file does not matter.
inline std::string scenario_hash(const Scenario& s) {
    const std::string canon = to_json(s).dump();
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(canon.data(), canon.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

/// JSON array of {t, x, y, psi}.
inline Trajectory trajectory_from_json(const json& j, const std::string& where = "trajectory") {
    if (!j.is_array()) throw ValidationError(where, "must be an array of waypoints");
    std::vector<Waypoint> w;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = where + "[" + std::to_string(i) + "]";
        const json& e = j[i];
        if (!e.is_object()) throw ValidationError(p, "must be an object");
        for (const char* k : {"t", "x", "y", "psi"})
            if (!e.contains(k) || !e[k].is_number()) throw ValidationError(p + "." + k, "missing or not a number");
        w.push_back({e["t"].get<double>(), e["x"].get<double>(), e["y"].get<double>(), e["psi"].get<double>()});
    }
    try {
        return Trajectory(std::move(w));
    } catch (const std::invalid_argument& e) {
        throw ValidationError(where, e.what());
    }
}

inline Trajectory load_trajectory(const std::filesystem::path& path) {
    return trajectory_from_json(read_json_file(path), path.string());
}

namespace detail {

inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace detail

inline std::string crosstalk_csv(const std::vector<CrosstalkReport>& reports) {
    using detail::num;
    std::string out = "d,theta_deg,n_epms,dof_index,crosstalk_pct,residual,converged\n";
    for (const auto& r : reports)
        for (const auto& a : r.dofs) {
            if (a.dof == 0) continue;
            out += num(r.separation) + "," + num(detail::rad_to_deg(r.relative_angle)) + "," + std::to_string(r.n_epms) +
                   "," + std::to_string(a.dof) + "," + num(100.0 * a.crosstalk) + "," + num(a.residual) + "," +
                   (a.feasible && a.solver_converged ? "1" : "0") + "\n";
        }
    return out;
}

inline json crosstalk_summary(const std::vector<CrosstalkReport>& reports) {
    using detail::finite_or_null;
    json cells = json::array();
    for (const auto& r : reports) {
        json infeasible = json::array();
        for (const auto& a : r.dofs)
            if (!a.feasible && a.dof != 0) infeasible.push_back(a.dof);
        json notes = json::array();
        for (const auto& a : r.dofs)
            if (!a.note.empty()) notes.push_back({{"dof", a.dof}, {"note", a.note}});
        cells.push_back({{"d", r.separation},
                         {"theta_deg", detail::rad_to_deg(r.relative_angle)},
                         {"n_epms", r.n_epms},
                         {"mean_crosstalk_pct", finite_or_null(100.0 * r.mean)},
                         {"mean_crosstalk_all_pct", finite_or_null(100.0 * r.mean_all)},
                         {"max_torque_crosstalk_pct", finite_or_null(100.0 * r.max_torque_crosstalk())},
                         {"infeasible_dofs", infeasible},
                         {"warning", r.warning},
                         {"notes", notes}});
    }
    return {{"cells", cells}};
}

inline std::string simlog_csv(const SimLog& log) {
    using detail::num;
    std::string out =
        "t,r1_x,r1_y,r1_psi,r2_x,r2_y,r2_psi,r1_err_pos,r1_err_ang,r2_err_pos,r2_err_ang,residual,failed\n";
    for (const auto& t : log.ticks) {
        out += num(t.t);
        for (const auto& s : t.states) out += "," + num(s.x) + "," + num(s.y) + "," + num(s.psi);
        out += "," + num(t.position_error(0)) + "," + num(t.angular_error(0)) + "," + num(t.position_error(1)) + "," +
               num(t.angular_error(1)) + "," + num(t.residual) + "," + (t.failed ? "1" : "0") + "\n";
    }
    return out;
}

inline json simlog_summary(const SimLog& log) {
    const auto s = log.summary();
    return {{"mean_pos_err_m", s.mean_pos_err_m},
            {"mean_ang_err_rad", s.mean_ang_err_rad},
            {"failed", s.failed},
            {"fail_time_s", detail::finite_or_null(s.fail_time_s)},
            {"min_separation_m", s.min_separation_m}};
}

struct RunManifest {
    std::string scenario_hash;
    std::uint64_t seed = 0;
    std::string tool_version = kVersion;
    std::string started_utc;
    std::string finished_utc;
    std::vector<std::string> outputs;

    json to_json() const {
        return {{"scenario_hash", scenario_hash}, {"seed", seed},          {"tool_version", tool_version},
                {"started_utc", started_utc},     {"finished_utc", finished_utc}, {"outputs", outputs}};
    }
};

inline std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace detail {

inline RunManifest write_artifacts(const std::filesystem::path& out_dir, const Scenario& scenario, std::uint64_t seed,
                                   const std::string& started,
                                   const std::vector<std::pair<std::string, std::string>>& files) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    RunManifest m;
    m.scenario_hash = scenario_hash(scenario);
    m.seed = seed;
    m.started_utc = started;
    for (const auto& [name, body] : files) {
        write_text(out_dir / name, body);
        m.outputs.push_back(name);
    }
    save_scenario(scenario, out_dir / "scenario.json");
    m.outputs.push_back("scenario.json");
    m.outputs.push_back("manifest.json");
    m.finished_utc = utc_now();
    write_text(out_dir / "manifest.json", m.to_json().dump(2) + "\n");
    return m;
}

}  // namespace detail

/// crosstalk.csv, crosstalk_summary.json, scenario.json and manifest.json.
inline RunManifest save_results(const std::vector<CrosstalkReport>& reports, const Scenario& scenario,
                                std::uint64_t seed, const std::filesystem::path& out_dir,
                                const std::string& started = utc_now()) {
    return detail::write_artifacts(out_dir, scenario, seed, started,
                                   {{"crosstalk.csv", crosstalk_csv(reports)},
                                    {"crosstalk_summary.json", crosstalk_summary(reports).dump(2) + "\n"}});
}

/// simulation.csv, simulation_summary.json, scenario.json and manifest.json.
inline RunManifest save_results(const SimLog& log, const Scenario& scenario, std::uint64_t seed,
                                const std::filesystem::path& out_dir, const std::string& started = utc_now()) {
    return detail::write_artifacts(out_dir, scenario, seed, started,
                                   {{"simulation.csv", simlog_csv(log)},
                                    {"simulation_summary.json", simlog_summary(log).dump(2) + "\n"}});
}

/// Simulation inputs assembled from a scenario and two trajectories.
inline SimSetup make_sim_setup(const Scenario& s, const Trajectory& t1, const Trajectory& t2, std::uint64_t seed) {
    SimSetup sim;
    sim.trajectories = {t1, t2};
    sim.robots = {s.robot, s.robot};
    sim.gains = s.gains;
    sim.epm_moments = s.epm_moments;
    sim.constraints = s.constraints;
    sim.solver = s.solver;
    sim.config = s.sim;
    sim.seed = seed;
    return sim;
}

}  // namespace magbot
