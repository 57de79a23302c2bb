// Batch entry point: field evaluation, single solves, crosstalk studies,
// sweeps and closed-loop simulations. Exit codes: 0 done, 1 runtime
// failure, 2 usage or validation error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "magbot/magbot.hpp"

namespace {

using namespace magbot;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Options {
    std::string scenario = std::string(MAGBOT_DATA_DIR) + "/scenarios/default.json";
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> d;
    std::optional<double> theta_deg;
    std::optional<int> n_epms;
    std::string traj1, traj2;
    std::string point;
    int dof = 1;
};

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

Scenario load(const Options& o) {
    json patch = json::object();
    if (o.d) patch["layout"]["d"] = *o.d;
    if (o.theta_deg) patch["layout"]["theta_deg"] = *o.theta_deg;
    if (o.n_epms) patch["epms"]["count"] = *o.n_epms;
    if (o.seed) patch["solver"]["rng_seed"] = *o.seed;
    return load_scenario(o.scenario, patch);
}

Vec3<double> parse_point(const std::string& text) {
    std::istringstream in(text);
    std::array<double, 3> v{};
    char sep = 0;
    if (!(in >> v[0] >> sep) || sep != ',' || !(in >> v[1] >> sep) || sep != ',' || !(in >> v[2]))
        throw UsageError("--point expects x,y,z in metres, got '" + text + "'");
    in >> std::ws;
    if (!in.eof()) throw UsageError("--point expects x,y,z in metres, got '" + text + "'");
    return {v[0], v[1], v[2]};
}

void print_vec(const char* label, const Vec3<double>& v) { std::printf("%s %.6g %.6g %.6g\n", label, v.x, v.y, v.z); }

int cmd_field(const Options& o) {
    const Scenario s = load(o);
    const Vec3<double> p = parse_point(o.point);
    const auto b = field_at<double>(s.sources, p);
    const auto g = gradient_at<double>(s.sources, p);
    print_vec("B [T]:", b);
    std::printf("grad B [T/m]:\n");
    for (int r = 0; r < 3; ++r) std::printf("  %.6g %.6g %.6g\n", g(r, 0), g(r, 1), g(r, 2));
    return 0;
}

int cmd_solve(const Options& o) {
    const Scenario s = load(o);
    StudyConfig study = s.study();
    const ActuationSetup setup = make_setup(s.layout, s.n_epms, study);
    const auto target = unit_target(o.dof, s.scale);
    const SolveResult r = solve(target, setup, s.solver);
    std::printf("dof %d residual %.6g restarts %d converged %s\n", o.dof, r.residual, r.restarts_used,
                r.converged ? "true" : "false");
    for (std::size_t i = 0; i < r.x_best.n_epms(); ++i)
        std::printf("epm %zu: azimuth %.6g elevation %.6g r %.6g moment_azimuth %.6g moment_elevation %.6g\n", i + 1,
                    r.x_best(i, EpmPoseVector::kAzimuth), r.x_best(i, EpmPoseVector::kElevation),
                    r.x_best(i, EpmPoseVector::kRadius), r.x_best(i, EpmPoseVector::kMomentAzimuth),
                    r.x_best(i, EpmPoseVector::kMomentElevation));
    std::printf("achieved:");
    for (double v : r.achieved.values()) std::printf(" %.6g", v);
    std::printf("\ncrosstalk %.6g%%\n", 100.0 * crosstalk(r.achieved, o.dof, s.scale));
    return 0;
}

void print_report(const CrosstalkReport& r) {
    std::printf("d %.6g theta %.6g deg n_epms %d\n", r.separation, r.relative_angle * 180.0 / std::numbers::pi,
                r.n_epms);
    for (const auto& a : r.dofs) {
        if (a.dof == 0) {
            std::printf("  cell failed: %s\n", a.note.c_str());
            continue;
        }
        std::printf("  dof %2d crosstalk %8.4g%% residual %.4g%s%s\n", a.dof, 100.0 * a.crosstalk, a.residual,
                    a.feasible ? "" : " [infeasible] ", a.feasible ? "" : a.note.c_str());
    }
    if (std::isfinite(r.mean))
        std::printf("mean crosstalk %.4g%% (all DOFs %.4g%%)\n", 100.0 * r.mean, 100.0 * r.mean_all);
    else
        std::printf("mean crosstalk n/a, no DOF met tolerance (all DOFs %.4g%%)\n", 100.0 * r.mean_all);
    if (r.warning)
        std::printf("warning: %d DOF activation(s) could not be met within tolerance\n", r.n_infeasible);
    if (r.max_torque_crosstalk() >= 0.8)
        std::printf("warning: torque coupling %.4g%% between the two robots\n", 100.0 * r.max_torque_crosstalk());
}

int cmd_crosstalk(const Options& o) {
    const std::string started = utc_now();
    const Scenario s = load(o);
    const auto [matrix, report] = independence_study(s.layout, s.n_epms, s.study());
    print_report(report);
    if (!o.out.empty()) save_results(std::vector<CrosstalkReport>{report}, s, s.solver.rng_seed, o.out, started);
    return 0;
}

int cmd_sweep(const Options& o) {
    const std::string started = utc_now();
    const Scenario s = load(o);
    const auto reports = sweep(s.sweep, s.study());
    for (const auto& r : reports) print_report(r);
    save_results(reports, s, s.solver.rng_seed, o.out, started);
    std::printf("wrote %s\n", o.out.c_str());
    return 0;
}

int cmd_simulate(const Options& o) {
    const std::string started = utc_now();
    const Scenario s = load(o);
    std::string p1 = o.traj1, p2 = o.traj2;
    if (p1.empty() && s.trajectories.size() == 2) p1 = s.trajectories[0];
    if (p2.empty() && s.trajectories.size() == 2) p2 = s.trajectories[1];
    if (p1.empty() || p2.empty()) throw UsageError("two trajectories are required (--traj1, --traj2)");
    Trajectory t1, t2;
    try {
        t1 = load_trajectory(p1);
        t2 = load_trajectory(p2);
    } catch (const IoError& e) {
        throw UsageError(e.what());
    }
    const SimLog log = run_simulation(make_sim_setup(s, t1, t2, *o.seed));
    const SimSummary sum = log.summary();
    std::printf("mean position error: %.6g m\n", sum.mean_pos_err_m);
    std::printf("mean angular error: %.6g deg\n", sum.mean_ang_err_rad * 180.0 / std::numbers::pi);
    std::printf("failed: %s\n", sum.failed ? "true" : "false");
    if (sum.failed) std::printf("fail time: %.6g s\n", sum.fail_time_s);
    std::printf("min separation: %.6g m\n", sum.min_separation_m);
    std::printf("end: %s\n", sum.end_reason.c_str());
    if (!o.out.empty()) save_results(log, s, *o.seed, o.out, started);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-robot magnetic actuation toolkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c) {
        c->add_option("--scenario", o.scenario, "Scenario JSON")->check(CLI::ExistingFile);
    };
    auto layout = [&](CLI::App* c) {
        c->add_option("--d", o.d, "IPM separation [m]");
        c->add_option("--theta", o.theta_deg, "IPM relative angle [deg]");
        c->add_option("--n-epms", o.n_epms, "Number of EPMs");
    };

    auto* field = app.add_subcommand("field", "Field and gradient of the scenario's sources at a point");
    common(field);
    field->add_option("--point", o.point, "x,y,z [m]")->required();

    auto* solve_cmd = app.add_subcommand("solve", "Single inverse solve for one unit DOF activation");
    common(solve_cmd);
    layout(solve_cmd);
    solve_cmd->add_option("--dof", o.dof, "DOF index 1..10")->check(CLI::Range(1, 10));
    solve_cmd->add_option("--seed", o.seed, "RNG seed");

    auto* xt = app.add_subcommand("crosstalk", "Independence study at one layout");
    common(xt);
    layout(xt);
    xt->add_option("--seed", o.seed, "RNG seed");
    xt->add_option("--out", o.out, "Output directory");

    auto* sw = app.add_subcommand("sweep", "Independence study over the scenario's grid");
    common(sw);
    sw->add_option("--seed", o.seed, "RNG seed")->required();
    sw->add_option("--out", o.out, "Output directory")->required();

    auto* sim = app.add_subcommand("simulate", "Closed-loop two-robot simulation");
    common(sim);
    sim->add_option("--traj1", o.traj1, "Robot 1 trajectory JSON");
    sim->add_option("--traj2", o.traj2, "Robot 2 trajectory JSON");
    sim->add_option("--seed", o.seed, "RNG seed")->required();
    sim->add_option("--out", o.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*field) return cmd_field(o);
        if (*solve_cmd) return cmd_solve(o);
        if (*xt) return cmd_crosstalk(o);
        if (*sw) return cmd_sweep(o);
        if (*sim) return cmd_simulate(o);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
