// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion is red. Tolerances are fixed here, not configurable.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "magbot/magbot.hpp"

using namespace magbot;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;
    void check(bool ok, const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "FAILED ") + what;
        pass = pass && ok;
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string pct(double fraction) { return std::isfinite(fraction) ? fmt("%.2f%%", 100.0 * fraction) : "n/a"; }

Vec3<double> random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    for (;;) {
        Vec3<double> v{n(rng), n(rng), n(rng)};
        if (norm(v) > 1e-6) return v / norm(v);
    }
}

std::pair<Dipole<double>, Vec3<double>> random_pair(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(-0.3, 0.3), sep(0.05, 0.5), mag(0.01, 1000.0);
    Dipole<double> d{{pos(rng), pos(rng), pos(rng)}, mag(rng) * random_unit(rng)};
    return {d, d.position + sep(rng) * random_unit(rng)};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

Outcome criterion_magnetics() {
    const auto t0 = Clock::now();
    Outcome o;
    std::mt19937_64 rng(2024);
    double worst_fd = 0, worst_sym = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto [d, p] = random_pair(rng);
        const auto g = dipole_gradient(d, p);
        double scale = 0;
        for (double v : g.a) scale = std::max(scale, std::abs(v));
        for (int j = 0; j < 3; ++j) {
            Vec3<double> e;
            e[j] = 1e-6;
            const auto fd = (dipole_field(d, p + e) - dipole_field(d, p - e)) / 2e-6;
            for (int i = 0; i < 3; ++i) worst_fd = std::max(worst_fd, std::abs(fd[i] - g(i, j)) / scale);
        }
        const double fro = norm(g);
        worst_sym = std::max(worst_sym, std::abs(g.trace()) / fro);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) worst_sym = std::max(worst_sym, std::abs(g(i, j) - g(j, i)) / fro);
    }
    const Dipole<double> unit{{0, 0, 0}, {1, 0, 0}};
    const double axial = rel(dipole_field(unit, {0.1, 0, 0}).x, 2.0e-4);
    const double equatorial = rel(dipole_field(unit, {0, 0.1, 0}).x, -1.0e-4);
    const double secs = seconds_since(t0);
    o.check(worst_fd < 1e-5, "FD gradient max rel err " + fmt("%.2e", worst_fd) + " over 1000 pairs (< 1e-5)");
    o.check(worst_sym <= 1e-12, "symmetry/trace " + fmt("%.2e", worst_sym) + " (<= 1e-12)");
    o.check(axial <= 1e-12 && equatorial <= 1e-12,
            "closed forms rel err " + fmt("%.1e", std::max(axial, equatorial)) + " (<= 1e-12)");
    o.check(secs < 10, fmt("%.2f s", secs) + " (< 10 s)");
    return o;
}

ActuationSetup single_robot_setup() {
    ActuationSetup s;
    s.ipm1 = {{0.0, -0.145, 0.0}, {moment_from_cylinder({0.005, 0.005, 1.45}), 0.0, 0.0}};
    s.has_ipm2 = false;
    s.epm_moments = {moment_from_cylinder({0.1, 0.1, 1.45})};
    return s;
}

std::string solve_csv(const std::vector<SolveResult>& results) {
    std::string out = "dof,residual,u1,u2,u3,u4,u5\n";
    char buf[64];
    for (std::size_t i = 0; i < results.size(); ++i) {
        out += std::to_string(i + 1);
        std::snprintf(buf, sizeof buf, ",%.10g", results[i].residual);
        out += buf;
        for (std::size_t c = 0; c < 5; ++c) {
            std::snprintf(buf, sizeof buf, ",%.10g", results[i].achieved[c]);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

std::vector<SolveResult> run_controllability() {
    const auto setup = single_robot_setup();
    SolverSettings st;
    st.max_restarts = 10;
    st.rng_seed = 1;
    std::vector<SolveResult> out;
    for (int dof = 1; dof <= 5; ++dof) out.push_back(solve(unit_target(dof), setup, st));
    return out;
}

Outcome criterion_controllability(std::string& csv) {
    const auto t0 = Clock::now();
    const auto results = run_controllability();
    const double secs = seconds_since(t0);
    csv = solve_csv(results);
    Outcome o;
    double worst = 0;
    for (const auto& r : results) worst = std::max(worst, r.residual);
    o.check(worst < 1e-6, "worst residual over 5 unit targets " + fmt("%.2e", worst) + " (< 1e-6, M = 10)");
    o.check(secs < 60, fmt("%.1f s", secs) + " (< 60 s)");
    // Informational: how often M = 10 suffices across other seeds.
    int solved = 0;
    for (std::uint64_t seed = 2; seed <= 5; ++seed) {
        SolverSettings st;
        st.max_restarts = 10;
        st.rng_seed = seed;
        bool all = true;
        for (int dof = 1; dof <= 5; ++dof) all = all && solve(unit_target(dof), single_robot_setup(), st).residual < 1e-6;
        solved += all;
    }
    o.note("seeds 2..5 solving all targets with M = 10: " + std::to_string(solved) + " of 4");
    return o;
}

struct Cell {
    double d, theta_deg;
    int n;
    bool operator<(const Cell& c) const { return std::tie(d, theta_deg, n) < std::tie(c.d, c.theta_deg, c.n); }
};

std::map<Cell, CrosstalkReport> run_cells(const std::vector<Cell>& cells) {
    StudyConfig cfg;
    cfg.solver.rng_seed = 1;
    std::map<Cell, CrosstalkReport> out;
    for (const auto& c : cells)
        out[c] = independence_study({c.d, c.theta_deg * std::numbers::pi / 180.0}, c.n, cfg).second;
    return out;
}

std::string cells_csv(const std::map<Cell, CrosstalkReport>& cells) {
    std::vector<CrosstalkReport> v;
    for (const auto& [k, r] : cells) v.push_back(r);
    return crosstalk_csv(v);
}

std::string describe(const CrosstalkReport& r) {
    return "mean " + pct(r.mean) + " over " + std::to_string(10 - r.n_infeasible) + " accepted DOFs, all-DOF mean " +
           pct(r.mean_all);
}

const std::vector<Cell> kCells = {{0.15, 90, 2}, {0.15, 0, 2}, {0.15, 0, 3}, {0.05, 0, 2},
                                  {0.05, 90, 2}, {0.10, 90, 2}, {0.15, 45, 2}};

Outcome criterion_crosstalk(const std::map<Cell, CrosstalkReport>& cells, double secs) {
    Outcome o;
    auto mean_ok = [](const CrosstalkReport& r, double lim) { return std::isfinite(r.mean) && r.mean <= lim; };
    const auto& a = cells.at({0.15, 90, 2});
    o.check(mean_ok(a, 0.10), "d=0.15 theta=90 2 EPMs: " + describe(a) + " (<= 10%)");
    const auto& b = cells.at({0.15, 0, 2});
    o.check(mean_ok(b, 0.30), "d=0.15 theta=0 2 EPMs: " + describe(b) + " (<= 30%)");
    const auto& c = cells.at({0.15, 0, 3});
    o.check(mean_ok(c, 0.05), "d=0.15 theta=0 3 EPMs: " + describe(c) + " (<= 5%)");
    const auto& d = cells.at({0.05, 0, 2});
    o.check(d.max_torque_crosstalk() >= 0.8,
            "d=0.05 theta=0 2 EPMs: max torque DOF crosstalk " + pct(d.max_torque_crosstalk()) + " (>= 80%)");
    o.check(secs < 1800, fmt("%.0f s", secs) + " (< 30 min)");
    return o;
}

// Trends compare the all-DOF mean: at d = 0.05 no activation meets tolerance,
// so the accepted-DOF mean is undefined there.
Outcome criterion_trends(const std::map<Cell, CrosstalkReport>& cells) {
    Outcome o;
    constexpr double slack = 1.10;
    auto m = [&](Cell c) { return cells.at(c).mean_all; };
    const double d05 = m({0.05, 90, 2}), d10 = m({0.10, 90, 2}), d15 = m({0.15, 90, 2});
    o.check(d10 <= slack * d05 && d15 <= slack * d10,
            "theta=90 over d=0.05/0.10/0.15: " + pct(d05) + " / " + pct(d10) + " / " + pct(d15) + " non-increasing (each step within 10% slack)");
    const double t90 = m({0.15, 90, 2}), t45 = m({0.15, 45, 2}), t0 = m({0.15, 0, 2});
    o.check(t90 <= slack * t45 && t45 <= slack * t0,
            "d=0.15 theta=90/45/0: " + pct(t90) + " / " + pct(t45) + " / " + pct(t0) + " non-decreasing in coupling (each step within 10% slack)");
    const double n3 = m({0.15, 0, 3}), n2 = m({0.15, 0, 2});
    o.check(n3 <= slack * n2, "d=0.15 theta=0 3 vs 2 EPMs: " + pct(n3) + " vs " + pct(n2) +
                                     (n3 <= n2 ? " (lower)" : n3 <= slack * n2 ? " (higher, within 10% slack)" : " (higher)"));
    return o;
}

SimLog run_shipped(const std::string& name, std::uint64_t seed) {
    const auto s = load_scenario(std::string(MAGBOT_DATA_DIR) + "/scenarios/" + name);
    return run_simulation(make_sim_setup(s, load_trajectory(s.trajectories[0]), load_trajectory(s.trajectories[1]), seed));
}

Outcome criterion_simulation(const SimLog& s60, double secs60, const SimLog& s30, double secs30) {
    Outcome o;
    const auto a = s60.summary();
    o.check(!a.failed && a.mean_pos_err_m < 0.02 && a.mean_ang_err_rad < 30.0 * std::numbers::pi / 180.0,
            std::string("s=60 mm: failed ") + (a.failed ? "true" : "false") + ", mean pos err " +
                fmt("%.2f mm", 1e3 * a.mean_pos_err_m) + " (< 20), mean ang err " +
                fmt("%.2f deg", a.mean_ang_err_rad * 180.0 / std::numbers::pi) + " (< 30)");
    const auto b = s30.summary();
    double sep_at_fail = std::numeric_limits<double>::infinity();
    for (const auto& t : s30.ticks)
        if (t.failed) {
            sep_at_fail = separation(t.states[0], t.states[1]);
            break;
        }
    o.check(b.failed && sep_at_fail < 0.04,
            std::string("s=30 mm: failed ") + (b.failed ? "true" : "false") + " at t = " + fmt("%.2f s", b.fail_time_s) +
                ", separation then " + fmt("%.1f mm", 1e3 * sep_at_fail) + " (< 40)");
    o.check(secs60 < 600 && secs30 < 600, fmt("%.0f s", secs60) + " / " + fmt("%.0f s", secs30) + " per run (< 10 min)");
    return o;
}

Outcome criterion_properties() {
    Outcome o;
    std::mt19937_64 rng(77);
    int bad = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto [a, p] = random_pair(rng);
        const Dipole<double> b{p, 300.0 * random_unit(rng)};
        const auto f = dipole_force_between(a, b), g = dipole_force_between(b, a);
        for (int i = 0; i < 3; ++i) bad += std::abs(f[i] + g[i]) > 1e-12 * norm(f);
    }
    o.check(bad == 0, "Newton's third law, 1000 pairs");

    bad = 0;
    for (int k = 0; k < 200; ++k) {
        const auto [d, p] = random_pair(rng);
        std::uniform_real_distribution<double> ang(-3.14, 3.14);
        const auto R = axis_angle(random_unit(rng), ang(rng));
        const Vec3<double> m = 0.1133 * random_unit(rng);
        const Dipole<double> rd{R * d.position, R * d.moment};
        const auto w = wrench_global(m, dipole_field(d, p), dipole_gradient(d, p));
        const auto rw = wrench_global(R * m, dipole_field(rd, R * p), dipole_gradient(rd, R * p));
        const auto b = dipole_field(d, p), rb = dipole_field(rd, R * p);
        for (int i = 0; i < 3; ++i) {
            bad += std::abs(rb[i] - (R * b)[i]) > 1e-12 * norm(b);
            bad += std::abs(rw.torque[i] - (R * w.torque)[i]) > 1e-12 * norm(w.torque);
            bad += std::abs(rw.force[i] - (R * w.force)[i]) > 1e-12 * norm(w.force);
        }
    }
    o.check(bad == 0, "rotation equivariance of field and wrench, 200 rotations");

    bad = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto [d, p] = random_pair(rng);
        const Vec3<double> m = 0.1133 * random_unit(rng);
        const auto w = wrench_global(m, dipole_field(d, p), dipole_gradient(d, p));
        bad += std::abs(dot(w.torque, m)) > 1e-13 * norm(w.torque) * norm(m);
    }
    o.check(bad == 0, "torque . m = 0, 1000 cases");

    bad = 0;
    std::uniform_real_distribution<double> sc(0.01, 10.0);
    for (int k = 0; k < 200; ++k) {
        const ActivationScale s{sc(rng), sc(rng)};
        bad += crosstalk(unit_target(1 + k % 10, s), 1 + k % 10, s) != 0.0;
    }
    o.check(bad == 0, "crosstalk of unit target = 0, 200 scalings");

    bad = 0;
    std::uniform_real_distribution<double> e(-10, 10), gain(0, 100);
    for (int k = 0; k < 200; ++k) {
        PidGains g;
        g.x = g.y = {gain(rng), gain(rng), gain(rng)};
        g.psi = {gain(rng), gain(rng), gain(rng)};
        PidMemory mem;
        for (int s = 0; s < 10; ++s) {
            RobotState st;
            st.x = e(rng);
            st.y = e(rng);
            const auto w = pid_step(st, PlanarPose{e(rng), e(rng), wrap_angle(e(rng))}, g, 0.5, mem);
            bad += std::abs(w.fx) > g.force_clamp || std::abs(w.fy) > g.force_clamp || std::abs(w.tau) > g.torque_clamp;
        }
    }
    o.check(bad == 0, "PID output clamping, 200 gain sets x 10 steps");
    return o;
}

}  // namespace

int main() {
    std::vector<std::pair<int, Outcome>> results;
    auto report = [&](int id, const char* name, Outcome o) {
        std::printf("criterion %d %s: %s (%s)\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        results.emplace_back(id, std::move(o));
    };

    try {
        report(1, "magnetics oracles", criterion_magnetics());

        std::string solve_a;
        report(2, "single-robot controllability", criterion_controllability(solve_a));

        auto t0 = Clock::now();
        const auto cells = run_cells(kCells);
        const double xt_secs = seconds_since(t0);
        report(3, "crosstalk reproduction", criterion_crosstalk(cells, xt_secs));
        report(4, "crosstalk trends", criterion_trends(cells));

        t0 = Clock::now();
        const auto s60 = run_shipped("sim_s60.json", 7);
        const double secs60 = seconds_since(t0);
        t0 = Clock::now();
        const auto s30 = run_shipped("sim_s30.json", 7);
        const double secs30 = seconds_since(t0);
        report(5, "simulation dichotomy", criterion_simulation(s60, secs60, s30, secs30));

        Outcome det;
        det.check(solve_csv(run_controllability()) == solve_a, "controllability CSV");
        det.check(cells_csv(run_cells(kCells)) == cells_csv(cells), "crosstalk CSV, 7 cells");
        det.check(simlog_csv(run_shipped("sim_s60.json", 7)) == simlog_csv(s60), "s=60 mm simulation CSV");
        det.check(simlog_csv(run_shipped("sim_s30.json", 7)) == simlog_csv(s30), "s=30 mm simulation CSV");
        report(6, "determinism", det);

        report(7, "property suite", criterion_properties());
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }

    int failed = 0;
    for (const auto& [id, o] : results) failed += !o.pass;
    std::printf("%d of %zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
    return failed == 0 ? 0 : 1;
}
