#pragma once

// Planar closed-loop simulation of two magnetic robots: trajectory
// sampling, pose PID at the control rate, EPM pose solves, and rigid-body
// integration under the true dipole wrench.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "magbot/actuation.hpp"
#include "magbot/crosstalk.hpp"
#include "magbot/magnetics.hpp"

namespace magbot {

/// Wrap to (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::remainder(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    return a;
}

/// Shortest signed arc from `from` to `to`.
inline double angle_diff(double to, double from) { return wrap_angle(to - from); }

struct PlanarPose {
    double x = 0.0, y = 0.0, psi = 0.0;
};

/// Force in the plane and torque about the plane normal, global frame.
struct PlanarWrench {
    double fx = 0.0, fy = 0.0, tau = 0.0;
};

struct RobotState {
    double x = 0.0, y = 0.0, psi = 0.0;
    double vx = 0.0, vy = 0.0, omega = 0.0;

    PlanarPose pose() const { return {x, y, psi}; }
};

struct RobotParams {
    double mass = 0.008;               // kg
    double yaw_inertia = 5e-8;         // kg m^2
    double linear_damping = 0.5;       // N s/m
    double angular_damping = 1e-4;     // N m s/rad
    CylMagnet ipm{0.005, 0.005, 1.45};
};

/// Embedded magnet of a robot: at its planar position, magnetized along its heading.
inline Dipole<double> ipm_of(const RobotState& s, double moment_norm) {
    return {{s.x, s.y, 0.0}, {moment_norm * std::cos(s.psi), moment_norm * std::sin(s.psi), 0.0}};
}

struct Waypoint {
    double t = 0.0, x = 0.0, y = 0.0, psi = 0.0;
};

class Trajectory {
public:
    Trajectory() = default;
    explicit Trajectory(std::vector<Waypoint> wps) : wps_(std::move(wps)) {
        if (wps_.empty()) throw std::invalid_argument("trajectory has no waypoints");
        if (wps_.front().t != 0.0) throw std::invalid_argument("trajectory must start at t = 0");
        for (std::size_t i = 1; i < wps_.size(); ++i)
            if (!(wps_[i].t > wps_[i - 1].t))
                throw std::invalid_argument("trajectory times must be strictly increasing (waypoint " +
                                            std::to_string(i) + ")");
    }

    const std::vector<Waypoint>& waypoints() const { return wps_; }
    bool empty() const { return wps_.empty(); }
    double duration() const { return wps_.empty() ? 0.0 : wps_.back().t; }

private:
    std::vector<Waypoint> wps_;
};

/// Linear in position, shortest-arc linear in heading; holds the last pose.
inline PlanarPose sample_trajectory(const Trajectory& traj, double t) {
    const auto& w = traj.waypoints();
    if (w.empty()) throw std::invalid_argument("cannot sample an empty trajectory");
    if (t < 0.0) throw std::invalid_argument("trajectory sampled at negative time");
    if (t >= w.back().t) return {w.back().x, w.back().y, w.back().psi};
    const auto hi = std::upper_bound(w.begin(), w.end(), t, [](double v, const Waypoint& p) { return v < p.t; });
    const Waypoint& b = *hi;
    const Waypoint& a = *(hi - 1);
    const double s = (t - a.t) / (b.t - a.t);
    return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), wrap_angle(a.psi + s * angle_diff(b.psi, a.psi))};
}

struct ChannelGains {
    double kp = 0.0, ki = 0.0, kd = 0.0;
};

struct PidGains {
    // Held for a full control period on an overdamped plant, the loop gain
    // per tick is kp * period / damping; these keep it at 0.5.
    ChannelGains x{0.5, 0.05, 0.0};
    ChannelGains y{0.5, 0.05, 0.0};
    ChannelGains psi{1e-4, 1e-5, 0.0};
    double force_clamp = 0.5;         // N, per axis
    double torque_clamp = 0.05;       // N m
    double integral_fraction = 0.5;   // integral term limited to this share of the output clamp
};

struct PidMemory {
    std::array<double, 3> integral{};
    std::array<double, 3> prev_error{};
    bool has_prev = false;
};

/// One controller update; error is target minus state, heading by shortest arc.
inline PlanarWrench pid_step(const RobotState& state, const PlanarPose& target, const PidGains& gains, double dt,
                             PidMemory& mem) {
    if (!(dt > 0.0)) throw std::invalid_argument("PID time step must be positive");
    const std::array<double, 3> err{target.x - state.x, target.y - state.y, angle_diff(target.psi, state.psi)};
    const std::array<const ChannelGains*, 3> g{&gains.x, &gains.y, &gains.psi};
    const std::array<double, 3> clamp{gains.force_clamp, gains.force_clamp, gains.torque_clamp};
    std::array<double, 3> out{};
    for (std::size_t c = 0; c < 3; ++c) {
        mem.integral[c] += err[c] * dt;
        if (g[c]->ki > 0.0) {
            const double lim = gains.integral_fraction * clamp[c] / g[c]->ki;
            mem.integral[c] = std::clamp(mem.integral[c], -lim, lim);
        }
        const double deriv = mem.has_prev ? (err[c] - mem.prev_error[c]) / dt : 0.0;
        const double u = g[c]->kp * err[c] + g[c]->ki * mem.integral[c] + g[c]->kd * deriv;
        out[c] = std::clamp(u, -clamp[c], clamp[c]);
        mem.prev_error[c] = err[c];
    }
    mem.has_prev = true;
    return {out[0], out[1], out[2]};
}

/// Lift planar commands into the ten-component target. Out-of-plane force
/// and torque are asked to be zero.
inline WrenchStack<double> to_wrench_stack(const PlanarWrench& r1, const PlanarWrench& r2, double psi1, double psi2) {
    auto one = [](const PlanarWrench& w, double psi) {
        const Wrench6<double> g{{0.0, 0.0, w.tau}, {w.fx, w.fy, 0.0}};
        return reduce_wrench(g, Vec3<double>{std::cos(psi), std::sin(psi), 0.0});
    };
    return {one(r1, psi1), one(r2, psi2)};
}

inline PlanarWrench planar_part(const Wrench6<double>& w) { return {w.force.x, w.force.y, w.torque.z}; }

/// Semi-implicit Euler step. Damping is taken implicitly so that the stiff
/// yaw channel (tiny inertia, large damping) stays stable at the physics step.
inline RobotState integrate(const RobotState& s, const PlanarWrench& applied, const RobotParams& p, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("integration step must be positive");
    RobotState n = s;
    const double lin = 1.0 + p.linear_damping * dt / p.mass;
    const double ang = 1.0 + p.angular_damping * dt / p.yaw_inertia;
    n.vx = (s.vx + applied.fx / p.mass * dt) / lin;
    n.vy = (s.vy + applied.fy / p.mass * dt) / lin;
    n.omega = (s.omega + applied.tau / p.yaw_inertia * dt) / ang;
    n.x = s.x + n.vx * dt;
    n.y = s.y + n.vy * dt;
    n.psi = wrap_angle(s.psi + n.omega * dt);
    return n;
}

inline double kinetic_energy(const RobotState& s, const RobotParams& p) {
    return 0.5 * p.mass * (s.vx * s.vx + s.vy * s.vy) + 0.5 * p.yaw_inertia * s.omega * s.omega;
}

inline double separation(const RobotState& a, const RobotState& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// True planar wrenches on both robots from the given EPMs and, optionally,
/// each other.
inline std::array<PlanarWrench, 2> applied_wrenches(std::span<const Dipole<double>> epms,
                                                    const std::array<RobotState, 2>& s,
                                                    const std::array<RobotParams, 2>& p, bool inter_agent = true) {
    const Dipole<double> a = ipm_of(s[0], moment_from_cylinder(p[0].ipm));
    const Dipole<double> b = ipm_of(s[1], moment_from_cylinder(p[1].ipm));
    return {planar_part(wrench_on(epms, a, inter_agent ? &b : nullptr)),
            planar_part(wrench_on(epms, b, inter_agent ? &a : nullptr))};
}

struct FailureThresholds {
    double position_error = 0.05;  // m
    double residual = 0.5;         // weighted, dimensionless
    double separation = 0.01;      // m
};

struct SimConfig {
    double control_period = 0.5;  // s
    double dt_physics = 0.01;     // s
    FailureThresholds failure;
    double collision_separation = 0.005;  // m, contact is not modelled below this
    bool inter_agent = true;
    double gradient_tie_tolerance = 1e-6;  // see SolverSettings; 0 keeps the lowest residual only
};

struct SimTick {
    double t = 0.0;
    std::array<RobotState, 2> states;
    std::array<PlanarPose, 2> targets;
    WrenchStack<double> desired;
    WrenchStack<double> achieved;
    EpmPoseVector epm_poses;
    double residual = 0.0;
    bool solver_ok = true;
    bool failed = false;  // latched

    double position_error(std::size_t r) const {
        return std::hypot(states[r].x - targets[r].x, states[r].y - targets[r].y);
    }
    double angular_error(std::size_t r) const { return std::abs(angle_diff(targets[r].psi, states[r].psi)); }
};

struct SimSummary {
    double mean_pos_err_m = 0.0;
    double mean_ang_err_rad = 0.0;
    bool failed = false;
    double fail_time_s = std::numeric_limits<double>::quiet_NaN();
    double min_separation_m = std::numeric_limits<double>::infinity();
    std::string end_reason;
};

struct SimLog {
    std::vector<SimTick> ticks;
    double min_separation = std::numeric_limits<double>::infinity();  // over every physics step
    std::string end_reason = "trajectory complete";

    SimSummary summary() const {
        SimSummary s;
        double pe = 0.0, ae = 0.0;
        for (const auto& t : ticks) {
            pe += t.position_error(0) + t.position_error(1);
            ae += t.angular_error(0) + t.angular_error(1);
            if (t.failed && !s.failed) {
                s.failed = true;
                s.fail_time_s = t.t;
            }
        }
        if (!ticks.empty()) {
            s.mean_pos_err_m = pe / (2.0 * static_cast<double>(ticks.size()));
            s.mean_ang_err_rad = ae / (2.0 * static_cast<double>(ticks.size()));
        }
        s.min_separation_m = min_separation;
        s.end_reason = end_reason;
        return s;
    }
};

/// Fires on large tracking error, an unmet wrench request, or robots about to snap together.
inline bool failure_detect(std::span<const SimTick> log, const FailureThresholds& th = {}) {
    if (log.empty()) throw std::invalid_argument("failure detection needs at least one logged tick");
    const SimTick& t = log.back();
    if (t.position_error(0) > th.position_error || t.position_error(1) > th.position_error) return true;
    if (t.residual > th.residual) return true;
    if (separation(t.states[0], t.states[1]) < th.separation) return true;
    return !t.solver_ok;
}

struct SimSetup {
    std::array<Trajectory, 2> trajectories;
    std::array<RobotParams, 2> robots;
    PidGains gains;
    std::vector<double> epm_moments;
    ConstraintSet constraints;
    SolverSettings solver;
    SimConfig config;
    std::uint64_t seed = 1;
};

/// EPMs parked at r_max, spread evenly in azimuth: the field in the centre is negligible.
inline EpmPoseVector parked_epms(std::size_t n, const ConstraintSet& cs) {
    EpmPoseVector x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, EpmPoseVector::kAzimuth) = wrap_angle(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
        x(i, EpmPoseVector::kRadius) = cs.r_max;
    }
    return x;
}

inline SimLog run_simulation(const SimSetup& sim) {
    const auto& cfg = sim.config;
    if (sim.trajectories[0].empty() || sim.trajectories[1].empty())
        throw std::invalid_argument("two non-empty trajectories are required");
    if (!(cfg.control_period > 0.0) || !(cfg.dt_physics > 0.0))
        throw std::invalid_argument("control period and physics step must be positive");
    const double duration = std::max(sim.trajectories[0].duration(), sim.trajectories[1].duration());
    const int substeps = std::max(1, static_cast<int>(std::lround(cfg.control_period / cfg.dt_physics)));
    const double dt = cfg.control_period / substeps;
    const std::array<double, 2> ipm_norm{moment_from_cylinder(sim.robots[0].ipm), moment_from_cylinder(sim.robots[1].ipm)};
    const double workspace = sim.constraints.r_min;

    std::array<RobotState, 2> state;
    for (std::size_t r = 0; r < 2; ++r) {
        const auto p = sample_trajectory(sim.trajectories[r], 0.0);
        state[r].x = p.x;
        state[r].y = p.y;
        state[r].psi = p.psi;
    }
    std::array<PidMemory, 2> memory;
    std::optional<EpmPoseVector> previous;
    SimLog log;
    log.min_separation = separation(state[0], state[1]);
    bool failed = false;

    ActuationSetup setup;
    setup.epm_moments = sim.epm_moments;
    setup.constraints = sim.constraints;
    SolverSettings solver = sim.solver;
    solver.include_inter_agent = cfg.inter_agent;
    solver.gradient_tie_tolerance = cfg.gradient_tie_tolerance;

    auto record = [&](double t, const std::array<PlanarPose, 2>& targets, const WrenchStack<double>& desired,
                      const WrenchStack<double>& achieved, const EpmPoseVector& x, double residual, bool ok) {
        SimTick tick;
        tick.t = t;
        tick.states = state;
        tick.targets = targets;
        tick.desired = desired;
        tick.achieved = achieved;
        tick.epm_poses = x;
        tick.residual = residual;
        tick.solver_ok = ok;
        log.ticks.push_back(tick);
        failed = failed || failure_detect(log.ticks, cfg.failure);
        log.ticks.back().failed = failed;
    };

    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * cfg.control_period;
        if (t > duration + 1e-9) break;

        std::array<PlanarPose, 2> targets{sample_trajectory(sim.trajectories[0], t),
                                          sample_trajectory(sim.trajectories[1], t)};
        const PlanarWrench c1 = pid_step(state[0], targets[0], sim.gains, cfg.control_period, memory[0]);
        const PlanarWrench c2 = pid_step(state[1], targets[1], sim.gains, cfg.control_period, memory[1]);
        const WrenchStack<double> desired = to_wrench_stack(c1, c2, state[0].psi, state[1].psi);

        setup.ipm1 = ipm_of(state[0], ipm_norm[0]);
        setup.ipm2 = ipm_of(state[1], ipm_norm[1]);
        solver.rng_seed = derive_seed(sim.seed, static_cast<std::uint64_t>(k));

        EpmPoseVector x;
        WrenchStack<double> achieved;
        double residual = 0.0;
        bool ok = true;
        try {
            const SolveResult r = solve(desired, setup, solver, previous ? &*previous : nullptr);
            x = r.x_best;
            achieved = r.achieved;
            residual = r.residual;
            previous = x;
        } catch (const InfeasibleError&) {
            ok = false;
            x = parked_epms(sim.epm_moments.size(), sim.constraints);
            achieved = achieved_wrench(x, setup, cfg.inter_agent);
            residual = objective(x, desired, setup, solver);
            previous.reset();
        }
        record(t, targets, desired, achieved, x, residual, ok);
        if (t + 1e-9 >= duration) break;

        const auto epms = unpack(x, sim.epm_moments);
        bool stop = false;
        for (int sub = 0; sub < substeps && !stop; ++sub) {
            const auto w = applied_wrenches(epms, state, sim.robots, cfg.inter_agent);
            for (std::size_t r = 0; r < 2; ++r) state[r] = integrate(state[r], w[r], sim.robots[r], dt);
            const double sep = separation(state[0], state[1]);
            log.min_separation = std::min(log.min_separation, sep);
            const double t_sub = t + dt * (sub + 1);
            if (sep < cfg.failure.separation && !failed) {
                // Robots can close in well inside one control period; log the moment.
                const std::array<PlanarPose, 2> tg{sample_trajectory(sim.trajectories[0], t_sub),
                                                   sample_trajectory(sim.trajectories[1], t_sub)};
                record(t_sub, tg, desired, achieved, x, residual, ok);
            }
            if (sep < cfg.collision_separation) {
                log.end_reason = "robots collided";
                stop = true;
            } else if (std::hypot(state[0].x, state[0].y) > workspace || std::hypot(state[1].x, state[1].y) > workspace) {
                log.end_reason = "robot left the workspace";
                stop = true;
            }
            if (stop && log.ticks.back().t < t_sub) {
                const std::array<PlanarPose, 2> tg{sample_trajectory(sim.trajectories[0], t_sub),
                                                   sample_trajectory(sim.trajectories[1], t_sub)};
                record(t_sub, tg, desired, achieved, x, residual, ok);
            }
        }
        if (stop) break;
    }
    return log;
}

}  // namespace magbot
