#pragma once

// Independence of the ten wrench DOFs: unit activations, the crosstalk
// ratio and grid sweeps over IPM separation, relative angle and EPM count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "magbot/actuation.hpp"
#include "magbot/magnetics.hpp"

namespace magbot {

/// Per-component magnitudes used both as unit targets and to normalize U.
struct ActivationScale {
    double torque = 0.05;  // N m
    double force = 0.5;    // N

    double of(std::size_t component) const { return WrenchStack<double>::is_torque(component) ? torque : force; }
};

struct IpmConfiguration {
    double separation = 0.15;  // m
    double relative_angle = 0.0;  // rad, in [0, pi/2]
};

/// IPMs on the x axis at -d/2 and +d/2; IPM 1 along x, IPM 2 rotated by
/// theta about z.
inline std::pair<Dipole<double>, Dipole<double>> build_ipm_pair(double d, double theta, double moment_norm) {
    if (!(d > 0.0)) throw std::invalid_argument("IPM separation must be positive");
    Dipole<double> a{{-0.5 * d, 0.0, 0.0}, {moment_norm, 0.0, 0.0}};
    Dipole<double> b{{0.5 * d, 0.0, 0.0}, {moment_norm * std::cos(theta), moment_norm * std::sin(theta), 0.0}};
    return {a, b};
}

/// All-zero stack with DOF `dof` (1-based) set to its activation magnitude.
inline WrenchStack<double> unit_target(int dof, const ActivationScale& scale = {}) {
    if (dof < 1 || dof > 10) throw std::out_of_range("DOF index must be in 1..10, got " + std::to_string(dof));
    WrenchStack<double> u;
    const auto i = static_cast<std::size_t>(dof - 1);
    u[i] = scale.of(i);
    return u;
}

inline std::array<double, 10> normalized(const WrenchStack<double>& u, const ActivationScale& scale = {}) {
    std::array<double, 10> out{};
    for (std::size_t i = 0; i < 10; ++i) out[i] = u[i] / scale.of(i);
    return out;
}

/// max_{j != i} |U_j| / |U_i| on the normalized stack, as a fraction.
inline double crosstalk(const WrenchStack<double>& u, int dof, const ActivationScale& scale = {}) {
    if (dof < 1 || dof > 10) throw std::out_of_range("DOF index must be in 1..10, got " + std::to_string(dof));
    const auto n = normalized(u, scale);
    const auto i = static_cast<std::size_t>(dof - 1);
    if (n[i] == 0.0) throw std::domain_error("DOF " + std::to_string(dof) + " was not activated");
    double worst = 0.0;
    for (std::size_t j = 0; j < 10; ++j)
        if (j != i) worst = std::max(worst, std::abs(n[j]));
    return worst / std::abs(n[i]);
}

using ActivationMatrix = std::array<std::array<double, 10>, 10>;

struct DofActivation {
    int dof = 0;
    double crosstalk = std::numeric_limits<double>::quiet_NaN();  // fraction
    double residual = std::numeric_limits<double>::infinity();
    bool solver_converged = false;
    bool feasible = false;  // activation accepted (residual under threshold)
    WrenchStack<double> achieved;
    EpmPoseVector x;
    std::string note;
};

struct CrosstalkReport {
    double separation = 0.0;
    double relative_angle = 0.0;
    int n_epms = 0;
    std::vector<DofActivation> dofs;
    double mean = std::numeric_limits<double>::quiet_NaN();      // over accepted activations
    double mean_all = std::numeric_limits<double>::quiet_NaN();  // over every DOF with a defined ratio
    int n_infeasible = 0;
    bool warning = false;

    double max_torque_crosstalk() const {
        double m = 0.0;
        for (const auto& d : dofs)
            if (WrenchStack<double>::is_torque(static_cast<std::size_t>(d.dof - 1)) && std::isfinite(d.crosstalk))
                m = std::max(m, d.crosstalk);
        return m;
    }
};

/// Physical inputs shared by every cell of a study.
struct StudyConfig {
    CylMagnet ipm{0.005, 0.005, 1.45};
    CylMagnet epm_reference{0.1, 0.1, 1.45};
    int epm_reference_count = 2;  // total EPM volume = this many reference magnets
    ConstraintSet constraints;
    SolverSettings solver;
    ActivationScale scale;
    double infeasible_residual = 0.1;  // 10% of the unit weighted target
    bool parallel = true;
};

/// Splitmix-style hash giving each DOF solve its own reproducible stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline ActuationSetup make_setup(const IpmConfiguration& cfg, int n_epms, const StudyConfig& study) {
    ActuationSetup s;
    const auto [a, b] = build_ipm_pair(cfg.separation, cfg.relative_angle, moment_from_cylinder(study.ipm));
    s.ipm1 = a;
    s.ipm2 = b;
    for (const auto& mag : split_cylinder_volume(study.epm_reference, study.epm_reference_count, n_epms))
        s.epm_moments.push_back(moment_from_cylinder(mag));
    s.constraints = study.constraints;
    return s;
}

inline std::pair<ActivationMatrix, CrosstalkReport> independence_study(const IpmConfiguration& cfg, int n_epms,
                                                                       const StudyConfig& study) {
    if (!(cfg.separation > 0.0)) throw std::invalid_argument("separation must be positive");
    if (n_epms < 1) throw std::invalid_argument("n_epms must be >= 1");
    const ActuationSetup setup = make_setup(cfg, n_epms, study);

    auto run_dof = [&](int dof) {
        DofActivation act;
        act.dof = dof;
        SolverSettings s = study.solver;
        s.rng_seed = derive_seed(study.solver.rng_seed, static_cast<std::uint64_t>(dof));
        try {
            const auto r = solve(unit_target(dof, study.scale), setup, s);
            act.residual = r.residual;
            act.solver_converged = r.converged;
            act.achieved = r.achieved;
            act.x = r.x_best;
            act.feasible = r.residual <= study.infeasible_residual;
            try {
                act.crosstalk = crosstalk(r.achieved, dof, study.scale);
            } catch (const std::domain_error& e) {
                act.feasible = false;
                act.note = e.what();
            }
            if (!act.feasible && act.note.empty()) act.note = "residual above acceptance threshold";
        } catch (const InfeasibleError& e) {
            act.note = e.what();
        }
        return act;
    };

    CrosstalkReport report;
    report.separation = cfg.separation;
    report.relative_angle = cfg.relative_angle;
    report.n_epms = n_epms;
    if (study.parallel) {
        std::vector<std::future<DofActivation>> jobs;
        for (int dof = 1; dof <= 10; ++dof) jobs.push_back(std::async(std::launch::async, run_dof, dof));
        for (auto& j : jobs) report.dofs.push_back(j.get());
    } else {
        for (int dof = 1; dof <= 10; ++dof) report.dofs.push_back(run_dof(dof));
    }

    ActivationMatrix matrix{};
    double sum = 0.0, sum_all = 0.0;
    int n_ok = 0, n_all = 0;
    for (const auto& a : report.dofs) {
        const auto row = static_cast<std::size_t>(a.dof - 1);
        const auto n = normalized(a.achieved, study.scale);
        for (std::size_t j = 0; j < 10; ++j)
            matrix[row][j] = n[row] != 0.0 ? n[j] / n[row] : 0.0;
        if (std::isfinite(a.crosstalk)) {
            sum_all += a.crosstalk;
            ++n_all;
        }
        if (a.feasible) {
            sum += a.crosstalk;
            ++n_ok;
        } else {
            ++report.n_infeasible;
        }
    }
    if (n_ok > 0) report.mean = sum / n_ok;
    if (n_all > 0) report.mean_all = sum_all / n_all;
    report.warning = report.n_infeasible > 0;
    return {matrix, report};
}

struct SweepGrid {
    std::vector<double> separations;  // m
    std::vector<double> angles;       // rad
    std::vector<int> n_epms;
};

/// One report per grid point, ordered by n_epms, then angle, then separation.
inline std::vector<CrosstalkReport> sweep(const SweepGrid& grid, const StudyConfig& study) {
    if (grid.separations.empty() || grid.angles.empty() || grid.n_epms.empty())
        throw std::invalid_argument("sweep grid axes must be non-empty");
    std::vector<CrosstalkReport> out;
    for (int n : grid.n_epms)
        for (double th : grid.angles)
            for (double d : grid.separations) {
                try {
                    out.push_back(independence_study({d, th}, n, study).second);
                } catch (const std::exception& e) {
                    CrosstalkReport failed;
                    failed.separation = d;
                    failed.relative_angle = th;
                    failed.n_epms = n;
                    failed.warning = true;
                    DofActivation note;
                    note.note = e.what();
                    failed.dofs.push_back(note);
                    out.push_back(std::move(failed));
                }
            }
    return out;
}

}  // namespace magbot
