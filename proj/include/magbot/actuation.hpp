#pragma once

// Inverse problem: EPM poses that reproduce a desired stacked wrench on the
// two embedded magnets, subject to a radial box and EPM-EPM constraints.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "magbot/augmented_lagrangian.hpp"
#include "magbot/jet.hpp"
#include "magbot/magnetics.hpp"
#include "magbot/pose.hpp"

namespace magbot {

class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConstraintSet {
    double r_min = 0.15;                  // m, from the workspace centre
    double r_max = 0.5;                   // m
    double f_attract_max = 10.0 * kGravity;  // N, per EPM pair
    double epm_min_gap = 0.25;            // m, centre to centre
};

struct SolverSettings {
    int max_restarts = 10;
    int max_iters = 500;
    double grad_tol = 1e-8;
    double step_tol = 1e-10;
    double weight_torque = 1.0 / 0.05;  // 1/(N m)
    double weight_force = 1.0 / 0.5;    // 1/N
    std::uint64_t rng_seed = 1;
    bool include_inter_agent = true;
    int max_start_attempts = 1000;
    double stop_residual = 1e-14;  // remaining restarts are skipped below this
    // When > 0, restarts within this residual of the best compete on the
    // field gradient at the IPMs instead (lower is kept).
    double gradient_tie_tolerance = 0.0;
};

/// Everything the optimizer needs to know about the physical setup.
struct ActuationSetup {
    Dipole<double> ipm1;
    Dipole<double> ipm2;
    std::vector<double> epm_moments;  // A m^2, one per EPM
    ConstraintSet constraints;
    bool has_ipm2 = true;  // false: single robot, the second half of U stays zero
};

/// U(x) for the setup; with one robot only w1 is populated.
template <class T>
WrenchStack<T> setup_wrench_stack(std::span<const Dipole<T>> epms, const ActuationSetup& setup, bool inter_agent) {
    if (setup.has_ipm2) return wrench_stack<T>(epms, setup.ipm1, setup.ipm2, inter_agent);
    WrenchStack<T> u;
    u.w1 = reduce_wrench(wrench_on(epms, setup.ipm1, nullptr), setup.ipm1.moment);
    return u;
}

struct SolveResult {
    EpmPoseVector x_best;
    double residual = std::numeric_limits<double>::infinity();
    WrenchStack<double> achieved;
    int restarts_used = 0;
    bool converged = false;
};

inline double component_weight(std::size_t i, const SolverSettings& s) {
    return WrenchStack<double>::is_torque(i) ? s.weight_torque : s.weight_force;
}

inline WrenchStack<double> achieved_wrench(const EpmPoseVector& x, const ActuationSetup& setup, bool inter_agent) {
    const auto epms = unpack(x, setup.epm_moments);
    return setup_wrench_stack<double>(epms, setup, inter_agent);
}

/// Weighted squared wrench error ||W (U_d - U(x))||^2.
inline double objective(const EpmPoseVector& x, const WrenchStack<double>& target, const ActuationSetup& setup,
                        const SolverSettings& settings) {
    const auto u = achieved_wrench(x, setup, settings.include_inter_agent);
    double f = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
        const double e = component_weight(i, settings) * (target[i] - u[i]);
        f += e * e;
    }
    return f;
}

/// Objective and its exact gradient. Each EPM enters U additively, so the
/// gradient is assembled one magnet at a time with 5-direction jets.
inline double objective_and_gradient(std::span<const double> x, const WrenchStack<double>& target,
                                     const ActuationSetup& setup, const SolverSettings& settings,
                                     std::span<double> grad) {
    using J = Jet<5>;
    const std::size_t n = setup.epm_moments.size();
    std::vector<Dipole<J>> epms(n);
    std::vector<std::array<J, 5>> params(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < 5; ++k) params[i][k] = J(x[5 * i + k]);

    double f = 0.0;
    for (std::size_t active = 0; active < n; ++active) {
        for (std::size_t i = 0; i < n; ++i) {
            std::array<J, 5> p = params[i];
            if (i == active)
                for (std::size_t k = 0; k < 5; ++k) p[k] = J(x[5 * i + k], k);
            epms[i] = unpack_one<J>(std::span<const J>(p), setup.epm_moments[i]);
        }
        const auto u = setup_wrench_stack<J>(epms, setup, settings.include_inter_agent);
        double fa = 0.0;
        std::array<double, 5> g{};
        for (std::size_t c = 0; c < 10; ++c) {
            const double w = component_weight(c, settings);
            const double e = w * (target[c] - u[c].a);
            fa += e * e;
            for (std::size_t k = 0; k < 5; ++k) g[k] += -2.0 * w * e * u[c].v[k];
        }
        f = fa;
        for (std::size_t k = 0; k < 5; ++k) grad[5 * active + k] = g[k];
    }
    if (n == 0) f = objective(EpmPoseVector(0), target, setup, settings);
    return f;
}

namespace detail {

template <class T>
void pair_constraints(const Dipole<T>& a, const Dipole<T>& b, const ConstraintSet& cs, T& force_c, T& gap_c) {
    const T dist = norm(b.position - a.position);
    gap_c = T(cs.epm_min_gap) - dist;
    if (value_of(dist) < kMinSeparation) {
        force_c = T(std::numeric_limits<double>::infinity());
        return;
    }
    force_c = norm(dipole_force_between(a, b)) - T(cs.f_attract_max);
}

}  // namespace detail

/// Per EPM pair: (|F_ab| - f_max, gap - |p_a - p_b|); feasible when <= 0.
/// Coincident EPMs report +inf for the force entry.
inline std::vector<double> attraction_constraints(const EpmPoseVector& x, std::span<const double> moment_norms,
                                                  const ConstraintSet& cs) {
    const auto epms = unpack(x, moment_norms);
    std::vector<double> out;
    for (std::size_t i = 0; i < epms.size(); ++i)
        for (std::size_t j = i + 1; j < epms.size(); ++j) {
            double fc = 0.0, gc = 0.0;
            detail::pair_constraints(epms[i], epms[j], cs, fc, gc);
            out.push_back(fc);
            out.push_back(gc);
        }
    return out;
}

inline bool is_feasible(const EpmPoseVector& x, std::span<const double> moment_norms, const ConstraintSet& cs,
                        double slack = 0.0) {
    for (std::size_t i = 0; i < x.n_epms(); ++i) {
        const double r = x(i, EpmPoseVector::kRadius);
        if (r < cs.r_min - slack || r > cs.r_max + slack) return false;
    }
    for (double c : attraction_constraints(x, moment_norms, cs))
        if (!(c <= slack)) return false;
    return true;
}

/// Box of the search space in the order of EpmPoseVector.
inline void pose_bounds(std::size_t n_epms, const ConstraintSet& cs, std::vector<double>& lo, std::vector<double>& hi) {
    constexpr double pi = std::numbers::pi;
    lo.clear();
    hi.clear();
    for (std::size_t i = 0; i < n_epms; ++i) {
        lo.insert(lo.end(), {-pi, -pi / 2, cs.r_min, -pi, -pi / 2});
        hi.insert(hi.end(), {pi, pi / 2, cs.r_max, pi, pi / 2});
    }
}

/// Uniform rejection sampling inside the box until the pair constraints hold.
template <class Rng>
std::optional<EpmPoseVector> sample_feasible_start(Rng& rng, const ActuationSetup& setup, int max_attempts) {
    std::vector<double> lo, hi;
    pose_bounds(setup.epm_moments.size(), setup.constraints, lo, hi);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        EpmPoseVector x(setup.epm_moments.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
        if (is_feasible(x, setup.epm_moments, setup.constraints)) return x;
    }
    return std::nullopt;
}

namespace detail {

// Radius is optimized in decimetres so every coordinate has a comparable scale.
inline double var_scale(std::size_t i) { return i % 5 == EpmPoseVector::kRadius ? 0.1 : 1.0; }

struct LocalResult {
    EpmPoseVector x;
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
};

inline LocalResult local_solve(const EpmPoseVector& start, const WrenchStack<double>& target,
                               const ActuationSetup& setup, const SolverSettings& settings) {
    const std::size_t nv = start.size();
    const std::size_t n_epms = start.n_epms();
    const auto& cs = setup.constraints;

    std::vector<double> lo, hi;
    pose_bounds(n_epms, cs, lo, hi);
    std::vector<double> z0(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        lo[i] /= var_scale(i);
        hi[i] /= var_scale(i);
        z0[i] = start[i] / var_scale(i);
    }

    std::vector<double> xbuf(nv);
    auto to_x = [&](std::span<const double> z) {
        for (std::size_t i = 0; i < nv; ++i) xbuf[i] = z[i] * var_scale(i);
    };

    auto obj = [&](std::span<const double> z, std::span<double> g) -> double {
        to_x(z);
        double f = 0.0;
        try {
            f = objective_and_gradient(xbuf, target, setup, settings, g);
        } catch (const SingularityError&) {
            return std::numeric_limits<double>::infinity();
        }
        for (std::size_t i = 0; i < nv; ++i) g[i] *= var_scale(i);
        return f;
    };

    const std::size_t n_pairs = n_epms * (n_epms - (n_epms > 0 ? 1 : 0)) / 2;
    const std::size_t m = 2 * n_pairs;
    auto cons = [&](std::span<const double> z, std::span<double> c, std::span<double> jac) {
        to_x(z);
        using J = Jet<10>;
        std::fill(jac.begin(), jac.end(), 0.0);
        std::size_t row = 0;
        for (std::size_t i = 0; i < n_epms; ++i)
            for (std::size_t j = i + 1; j < n_epms; ++j, row += 2) {
                std::array<J, 5> pi, pj;
                for (std::size_t k = 0; k < 5; ++k) {
                    pi[k] = J(xbuf[5 * i + k], k);
                    pj[k] = J(xbuf[5 * j + k], 5 + k);
                }
                const auto a = unpack_one<J>(std::span<const J>(pi), setup.epm_moments[i]);
                const auto b = unpack_one<J>(std::span<const J>(pj), setup.epm_moments[j]);
                J fc, gc;
                pair_constraints(a, b, cs, fc, gc);
                // Scaled to O(1) so one feasibility tolerance serves both rows.
                c[row] = fc.a / cs.f_attract_max;
                c[row + 1] = gc.a / cs.epm_min_gap;
                if (!jac.empty()) {
                    for (std::size_t k = 0; k < 5; ++k) {
                        jac[row * nv + 5 * i + k] = fc.v[k] / cs.f_attract_max * var_scale(k);
                        jac[row * nv + 5 * j + k] = fc.v[5 + k] / cs.f_attract_max * var_scale(k);
                        jac[(row + 1) * nv + 5 * i + k] = gc.v[k] / cs.epm_min_gap * var_scale(k);
                        jac[(row + 1) * nv + 5 * j + k] = gc.v[5 + k] / cs.epm_min_gap * var_scale(k);
                    }
                }
            }
    };

    opt::AugLagOptions al;
    al.inner.max_iters = settings.max_iters;
    al.inner.grad_tol = settings.grad_tol;
    al.inner.step_tol = settings.step_tol;
    al.inner.f_stop = m == 0 ? settings.stop_residual : -std::numeric_limits<double>::infinity();
    al.feas_tol = 1e-10;
    auto r = opt::minimize_auglag(obj, cons, m, std::move(z0), lo, hi, al);

    LocalResult out;
    out.x = EpmPoseVector(n_epms);
    for (std::size_t i = 0; i < nv; ++i) out.x[i] = std::clamp(r.x[i] * var_scale(i), lo[i] * var_scale(i), hi[i] * var_scale(i));
    out.converged = r.converged;

    // Pull an end point that still violates a pair constraint back toward the
    // (feasible) start along the segment joining them.
    if (!is_feasible(out.x, setup.epm_moments, cs, 1e-6)) {
        out.converged = false;
        double t_ok = 0.0, t_bad = 1.0;
        EpmPoseVector trial(n_epms);
        for (int it = 0; it < 60; ++it) {
            const double t = 0.5 * (t_ok + t_bad);
            for (std::size_t i = 0; i < nv; ++i) trial[i] = start[i] + t * (out.x[i] - start[i]);
            (is_feasible(trial, setup.epm_moments, cs) ? t_ok : t_bad) = t;
        }
        for (std::size_t i = 0; i < nv; ++i) trial[i] = start[i] + t_ok * (out.x[i] - start[i]);
        out.x = trial;
    }
    out.residual = objective(out.x, target, setup, settings);
    return out;
}

}  // namespace detail

/// Frobenius norm of the EPM field gradient, summed over both IPMs. A steep
/// gradient means the applied wrench changes quickly as the robots move.
inline double gradient_load(const EpmPoseVector& x, const ActuationSetup& setup) {
    const auto epms = unpack(x, setup.epm_moments);
    double g = norm(gradient_at<double>(epms, setup.ipm1.position));
    if (setup.has_ipm2) g += norm(gradient_at<double>(epms, setup.ipm2.position));
    return g;
}

/// Multi-start constrained least squares. Restart 0 uses `warm_start` when
/// given and feasible; all other starts are uniform random feasible draws.
/// Start points are drawn up front from one generator, so the first k starts
/// do not depend on max_restarts.
inline SolveResult solve(const WrenchStack<double>& target, const ActuationSetup& setup,
                         const SolverSettings& settings, const EpmPoseVector* warm_start = nullptr) {
    if (settings.max_restarts < 1) throw std::invalid_argument("max_restarts must be >= 1");
    if (setup.epm_moments.empty()) throw std::invalid_argument("at least one EPM is required");

    std::mt19937_64 rng(settings.rng_seed);
    std::vector<EpmPoseVector> starts;
    for (int k = 0; k < settings.max_restarts; ++k) {
        if (k == 0 && warm_start != nullptr && warm_start->n_epms() == setup.epm_moments.size()) {
            EpmPoseVector w = *warm_start;
            std::vector<double> lo, hi;
            pose_bounds(w.n_epms(), setup.constraints, lo, hi);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::clamp(w[i], lo[i], hi[i]);
            if (is_feasible(w, setup.epm_moments, setup.constraints)) {
                starts.push_back(std::move(w));
                continue;
            }
        }
        auto s = sample_feasible_start(rng, setup, settings.max_start_attempts);
        if (!s) {
            if (starts.empty())
                throw InfeasibleError("no feasible EPM configuration found after " +
                                      std::to_string(settings.max_start_attempts) + " samples");
            break;
        }
        starts.push_back(std::move(*s));
    }

    std::vector<detail::LocalResult> results;
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        results.push_back(detail::local_solve(starts[k], target, setup, settings));
        if (results[k].residual < results[best_k].residual) best_k = k;
        if (results[best_k].residual <= settings.stop_residual) break;
    }
    if (settings.gradient_tie_tolerance > 0.0) {
        const double cutoff = results[best_k].residual + settings.gradient_tie_tolerance;
        double best_g = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < results.size(); ++k) {
            if (!(results[k].residual <= cutoff)) continue;
            const double g = gradient_load(results[k].x, setup);
            if (g < best_g) {
                best_g = g;
                best_k = k;
            }
        }
    }

    SolveResult best;
    best.restarts_used = static_cast<int>(results.size());
    best.residual = results[best_k].residual;
    best.x_best = results[best_k].x;
    best.converged = results[best_k].converged;
    best.achieved = achieved_wrench(best.x_best, setup, settings.include_inter_agent);
    return best;
}

}  // namespace magbot
