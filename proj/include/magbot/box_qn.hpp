#pragma once

// Projected quasi-Newton (BFGS) minimizer for smooth objectives under
// simple bounds lo <= x <= hi.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace magbot::opt {

struct BoxQnOptions {
    int max_iters = 500;
    double grad_tol = 1e-8;  // inf-norm of the projected gradient
    double step_tol = 1e-10; // inf-norm of the accepted step
    double max_step = 0.5;   // first trial step length, inf-norm
    double f_stop = -std::numeric_limits<double>::infinity();
};

struct BoxQnResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

namespace detail {

inline void project(std::span<double> x, std::span<const double> lo, std::span<const double> hi) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
}

inline double projected_gradient_norm(std::span<const double> x, std::span<const double> g,
                                      std::span<const double> lo, std::span<const double> hi) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double moved = std::clamp(x[i] - g[i], lo[i], hi[i]);
        m = std::max(m, std::abs(moved - x[i]));
    }
    return m;
}

}  // namespace detail

/// `fg(x, grad)` returns f(x) and writes its gradient; a non-finite return
/// marks x as unusable and makes the line search back off.
template <class FG>
BoxQnResult minimize_box(FG&& fg, std::vector<double> x0, std::span<const double> lo, std::span<const double> hi,
                         const BoxQnOptions& opt = {}) {
    const std::size_t n = x0.size();
    BoxQnResult res;
    res.x = std::move(x0);
    detail::project(res.x, lo, hi);

    std::vector<double> g(n), g_trial(n), x_trial(n), d(n), s(n), y(n), hy(n);
    res.f = fg(std::span<const double>(res.x), std::span<double>(g));
    if (!std::isfinite(res.f)) return res;

    // Dense inverse-Hessian approximation; n stays small (5 per magnet).
    std::vector<double> H(n * n, 0.0);
    auto reset_h = [&](double scale) {
        std::fill(H.begin(), H.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) H[i * n + i] = scale;
    };
    reset_h(1.0);
    bool h_is_identity = true;
    bool scaled_once = false;

    for (res.iterations = 0; res.iterations < opt.max_iters; ++res.iterations) {
        if (res.f <= opt.f_stop || detail::projected_gradient_norm(res.x, g, lo, hi) < opt.grad_tol) {
            res.converged = true;
            return res;
        }

        // Variables pinned at a bound with the gradient pushing outward stay fixed.
        std::vector<bool> active(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            const double span_i = hi[i] - lo[i];
            const double eps = 1e-12 * std::max(1.0, span_i);
            active[i] = (res.x[i] <= lo[i] + eps && g[i] > 0.0) || (res.x[i] >= hi[i] - eps && g[i] < 0.0);
        }

        auto compute_direction = [&] {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                if (!active[i])
                    for (std::size_t j = 0; j < n; ++j)
                        if (!active[j]) acc -= H[i * n + j] * g[j];
                d[i] = acc;
            }
        };
        compute_direction();
        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) slope += g[i] * d[i];
        if (!(slope < 0.0)) {
            reset_h(1.0);
            h_is_identity = true;
            scaled_once = false;
            compute_direction();
        }

        double dmax = 0.0;
        for (double v : d) dmax = std::max(dmax, std::abs(v));
        if (dmax == 0.0) {
            res.converged = true;
            return res;
        }
        double alpha = h_is_identity ? std::min(1.0, opt.max_step / dmax) : 1.0;
        if (!h_is_identity && dmax > 10.0 * opt.max_step) alpha = 10.0 * opt.max_step / dmax;

        bool accepted = false;
        double f_trial = 0.0;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < n; ++i) x_trial[i] = res.x[i] + alpha * d[i];
            detail::project(x_trial, lo, hi);
            double decrease = 0.0;
            for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (x_trial[i] - res.x[i]);
            f_trial = fg(std::span<const double>(x_trial), std::span<double>(g_trial));
            if (std::isfinite(f_trial) && f_trial <= res.f + 1e-4 * decrease) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            if (!h_is_identity) {
                reset_h(1.0);
                h_is_identity = true;
                scaled_once = false;
                continue;
            }
            // No descent along the steepest projected direction: stationary to working precision.
            res.converged = true;
            return res;
        }

        double smax = 0.0, sy = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_trial[i] - res.x[i];
            y[i] = g_trial[i] - g[i];
            smax = std::max(smax, std::abs(s[i]));
            sy += s[i] * y[i];
            yy += y[i] * y[i];
        }
        const double f_prev = res.f;
        res.x = x_trial;
        res.f = f_trial;
        g.swap(g_trial);

        if (smax < opt.step_tol) {
            res.converged = true;
            return res;
        }
        if (f_prev - res.f <= 1e-16 * std::max(1.0, std::abs(res.f)) && smax < 1e3 * opt.step_tol) {
            res.converged = true;
            return res;
        }

        if (sy > 1e-12 * std::sqrt(yy) * smax) {
            if (!scaled_once) {
                reset_h(sy / yy);
                scaled_once = true;
            }
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            const double rho = 1.0 / sy;
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += H[i * n + j] * y[j];
                hy[i] = acc;
            }
            double yhy = 0.0;
            for (std::size_t i = 0; i < n; ++i) yhy += y[i] * hy[i];
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    H[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
            h_is_identity = false;
        }
    }
    return res;
}

}  // namespace magbot::opt
