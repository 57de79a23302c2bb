#pragma once

// Augmented-Lagrangian treatment of inequality constraints c(x) <= 0 on
// top of the bound-constrained quasi-Newton inner solver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "magbot/box_qn.hpp"

namespace magbot::opt {

struct AugLagOptions {
    int max_outer = 30;
    double feas_tol = 1e-9;  // on the constraint values as returned by the callback
    double rho0 = 10.0;
    double rho_growth = 10.0;
    double rho_max = 1e12;
    BoxQnOptions inner;
};

struct AugLagResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    double max_violation = std::numeric_limits<double>::infinity();
    std::vector<double> multipliers;
    int outer_iterations = 0;
    int inner_iterations = 0;
    bool converged = false;
};

/// `obj(x, grad)` returns f and writes grad. `cons(x, values, jac)` writes m
/// constraint values and, when `jac` is non-empty, the m x n row-major Jacobian.
template <class Obj, class Cons>
AugLagResult minimize_auglag(Obj&& obj, Cons&& cons, std::size_t m, std::vector<double> x0,
                             std::span<const double> lo, std::span<const double> hi, const AugLagOptions& opt = {}) {
    const std::size_t n = x0.size();
    AugLagResult res;
    std::vector<double> grad(n);

    if (m == 0) {
        auto inner = minimize_box(obj, std::move(x0), lo, hi, opt.inner);
        res.x = std::move(inner.x);
        res.f = inner.f;
        res.max_violation = 0.0;
        res.inner_iterations = inner.iterations;
        res.converged = inner.converged;
        return res;
    }

    std::vector<double> lambda(m, 0.0), c(m), jac(m * n);
    double rho = opt.rho0;

    auto merit = [&](std::span<const double> x, std::span<double> g) -> double {
        const double f = obj(x, g);
        if (!std::isfinite(f)) return f;
        cons(x, std::span<double>(c), std::span<double>(jac));
        double val = f;
        for (std::size_t k = 0; k < m; ++k) {
            if (!std::isfinite(c[k])) return std::numeric_limits<double>::infinity();
            const double shifted = std::max(0.0, c[k] + lambda[k] / rho);
            val += 0.5 * rho * (shifted * shifted - (lambda[k] / rho) * (lambda[k] / rho));
            if (shifted > 0.0)
                for (std::size_t i = 0; i < n; ++i) g[i] += rho * shifted * jac[k * n + i];
        }
        return val;
    };

    res.x = std::move(x0);
    double prev_violation = std::numeric_limits<double>::infinity();
    for (res.outer_iterations = 0; res.outer_iterations < opt.max_outer; ++res.outer_iterations) {
        auto inner = minimize_box(merit, res.x, lo, hi, opt.inner);
        res.inner_iterations += inner.iterations;
        res.x = std::move(inner.x);

        cons(std::span<const double>(res.x), std::span<double>(c), std::span<double>());
        double violation = 0.0, complementarity = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            violation = std::max(violation, c[k]);
            lambda[k] = std::max(0.0, lambda[k] + rho * c[k]);
            complementarity = std::max(complementarity, std::abs(std::min(-c[k], lambda[k])));
        }
        res.max_violation = violation;
        if (violation <= opt.feas_tol && complementarity <= opt.feas_tol) {
            res.converged = inner.converged;
            break;
        }
        if (violation > 0.25 * prev_violation) rho = std::min(opt.rho_max, rho * opt.rho_growth);
        prev_violation = violation;
    }
    res.f = obj(std::span<const double>(res.x), std::span<double>(grad));
    res.multipliers = lambda;
    return res;
}

}  // namespace magbot::opt
