#include <gtest/gtest.h>

#include <random>

#include "magbot/actuation.hpp"
#include "magbot/crosstalk.hpp"

using namespace magbot;

namespace {

ActuationSetup pair_setup(double d = 0.15, double theta = std::numbers::pi / 2, int n_epms = 2) {
    return make_setup({d, theta}, n_epms, StudyConfig{});
}

// One robot at (0, -0.145, 0) magnetized along x, one full-size EPM.
ActuationSetup single_setup() {
    ActuationSetup s;
    s.ipm1 = {{0.0, -0.145, 0.0}, {moment_from_cylinder({0.005, 0.005, 1.45}), 0.0, 0.0}};
    s.has_ipm2 = false;
    s.epm_moments = {moment_from_cylinder({0.1, 0.1, 1.45})};
    return s;
}

EpmPoseVector random_feasible(std::mt19937_64& rng, const ActuationSetup& s) {
    return *sample_feasible_start(rng, s, 1000);
}

}  // namespace

TEST(Objective, ZeroAtOwnWrenchAndNonNegative) {
    const auto setup = pair_setup();
    const SolverSettings st;
    std::mt19937_64 rng(1);
    for (int k = 0; k < 100; ++k) {
        const auto x = random_feasible(rng, setup);
        EXPECT_EQ(objective(x, achieved_wrench(x, setup, true), setup, st), 0.0);
        EXPECT_GE(objective(x, unit_target(1 + k % 10), setup, st), 0.0);
    }
}

TEST(Objective, GradientMatchesCentralDifferences) {
    const SolverSettings st;
    std::mt19937_64 rng(2);
    int checked = 0;
    for (int n : {2, 3}) {
        const auto setup = pair_setup(0.15, 0.3, n);
        for (int k = 0; k < 50; ++k, ++checked) {
            const auto x = random_feasible(rng, setup);
            const auto target = unit_target(1 + k % 10);
            std::vector<double> g(x.size());
            const double f = objective_and_gradient(x.values(), target, setup, st, g);
            EXPECT_NEAR(f, objective(x, target, setup, st), 1e-12 * (1 + f));
            double gmax = 0;
            for (double v : g) gmax = std::max(gmax, std::abs(v));
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double h = 1e-7;
                EpmPoseVector xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                const double fd = (objective(xp, target, setup, st) - objective(xm, target, setup, st)) / (2 * h);
                EXPECT_LT(std::abs(fd - g[i]) / std::max(gmax, 1e-8), 1e-4) << "point " << k << " coord " << i;
            }
        }
    }
    EXPECT_GE(checked, 100);
}

TEST(AttractionConstraints, Examples) {
    const ConstraintSet cs;
    const double m = moment_from_cylinder({0.1, 0.1, 1.45});
    const std::vector<double> norms{m, m};
    // Coaxial along x, aligned, 0.266 m apart: on the 10g boundary.
    const EpmPoseVector boundary(std::vector<double>{0, 0, 0.133, 0, 0, std::numbers::pi, 0, 0.133, 0, 0});
    const auto c = attraction_constraints(boundary, norms, cs);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_NEAR(c[0], 0.0, 1.5);
    EXPECT_LT(c[1], 0.0);
    // One metre apart: far inside.
    const EpmPoseVector apart(std::vector<double>{0, 0, 0.5, 0.3, 0.2, std::numbers::pi, 0, 0.5, -1.0, 0.4});
    const auto far = attraction_constraints(apart, norms, cs);
    EXPECT_LT(far[0], -90.0);
    EXPECT_LT(far[1], 0.0);
    // A single EPM has no pairs.
    const std::vector<double> one{m};
    EXPECT_TRUE(attraction_constraints(EpmPoseVector(1), one, cs).empty());
    // Coincident EPMs are maximally violated, not an error.
    const EpmPoseVector same(std::vector<double>{0, 0, 0.2, 0, 0, 0, 0, 0.2, 1, 0});
    EXPECT_EQ(attraction_constraints(same, norms, cs)[0], std::numeric_limits<double>::infinity());
    EXPECT_FALSE(is_feasible(same, norms, cs));
}

TEST(Solve, ZeroTargetIsReachable) {
    // r_max = 0.5 m keeps the EPMs from leaving entirely; the residual floor
    // over many restarts is about 3e-8.
    const auto r = solve(WrenchStack<double>{}, pair_setup(), SolverSettings{});
    EXPECT_LT(r.residual, 1e-6);
}

TEST(Solve, SingleRobotFullyControllable) {
    const auto setup = single_setup();
    SolverSettings st;
    st.max_restarts = 10;
    st.rng_seed = 1;
    for (int dof = 1; dof <= 5; ++dof) {
        const auto r = solve(unit_target(dof), setup, st);
        EXPECT_LT(r.residual, 1e-6) << "dof " << dof;
    }
}

TEST(Solve, DeterministicForSeed) {
    const auto setup = pair_setup();
    SolverSettings st;
    st.rng_seed = 42;
    const auto a = solve(unit_target(3), setup, st);
    const auto b = solve(unit_target(3), setup, st);
    EXPECT_EQ(a.x_best, b.x_best);
    EXPECT_EQ(a.residual, b.residual);
    EXPECT_EQ(a.achieved.values(), b.achieved.values());
}

TEST(Solve, MoreRestartsNeverWorse) {
    const auto setup = pair_setup(0.1, 0.0);
    for (int dof : {1, 4, 8}) {
        SolverSettings st;
        st.rng_seed = 7;
        st.max_restarts = 1;
        const auto one = solve(unit_target(dof), setup, st);
        st.max_restarts = 10;
        const auto ten = solve(unit_target(dof), setup, st);
        EXPECT_LE(ten.residual, one.residual) << "dof " << dof;
    }
}

TEST(Solve, ResultIsFeasibleAndSelfConsistent) {
    for (int n : {2, 3}) {
        const auto setup = pair_setup(0.15, 0.0, n);
        SolverSettings st;
        for (int dof : {2, 5, 6, 10}) {
            const auto r = solve(unit_target(dof), setup, st);
            const auto& cs = setup.constraints;
            for (std::size_t i = 0; i < r.x_best.n_epms(); ++i) {
                EXPECT_GE(r.x_best(i, EpmPoseVector::kRadius), cs.r_min);
                EXPECT_LE(r.x_best(i, EpmPoseVector::kRadius), cs.r_max);
            }
            for (double c : attraction_constraints(r.x_best, setup.epm_moments, cs)) EXPECT_LE(c, 1e-6);
            const double f = objective(r.x_best, unit_target(dof), setup, st);
            EXPECT_LE(std::abs(f - r.residual), 1e-10 * std::max(f, 1e-300));
            EXPECT_EQ(r.achieved.values(), achieved_wrench(r.x_best, setup, true).values());
        }
    }
}

TEST(Solve, WarmStartIsUsedWhenFeasible) {
    const auto setup = pair_setup();
    SolverSettings st;
    st.max_restarts = 1;
    const auto first = solve(unit_target(4), setup, st);
    const auto again = solve(unit_target(4), setup, st, &first.x_best);
    EXPECT_LE(again.residual, first.residual * (1 + 1e-9) + 1e-15);
}

TEST(Solve, InfeasibleSearchSpaceThrows) {
    auto setup = pair_setup();
    setup.constraints.epm_min_gap = 2.0;  // impossible inside r_max = 0.5
    SolverSettings st;
    st.max_start_attempts = 50;
    EXPECT_THROW(solve(unit_target(1), setup, st), InfeasibleError);
}

TEST(Solve, GradientTieBreakStaysWithinTolerance) {
    const auto setup = pair_setup();
    SolverSettings st;
    const WrenchStack<double> small = WrenchStack<double>::from_values({0, 0, 0.05, 0, 0, 0, 0, -0.05, 0, 0});
    const auto plain = solve(small, setup, st);
    st.gradient_tie_tolerance = 1e-6;
    const auto tied = solve(small, setup, st);
    EXPECT_LE(tied.residual, plain.residual + 1e-6);
    EXPECT_LE(gradient_load(tied.x_best, setup), gradient_load(plain.x_best, setup) * (1 + 1e-12));
}
