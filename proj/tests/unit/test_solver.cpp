#include "helpers.hpp"
#include "kylehft/solver.hpp"

#include <gtest/gtest.h>

using namespace kylehft;

TEST(SolverConfig, Validation) {
    SolverConfig c;
    EXPECT_NO_THROW(c.validate());
    c.damping = 0.0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.max_iters = 0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.dedup_tol = 1e-13;
    EXPECT_THROW(c.validate(), Error);
}

TEST(Solve, ResidualAndExpandedSystemAtRoot) {
    const auto p = make_params(1, 1, 1);
    const auto rep = solve(p);
    ASSERT_EQ(rep.status, SolveStatus::Found);
    const auto& e = rep.best();
    EXPECT_LT(max_abs(residual_map(to_triple(e), p)), 1e-12);
    EXPECT_LT(max_abs(expanded_system(e.Lambda22, e.A, e.beta1, p)), 1e-6);
    EXPECT_TRUE(e.soc_ok.all());
}

TEST(Solve, RootsAreDeduplicatedAndSorted) {
    const auto rep = solve(make_params(0.3, 0.2, 0.4));
    ASSERT_EQ(rep.status, SolveStatus::Found);
    for (std::size_t i = 0; i < rep.roots.size(); ++i)
        for (std::size_t j = i + 1; j < rep.roots.size(); ++j)
            EXPECT_GT(max_abs_diff(to_triple(rep.roots[i]), to_triple(rep.roots[j])), SolverConfig{}.dedup_tol);
    for (std::size_t i = 1; i < rep.roots.size(); ++i)
        EXPECT_LE(rep.roots[i - 1].residual_norm, rep.roots[i].residual_norm);
    EXPECT_GE(rep.converged_starts, static_cast<int>(rep.roots.size()));
}

TEST(Solve, ZeroNoiseZeroAversionHasNoGeneralEquilibrium) {
    const auto rep = solve_robust(make_params(1, 0, 0));
    EXPECT_NE(rep.status, SolveStatus::Found);
    EXPECT_THROW(rep.best(), Error);
}

TEST(Solve, InvalidParametersThrowBeforeWork) {
    try {
        solve(make_params(-1, 1, 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidParameter);
    }
}

TEST(NearestRoot, PicksClosestInMaxNorm) {
    SolveReport rep;
    Equilibrium a, b;
    a.Lambda22 = 0.1;
    b.Lambda22 = 0.9;
    rep.roots = {a, b};
    rep.status = SolveStatus::Found;
    EXPECT_EQ(nearest_root(rep, Triple{0.8, 0, 0}), &rep.roots[1]);
    EXPECT_EQ(nearest_root(SolveReport{}, Triple{0, 0, 0}), nullptr);
}

TEST(TrackRoot, ReachesDirectSolution) {
    const auto from = make_params(1, 1, 1);
    const auto to = make_params(0.05, 0.02, 6);
    const auto start = solve(from).best();
    const auto tracked = track_root(start, from, to);
    ASSERT_TRUE(tracked.has_value());
    const auto direct = solve_robust(to).best();
    EXPECT_LT(max_abs_diff(to_triple(*tracked), to_triple(direct)), 1e-9);
}

TEST(SolveRobust, HardCornersSolve) {
    for (const auto& q : {std::array<double, 3>{1e-4, 1e-4, 0}, std::array<double, 3>{1e-4, 9, 100},
                          std::array<double, 3>{1, 1e-4, 100}, std::array<double, 3>{1e-6, 1, 1}}) {
        const auto p = make_params(q[0], q[1], q[2]);
        const auto rep = solve_robust(p);
        ASSERT_EQ(rep.status, SolveStatus::Found) << q[0] << " " << q[1] << " " << q[2];
        EXPECT_LT(max_abs(residual_map(to_triple(rep.best()), p)), 1e-10);
    }
}
