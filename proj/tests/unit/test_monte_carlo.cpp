#include "helpers.hpp"
#include "kylehft/asymptotics.hpp"
#include "kylehft/monte_carlo.hpp"
#include "kylehft/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace kylehft;

namespace {

SimConfig quick(std::uint64_t seed = 7) {
    SimConfig c;
    c.n_paths = 200000;
    c.seed = seed;
    return c;
}

} // namespace

TEST(SimConfig, PathFloor) {
    SimConfig c;
    c.n_paths = 1000;
    EXPECT_THROW(c.validate(), Error);
    c.n_paths = 10000;
    EXPECT_NO_THROW(c.validate());
    c.n_paths = 10001;
    EXPECT_THROW(c.validate(), Error);
    c.antithetic = false;
    EXPECT_NO_THROW(c.validate());
}

TEST(Rng, CounterBasedNormalsHaveUnitMoments) {
    double s1 = 0, s2 = 0, s4 = 0;
    const int n = 200000;
    for (int k = 0; k < n / 2; ++k) {
        const auto z = rng::normals<2>(99, k);
        for (double x : z) {
            s1 += x;
            s2 += x * x;
            s4 += x * x * x * x;
        }
    }
    EXPECT_NEAR(s1 / n, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(s4 / n, 3.0, 5.0 * std::sqrt(96.0 / n));
    EXPECT_EQ(rng::normals<4>(1, 5), rng::normals<4>(1, 5));
    EXPECT_NE(rng::normals<4>(1, 5), rng::normals<4>(2, 5));
}

TEST(Simulate, ZeroStrategiesGiveZeroTradingEstimates) {
    Equilibrium e;
    const auto s = simulate(e, make_params(1, 1, 1), quick());
    EXPECT_EQ(s.pi_IT.mean, 0.0);
    EXPECT_EQ(s.pi_IT.se, 0.0);
    EXPECT_EQ(s.pi_HFT.mean, 0.0);
    EXPECT_EQ(s.penalty.mean, 0.0);
    EXPECT_EQ(s.inventory_second_moment.mean, 0.0);
    // p1 = 0, so this is the sampled covariance of u1 and v
    EXPECT_TRUE(s.loss_NT1.within(0.0, 4.0));
}

TEST(Simulate, MatchesClosedFormsWithinFourSE) {
    for (const auto& q : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{0.1, 0.05, 0.2},
                          std::array<double, 3>{1e-2, 2, 30}}) {
        const auto p = make_params(q[0], q[1], q[2], 0.8, 1.5);
        const auto e = solve_robust(p).best();
        const auto s = simulate(e, p, quick());
        EXPECT_LT(s.max_z(compute_outcomes(e, p)), 4.0);
        EXPECT_TRUE(s.err_p2.within(0.5 * p.sigma_v * p.sigma_v, 4.0));
        EXPECT_GT(s.pi_HFT.se, 0.0);
    }
}

TEST(Simulate, ReproducibleAcrossWorkerCounts) {
    const auto p = make_params(1, 1, 1);
    const auto e = solve_robust(p).best();
    SimConfig a = quick(), b = quick();
    b.jobs = 3;
    const auto sa = simulate(e, p, a), sb = simulate(e, p, b);
    EXPECT_EQ(sa.pi_HFT.mean, sb.pi_HFT.mean);
    EXPECT_EQ(sa.pi_HFT.se, sb.pi_HFT.se);
    EXPECT_EQ(sa.err_p1.mean, sb.err_p1.mean);
}

TEST(Simulate, RoundTripLimitHoldsNoInventory) {
    const auto g = solve_gamma_inf(1.0, 0.5);
    auto p = make_params(1.0, 0.5, 0.0);
    LinearMarket m = LinearMarket::from(g.as_equilibrium(), p);
    m.gamma = std::numeric_limits<double>::infinity();
    const auto s = simulate(m, quick());
    EXPECT_EQ(s.inventory_second_moment.mean, 0.0);
    EXPECT_EQ(s.penalty.mean, 0.0);
}

TEST(Antithetic, OddMomentsCancel) {
    const auto p = make_params(1, 1, 1);
    const auto e = solve_robust(p).best();
    const auto s = simulate(e, p, quick());
    EXPECT_EQ(s.price_bias.mean, 0.0);
    SimConfig plain = quick();
    plain.antithetic = false;
    EXPECT_NE(simulate(e, p, plain).price_bias.mean, 0.0);
}

// Over repeated runs the spread of the odd estimand is zero with antithetics;
// for the even (quadratic) estimands the pair average equals each member, so
// the spread at fixed N grows by sqrt(2).
TEST(Antithetic, VarianceOverRepeatedRuns) {
    const auto p = make_params(1, 1, 1);
    const auto e = solve_robust(p).best();
    auto spread = [&](bool anti, auto pick) {
        double s = 0, s2 = 0;
        for (int r = 0; r < 10; ++r) {
            SimConfig c;
            c.n_paths = 20000;
            c.seed = 1000 + r;
            c.antithetic = anti;
            const double x = pick(simulate(e, p, c));
            s += x;
            s2 += x * x;
        }
        return s2 / 10 - (s / 10) * (s / 10);
    };
    auto bias = [](const SimEstimates& s) { return s.price_bias.mean; };
    EXPECT_LE(spread(true, bias), spread(false, bias));
    EXPECT_EQ(spread(true, bias), 0.0);
}

TEST(BestResponse, NoProfitableDeviationAtEquilibrium) {
    const auto p = make_params(1, 1, 1);
    const auto e = solve_robust(p).best();
    BestResponseReport r;
    ASSERT_NO_THROW(r = best_response_check(e, p, quick()));
    EXPECT_EQ(r.deviations.size(), 12u);
    EXPECT_TRUE(r.all_concave());
    for (const auto& d : r.deviations) EXPECT_LT(d.gain.mean, 3.0 * d.gain.se);
}

TEST(BestResponse, AlphaDeviationLossMatchesCurvature) {
    // pi_IT is quadratic in alpha: a +5% move loses lambda2 (d alpha)^2 sigma_v^2.
    const auto p = make_params(1, 1, 1);
    const auto e = solve_robust(p).best();
    const auto r = best_response_check(e, p, SimConfig{}, {0.05});
    const double alpha = e.A / p.price_scale();
    const double lambda2 = e.Lambda2() * p.price_scale();
    const double expected = -lambda2 * std::pow(0.05 * alpha, 2) * p.sigma_v * p.sigma_v;
    EXPECT_LT(r.deviations[0].gain.mean, -2.0 * r.deviations[0].gain.se);
    EXPECT_NEAR(r.deviations[0].gain.mean, expected, 4.0 * r.deviations[0].gain.se);
}

TEST(BestResponse, TamperedCoefficientIsDetected) {
    const auto p = make_params(1, 1, 1);
    auto e = solve_robust(p).best();
    e.beta1 *= 1.2;
    try {
        best_response_check(e, p, quick());
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::NotBestResponse);
    }
}

TEST(BestResponse, ZeroDeviationReproducesSimulation) {
    const auto p = make_params(1, 1, 1);
    const auto e = solve_robust(p).best();
    const auto r = best_response_check(e, p, quick(), {0.0});
    for (const auto& d : r.deviations) {
        EXPECT_EQ(d.gain.mean, 0.0);
        EXPECT_EQ(d.gain.se, 0.0);
    }
}
