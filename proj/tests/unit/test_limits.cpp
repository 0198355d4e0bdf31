#include "helpers.hpp"
#include "kylehft/asymptotics.hpp"
#include "kylehft/limits.hpp"
#include "kylehft/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace kylehft;

TEST(Theta1Zero, ClosedFormAtOrigin) {
    const auto l = solve_theta1_zero(0.0, 0.0, 2.0, 3.0);
    const double r2 = std::sqrt(2.0);
    EXPECT_DOUBLE_EQ(l.alpha_norm, r2 / 2.0);
    EXPECT_DOUBLE_EQ(l.beta21, r2 / 2.0);
    EXPECT_DOUBLE_EQ(l.Lambda22, r2 / 3.0);
    EXPECT_DOUBLE_EQ(l.pi_IT, 3.0 * r2 / 3.0);
    EXPECT_DOUBLE_EQ(l.pi_HFT, l.pi_IT);
}

TEST(Theta1Zero, NoiselessSignalGivesQuarterOverGamma) {
    for (double G : {0.5, 1.0, 5.0, 40.0}) EXPECT_NEAR(solve_theta1_zero(0.0, G).beta21, 1.0 / (4.0 * G), 1e-12);
}

TEST(Theta1Zero, RootSolvesFixedPointEquation) {
    for (double te : {0.01, 1.0, 9.0})
        for (double G : {0.0, 0.3, 7.0}) {
            const auto l = solve_theta1_zero(te, G);
            EXPECT_NEAR(theta1_zero_equation(l.beta21, te, G), 0.0, 1e-12);
        }
}

TEST(Theta1Zero, GeneralSolverApproachesLimit) {
    const auto p = make_params(1e-6, 0.7, 0.4);
    const auto e = solve_robust(p).best();
    const auto l = solve_theta1_zero(0.7, 0.4);
    EXPECT_NEAR(e.A, l.alpha_norm, 1e-3 * l.alpha_norm);
    EXPECT_NEAR(e.Lambda22, l.Lambda22, 1e-3 * l.Lambda22);
    EXPECT_NEAR(e.beta21 + e.beta23 * e.beta1, l.beta21, 1e-3);
}

TEST(Zeta, SlopeMatchesSmallTheta1Ratio) {
    const double z = zeta(1.0, 1.0);
    const auto e = solve_robust(make_params(1e-6, 1.0, 1.0)).best();
    EXPECT_NEAR(e.beta1 / 1e-6, z, 1e-3 * std::abs(z));
}

TEST(GammaInf, SexticReducesToCubicAtZeroNoise) {
    for (double t1 : {0.1, 1.0, 7.0})
        for (double b : {0.1, 0.4, 0.8})
            EXPECT_NEAR(gamma_inf_sextic(b, t1, 0.0), t1 * t1 * gamma_inf_cubic(b, t1), 1e-12 * t1 * t1);
}

TEST(GammaInf, CubicRootAtUnitTheta1) {
    // theta1 = 1: 4 b^3 - 5 b^2 + 4 b - 1 = 0
    const auto g = solve_gamma_inf(1.0, 0.0);
    EXPECT_NEAR(4 * g.beta * g.beta * g.beta - 5 * g.beta * g.beta + 4 * g.beta - 1, 0.0, 1e-14);
}

// The Gamma -> infinity equilibrium has x2 = -x1; its lambdas must be the
// dealers' projections and beta1, A stationary for their owners.
TEST(GammaInf, LimitIsAnEquilibriumOfTheRoundTripMarket) {
    for (double t1 : {0.2, 1.0, 3.0})
        for (double te : {0.0, 0.5, 4.0}) {
            const auto g = solve_gamma_inf(t1, te);
            EXPECT_EQ(g.sign_changes, 1);
            const auto p = make_params(t1, te, 0.0);
            auto c = to_oracle(g.as_equilibrium(), p);
            const auto lam = oracle::dealer_lambdas(c);
            EXPECT_NEAR(lam[0], c.lambda1, 1e-12);
            EXPECT_NEAR(lam[1], c.lambda21, 1e-12);
            EXPECT_NEAR(lam[2], c.lambda22, 1e-12);
            EXPECT_NEAR(oracle::partial(c, &oracle::Coeffs::alpha, oracle::it_objective), 0.0, 1e-8);
            EXPECT_NEAR(oracle::partial(c, &oracle::Coeffs::beta1, oracle::hft_total), 0.0, 1e-8);
        }
}

TEST(GammaInf, GeneralSolverApproachesLimit) {
    const auto e = solve_robust(make_params(1.0, 0.5, 1e4)).best();
    const auto g = solve_gamma_inf(1.0, 0.5);
    EXPECT_NEAR(e.beta1, g.beta, 1e-3 * g.beta);
    EXPECT_NEAR(e.A, g.A, 1e-3 * g.A);
    EXPECT_NEAR(e.Lambda22, g.Lambda22, 1e-3 * g.Lambda22);
    EXPECT_LT(std::abs(e.beta21), 1e-3);
    EXPECT_LT(std::abs(e.beta22), 1e-3);
    EXPECT_NEAR(e.beta23, -1.0, 1e-3);
}

TEST(Thresholds, ZeroCrossings) {
    EXPECT_EQ(gamma_inf_thresholds((2.0 * std::sqrt(3.0) - 3.0) / 3.0).theta_tilde, 0.0);
    EXPECT_NEAR(gamma_inf_thresholds_raw((2.0 * std::sqrt(3.0) - 3.0) / 3.0).theta_tilde, 0.0, 1e-15);
    EXPECT_EQ(gamma_inf_thresholds_raw(0.5).theta_hat, 0.0);
    EXPECT_GT(gamma_inf_thresholds(0.1).theta_tilde, 0.0);
    EXPECT_GT(gamma_inf_thresholds(0.1).theta_hat, 0.0);
    EXPECT_EQ(gamma_inf_thresholds(2.0).theta_hat, 0.0);
}

TEST(Thresholds, BenefitThresholdSeparatesA) {
    for (double t1 : {0.05, 0.1}) {
        const double tt = gamma_inf_thresholds(t1).theta_tilde;
        EXPECT_LT(solve_gamma_inf(t1, 0.9 * tt).A, 1.0);
        EXPECT_GT(solve_gamma_inf(t1, 1.1 * tt).A, 1.0);
        EXPECT_NEAR(solve_gamma_inf(t1, tt).A, 1.0, 1e-9);
    }
}

// Duopoly: HFT sees v - p0 directly. In signal form (signal = A (v - p0)) the
// oracle market is the general one with zero signal noise. An IT deviation
// leaves HFT's trades on v - p0 unchanged, so the signal betas scale with 1/alpha.
TEST(Duopoly, RootIsAnEquilibrium) {
    for (const auto& q : {std::array<double, 2>{0.1, 0.0}, std::array<double, 2>{0.1, 0.03},
                          std::array<double, 2>{0.5, 0.0}, std::array<double, 2>{1.0, 0.05}}) {
        const auto d = solve_duopoly(q[0], q[1]);
        EXPECT_TRUE(d.soc_ok.all());
        const auto p = make_params(q[0], 0.0, q[1]);
        const auto c = to_oracle(d.as_signal_form(), p);
        const auto lam = oracle::dealer_lambdas(c);
        EXPECT_NEAR(lam[0], c.lambda1, 1e-9);
        EXPECT_NEAR(lam[1], c.lambda21, 1e-9);
        EXPECT_NEAR(lam[2], c.lambda22, 1e-9);
        const double on_v1 = c.beta1 * c.alpha, on_v21 = c.beta21 * c.alpha;
        const auto it_fixed_hft = [&](const oracle::Coeffs& k) {
            oracle::Coeffs m = k;
            m.beta1 = on_v1 / k.alpha;
            m.beta21 = on_v21 / k.alpha;
            return oracle::it_objective(m);
        };
        EXPECT_NEAR(oracle::partial(c, &oracle::Coeffs::alpha, it_fixed_hft), 0.0, 1e-7);
        EXPECT_NEAR(oracle::partial(c, &oracle::Coeffs::beta1, oracle::hft_total), 0.0, 1e-7);
        EXPECT_NEAR(oracle::partial(c, &oracle::Coeffs::beta21, oracle::hft_period2), 0.0, 1e-7);
        EXPECT_NEAR(oracle::partial(c, &oracle::Coeffs::beta22, oracle::hft_period2), 0.0, 1e-7);
        EXPECT_NEAR(oracle::partial(c, &oracle::Coeffs::beta23, oracle::hft_period2), 0.0, 1e-7);
        EXPECT_GT(d.beta1, 0.0);
        EXPECT_GT(d.beta21, 0.0);
    }
}

TEST(Duopoly, GeneralSolverFailsWhereDuopolyExists) {
    EXPECT_FALSE(general_root_exists_at_zero_noise(0.1, 0.0));
    EXPECT_EQ(solve_duopoly_all(0.1, 0.0).status, SolveStatus::Found);
}

TEST(GammaTilde, BracketsTransition) {
    const auto b = find_gamma_tilde_bracket(0.1);
    EXPECT_LE(b.hi - b.lo, 1e-4);
    EXPECT_GT(b.hi, 0.0);
    EXPECT_FALSE(general_root_exists_at_zero_noise(0.1, b.lo));
    EXPECT_TRUE(general_root_exists_at_zero_noise(0.1, b.hi));
    EXPECT_EQ(find_gamma_tilde(0.1), b.hi);
}

TEST(GammaTilde, RejectsInvalidTheta1) { EXPECT_THROW(find_gamma_tilde_bracket(0.0), Error); }
