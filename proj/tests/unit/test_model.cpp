#include "helpers.hpp"
#include "kylehft/model.hpp"
#include "kylehft/solver.hpp"

#include <gtest/gtest.h>

using namespace kylehft;

TEST(ModelParams, RejectsOutOfRangeValues) {
    EXPECT_THROW(make_params(0.0, 1, 1).validate(), Error);
    EXPECT_THROW(make_params(1, -1e-9, 1).validate(), Error);
    EXPECT_THROW(make_params(1, 1, -1).validate(), Error);
    EXPECT_THROW(make_params(1, 1, 1, 0.0).validate(), Error);
    EXPECT_THROW(make_params(1, 1, 1, 1.0, -2.0).validate(), Error);
    EXPECT_NO_THROW(make_params(1e-9, 0, 0).validate());
    try {
        make_params(0.0, 1, 1).validate();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidParameter);
        EXPECT_NE(std::string(e.what()).find("theta1"), std::string::npos);
    }
}

TEST(ModelParams, DimensionalRoundTrip) {
    DimensionalParams d;
    d.sigma_v = 0.3;
    d.sigma_1 = 2.0;
    d.sigma_2 = 4.0;
    d.sigma_eps = 1.0;
    d.gamma = 0.15;
    const auto p = ModelParams::from_dimensional(d);
    EXPECT_DOUBLE_EQ(p.theta1, 0.25);
    EXPECT_DOUBLE_EQ(p.theta_eps, 1.0 / 16.0);
    EXPECT_DOUBLE_EQ(p.Gamma, 0.15 / (0.3 / 4.0));
    const auto back = p.to_dimensional();
    EXPECT_NEAR(back.sigma_1, d.sigma_1, 1e-15);
    EXPECT_NEAR(back.sigma_eps, d.sigma_eps, 1e-15);
    EXPECT_NEAR(back.gamma, d.gamma, 1e-15);
}

TEST(Roles, DeadBandAndCases) {
    EXPECT_EQ(classify_directions(1, 1).variant, RoleKind::SmallIT);
    EXPECT_EQ(classify_directions(1, -1).variant, RoleKind::RoundTripper);
    EXPECT_EQ(classify_directions(-1, 1).variant, RoleKind::Inactive);
    EXPECT_EQ(classify_directions(1, 1e-12).variant, RoleKind::Inactive);
    EXPECT_EQ(classify_directions(1, 1e-12).dir2, 0);
    EXPECT_EQ(classify_directions(1, 1e-12, 1e-13).variant, RoleKind::SmallIT);
}

TEST(Soc, InequalitiesMatchDefinitions) {
    Equilibrium e;
    e.Lambda1 = 0.5;
    e.Lambda22 = 0.4;
    e.beta23 = -0.9;
    e.A = 1.0;
    e.beta1 = 0.3;
    e.Lambda21 = 0.2;
    const auto p = make_params(1, 1, 0.1);
    const auto s = check_soc(e, p);
    EXPECT_TRUE(s.soc1);
    EXPECT_EQ(s.soc2, 0.5 + 0.1 - 0.5 * 0.81 > 0.0);
    EXPECT_TRUE(s.soc3);
    e.Lambda22 = -0.2;
    EXPECT_FALSE(check_soc(e, p).soc1);
}

class SolvedPoints : public ::testing::TestWithParam<std::array<double, 3>> {};

// Dealer prices must be the Gaussian projections, and every strategy
// coefficient a stationary point of its owner's exact expected objective.
TEST_P(SolvedPoints, EquilibriumConditionsFromIndependentMoments) {
    const auto [t1, te, G] = GetParam();
    const auto p = make_params(t1, te, G, 0.7, 1.9);
    const Equilibrium e = solve_robust(p).best();
    const auto c = to_oracle(e, p);

    const auto lam = oracle::dealer_lambdas(c);
    EXPECT_NEAR(lam[0], c.lambda1, 1e-10 * std::max(1.0, std::abs(c.lambda1)));
    EXPECT_NEAR(lam[1], c.lambda21, 1e-9);
    EXPECT_NEAR(lam[2], c.lambda22, 1e-9);

    EXPECT_NEAR(oracle::partial(c, &oracle::Coeffs::alpha, oracle::it_objective), 0.0, 1e-7);
    EXPECT_NEAR(oracle::partial(c, &oracle::Coeffs::beta1, oracle::hft_total), 0.0, 1e-7);
    EXPECT_NEAR(oracle::partial(c, &oracle::Coeffs::beta21, oracle::hft_period2), 0.0, 1e-7);
    EXPECT_NEAR(oracle::partial(c, &oracle::Coeffs::beta22, oracle::hft_period2), 0.0, 1e-7);
    EXPECT_NEAR(oracle::partial(c, &oracle::Coeffs::beta23, oracle::hft_period2), 0.0, 1e-7);
}

TEST_P(SolvedPoints, ClosedFormOutcomesMatchMoments) {
    const auto [t1, te, G] = GetParam();
    const auto p = make_params(t1, te, G, 1.3, 0.8);
    const Equilibrium e = solve_robust(p).best();
    const Outcomes a = compute_outcomes(e, p);
    const Outcomes b = outcomes_from_moments(e, p);
    const double tol = 1e-9;
    EXPECT_NEAR(a.pi_IT, b.pi_IT, tol);
    EXPECT_NEAR(a.pi_HFT, b.pi_HFT, tol);
    EXPECT_NEAR(a.penalty, b.penalty, tol);
    EXPECT_NEAR(a.err_p1, b.err_p1, tol);
    EXPECT_NEAR(a.loss_NT1, b.loss_NT1, tol);
    EXPECT_NEAR(a.loss_NT2, b.loss_NT2, tol);
    EXPECT_NEAR(a.pi_HFT_holding + a.pi_HFT_impact, a.pi_HFT, tol);
    EXPECT_NEAR(a.err_p2, 0.5 * p.sigma_v * p.sigma_v, 1e-9);
    EXPECT_NEAR(check_A_consistency(e, p), 0.0, 1e-9);
}

TEST_P(SolvedPoints, ScaleInvariance) {
    const auto [t1, te, G] = GetParam();
    const Equilibrium a = solve_robust(make_params(t1, te, G)).best();
    const Equilibrium b = solve_robust(make_params(t1, te, G, 5.0, 0.2)).best();
    const auto ca = a.coefficients(), cb = b.coefficients();
    for (std::size_t k = 0; k < ca.size(); ++k) EXPECT_NEAR(ca[k], cb[k], 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Grid, SolvedPoints,
                         ::testing::Values(std::array<double, 3>{1, 1, 1}, std::array<double, 3>{0.1, 0.05, 0.3},
                                           std::array<double, 3>{1, 0.01, 0}, std::array<double, 3>{0.5, 3, 10},
                                           std::array<double, 3>{1e-3, 0.5, 2}, std::array<double, 3>{4, 9, 0.05}));

TEST(MarketForms, ZeroStrategiesGiveNoTradingProfit) {
    Equilibrium e;
    const auto p = make_params(1, 1, 1);
    const Outcomes o = outcomes_from_moments(e, p);
    EXPECT_EQ(o.pi_IT, 0.0);
    EXPECT_EQ(o.pi_HFT, 0.0);
    EXPECT_EQ(o.penalty, 0.0);
    EXPECT_EQ(o.err_p1, p.sigma_v * p.sigma_v);
}
