#include "kylehft/bisection.hpp"
#include "kylehft/newton.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace kylehft;

TEST(Bisect, FindsCubeRoot) {
    const double r = bisect([](double x) { return x * x * x - 2.0; }, 0.0, 2.0, 1e-14);
    EXPECT_NEAR(r, std::cbrt(2.0), 1e-13);
}

TEST(Bisect, ReturnsExactEndpointZero) {
    EXPECT_EQ(bisect([](double x) { return x - 1.0; }, 1.0, 3.0), 1.0);
    EXPECT_EQ(bisect([](double x) { return x - 3.0; }, 1.0, 3.0), 3.0);
}

TEST(Bisect, RejectsBracketWithoutSignChange) {
    try {
        bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BracketFailure);
    }
}

TEST(BisectPredicate, BracketWidth) {
    const auto [lo, hi] = bisect_predicate([](double x) { return x > 0.3; }, 0.0, 1.0, 1e-6);
    EXPECT_LE(hi - lo, 1e-6);
    EXPECT_LE(lo, 0.3);
    EXPECT_GT(hi, 0.3);
    EXPECT_THROW(bisect_predicate([](double) { return true; }, 0.0, 1.0, 1e-3), Error);
}

TEST(SignChangeBrackets, CountsEveryCrossing) {
    const auto b = sign_change_brackets([](double x) { return std::sin(10.0 * x); }, 0.05, 3.0, 600);
    // zeros of sin(10x) in (0.05, 3): k pi / 10 for k = 1..9
    EXPECT_EQ(b.size(), 9u);
    for (std::size_t k = 0; k < b.size(); ++k) {
        const double z = (k + 1) * M_PI / 10.0;
        EXPECT_LE(b[k].first, z);
        EXPECT_GE(b[k].second, z);
    }
}

TEST(Newton3, SolvesCoupledSystem) {
    auto F = [](const Triple& x) {
        return Triple{x[0] * x[0] + x[1] - 3.0, x[0] - x[1] * x[2], std::exp(x[2]) - 2.0};
    };
    NewtonOptions opt;
    const auto r = newton3(F, Triple{1.0, 1.0, 0.5}, opt);
    ASSERT_TRUE(r.has_value());
    EXPECT_LT(max_abs(F(*r)), 1e-12);
    EXPECT_NEAR((*r)[2], std::log(2.0), 1e-12);
}

TEST(Newton3, ReportsFailureWithoutRoot) {
    auto F = [](const Triple& x) { return Triple{x[0] * x[0] + 1.0, x[1], x[2]}; };
    NewtonOptions opt;
    opt.max_iters = 50;
    EXPECT_FALSE(newton3(F, Triple{0.5, 0.0, 0.0}, opt).has_value());
}
