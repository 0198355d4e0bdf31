#pragma once

// Closed-form limit regimes: vanishing high-speed noise (theta1 -> 0) and
// infinite inventory aversion (Gamma -> infinity).

#include "kylehft/bisection.hpp"
#include "kylehft/error.hpp"
#include "kylehft/model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace kylehft {

struct Theta1ZeroLimit {
    double beta21 = 0.0;
    double alpha_norm = 0.0;
    double Lambda22 = 0.0;
    double pi_IT = 0.0;
    double pi_HFT = 0.0;
    double penalty = 0.0;
    std::optional<double> zeta;
};

/// Right-hand side of the period-2 fixed-point equation for beta21 when theta1 -> 0.
inline double theta1_zero_equation(double b21, double theta_eps, double Gamma) {
    const double q = 1.0 / (b21 * b21 * theta_eps + 1.0);
    const double sq = std::sqrt(q);
    const double poly = 2.0 * b21 * b21 * theta_eps + 2.0 * b21 * theta_eps + theta_eps + 1.0;
    return b21 - (2.0 * b21 + 1.0) / (2.0 * sq * poly * (sq + 2.0 * Gamma));
}

inline Theta1ZeroLimit solve_theta1_zero(double theta_eps, double Gamma, double sigma_v = 1.0,
                                         double sigma_2 = 1.0) {
    if (!(theta_eps >= 0.0) || !(Gamma >= 0.0) || !std::isfinite(theta_eps) || !std::isfinite(Gamma)) {
        throw Error(ErrorKind::InvalidParameter, "theta_eps and Gamma must be finite and >= 0");
    }
    const double s2sv = sigma_2 * sigma_v;
    Theta1ZeroLimit out;
    if (theta_eps == 0.0 && Gamma == 0.0) {
        const double r2 = std::sqrt(2.0);
        out.beta21 = r2 / 2.0;
        out.alpha_norm = r2 / 2.0;
        out.Lambda22 = r2 / 3.0;
        out.pi_IT = 0.5 * s2sv * r2 / 3.0;
        out.pi_HFT = out.pi_IT;
        out.penalty = 0.0;
        return out;
    }

    auto f = [&](double b) { return theta1_zero_equation(b, theta_eps, Gamma); };
    double hi = 1.0;
    while (f(hi) <= 0.0) {
        hi *= 2.0;
        if (hi > 1e300) throw Error(ErrorKind::BracketFailure, "theta1 -> 0 bracket did not close");
    }
    const double b = bisect(f, 0.0, hi, 1e-14);
    const double root = std::sqrt(1.0 + b * b * theta_eps);
    out.beta21 = b;
    out.alpha_norm = root / (1.0 + b);
    out.Lambda22 = 1.0 / (2.0 * root);
    out.pi_IT = 0.5 * s2sv * out.alpha_norm;
    out.pi_HFT = 0.5 * s2sv * b * (1.0 - b * theta_eps) / (root * (1.0 + b));
    out.penalty = -s2sv * Gamma * b * b * (theta_eps + (1.0 + b * b * theta_eps) / ((1.0 + b) * (1.0 + b)));
    return out;
}

struct GammaInfLimit {
    double beta = 0.0;
    double Lambda1 = 0.0;
    double Lambda21 = 0.0;
    double Lambda22 = 0.0;
    double A = 0.0;
    double pi_IT = 0.0;
    double pi_HFT = 0.0;
    double penalty = 0.0;
    double sextic_residual = 0.0;
    int sign_changes = 1;

    /// HFT round trip: beta21 = beta22 = 0, beta23 = -1.
    Equilibrium as_equilibrium() const {
        Equilibrium e;
        e.Lambda1 = Lambda1;
        e.Lambda21 = Lambda21;
        e.Lambda22 = Lambda22;
        e.A = A;
        e.beta1 = beta;
        e.beta21 = 0.0;
        e.beta22 = 0.0;
        e.beta23 = -1.0;
        return e;
    }
};

/// Degree-6 polynomial whose root in (0,1) is the round-trip intensity.
inline double gamma_inf_sextic(double b, double t1, double te) {
    const double t12 = t1 * t1, t13 = t12 * t1;
    const double te2 = te * te, te3 = te2 * te;
    const double c6 = 4.0 * t1 * te2 + t1 * te3 + 2.0 * t12 * te2 + 2.0 * te2 + te3;
    const double c5 = 4.0 * t1 * te + 4.0 * t1 * te2 + 2.0 * t1 * te3 + 8.0 * t12 * te + 4.0 * t12 * te2 + 4.0 * t13 * te;
    const double c4 = 2.0 * t1 * te + t1 * te2 - 11.0 * t12 * te - 8.0 * t12 * te2 - 13.0 * t13 * te;
    const double c3 = 2.0 * t12 + 2.0 * t13 + 8.0 * t12 * te + 4.0 * t12 * te2 + 16.0 * t13 * te;
    const double c2 = -(t12 * te + 5.0 * t13 + 9.0 * t13 * te);
    const double c1 = 4.0 * t13 + 2.0 * t13 * te;
    const double c0 = -t13;
    return (((((c6 * b + c5) * b + c4) * b + c3) * b + c2) * b + c1) * b + c0;
}

/// The theta_eps = 0 reduction of the sextic after dividing by theta1^2.
inline double gamma_inf_cubic(double b, double t1) {
    return 2.0 * b * b * b * (t1 + 1.0) - 5.0 * t1 * b * b + 4.0 * t1 * b - t1;
}

inline GammaInfLimit solve_gamma_inf(double theta1, double theta_eps, double sigma_v = 1.0,
                                     double sigma_2 = 1.0) {
    if (!(theta1 > 0.0) || !(theta_eps >= 0.0) || !std::isfinite(theta1) || !std::isfinite(theta_eps)) {
        throw Error(ErrorKind::InvalidParameter, "theta1 must be > 0 and theta_eps >= 0");
    }
    const double t1 = theta1, te = theta_eps;
    auto f = [&](double b) { return gamma_inf_sextic(b, t1, te); };
    if (!(f(0.0) < 0.0) || !(f(1.0) > 0.0)) {
        throw Error(ErrorKind::BracketFailure, "sextic does not change sign on (0,1)");
    }

    GammaInfLimit g;
    g.sign_changes = static_cast<int>(sign_change_brackets(f, 0.0, 1.0, 1000).size());
    const double b = bisect(f, 0.0, 1.0, 1e-15);
    g.beta = b;
    g.sextic_residual = f(b);

    const double b2 = b * b;
    const double P = b2 * te * (t1 + 1.0) + t1;        // theta1 + beta^2 theta_eps (theta1 + 1)
    const double Q = t1 * (1.0 - b) * (1.0 - b) + b2 * (te + 1.0);
    const double root = std::sqrt(P * Q);
    g.Lambda1 = b * root / (b2 * P + (b2 * te + t1) * Q);
    g.Lambda21 = (b2 * te + b) / (2.0 * root);
    g.Lambda22 = (b2 * te + (1.0 - b) * t1) / (2.0 * root);
    g.A = std::sqrt(P / Q);

    const double s2sv = sigma_2 * sigma_v;
    g.pi_IT = 0.5 * s2sv * g.A;
    const double first = b * t1 * ((1.0 - b) * t1 + b2 * te) / root;
    const double num2 = b2 * te * ((1.0 - 2.0 * b) - b * te) + (1.0 - b) * t1 * (1.0 - b * (1.0 - 2.0 * b) * te);
    const double den2 = (1.0 - b) * (1.0 - b) * t1 * t1 + b2 * b2 * te * (te + 2.0) +
                        2.0 * b2 * t1 * (1.0 + (b2 - b + 1.0) * te);
    g.pi_HFT = 0.5 * s2sv * first * num2 / den2;
    g.penalty = 0.0;
    return g;
}

struct ThresholdPair {
    double theta_tilde = 0.0;
    double theta_hat = 0.0;
};

/// Benefit and profit-monotonicity thresholds before clamping at zero; a
/// negative value means every theta_eps >= 0 lies above the threshold.
inline ThresholdPair gamma_inf_thresholds_raw(double theta1) {
    if (!(theta1 > 0.0) || !std::isfinite(theta1)) {
        throw Error(ErrorKind::InvalidParameter, "theta1 must be > 0");
    }
    const double t1 = theta1;
    ThresholdPair r;
    // Rationalized form of (2 sqrt(S) - (t1 + 5)) / (-5 t1), S = 4 t1^2 + 10 t1 + 5,
    // with 3 t1^2 + 6 t1 - 1 factored at its roots (2 sqrt(3) - 3) / 3 and
    // (-2 sqrt(3) - 3) / 3; no cancellation near the zero crossing.
    const double S = 4.0 * t1 * t1 + 10.0 * t1 + 5.0;
    const double r3 = std::sqrt(3.0);
    const double num = 3.0 * (t1 - (2.0 * r3 - 3.0) / 3.0) * (t1 + (2.0 * r3 + 3.0) / 3.0);
    r.theta_tilde = -num / (t1 * (t1 + 5.0 + 2.0 * std::sqrt(S)));
    r.theta_hat = (1.0 - 2.0 * t1) * (1.0 + t1) / (3.0 * t1);
    return r;
}

inline ThresholdPair gamma_inf_thresholds(double theta1) {
    auto r = gamma_inf_thresholds_raw(theta1);
    r.theta_tilde = std::max(r.theta_tilde, 0.0);
    r.theta_hat = std::max(r.theta_hat, 0.0);
    return r;
}

} // namespace kylehft
