#pragma once

// Single-asset model: parameters, the intensity-form equilibrium, closed-form
// outcome metrics and the HFT role classification.
//
// Everything inside the solvers is dimensionless in (theta1, theta_eps, Gamma).
// The scales sigma_v and sigma_2 only come back in when outcomes are reported.

#include "kylehft/error.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>

namespace kylehft {

/// Market primitives as raw variances/stds, in price and share units.
struct DimensionalParams {
    double sigma_v = 1.0;   // asset value std
    double sigma_1 = 1.0;   // period-1 (high-speed) noise std
    double sigma_2 = 1.0;   // period-2 noise std
    double sigma_eps = 0.0; // HFT signal noise std
    double gamma = 0.0;     // inventory aversion
    double p0 = 0.0;
};

struct ModelParams {
    double theta1 = 1.0;    // sigma_1^2 / sigma_2^2
    double theta_eps = 0.0; // sigma_eps^2 / sigma_2^2
    double Gamma = 0.0;     // gamma / (sigma_v / sigma_2)
    double sigma_v = 1.0;
    double sigma_2 = 1.0;
    double p0 = 0.0;

    /// Throws InvalidParameter naming the first violated bound.
    void validate() const {
        auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidParameter, msg); };
        if (!(std::isfinite(theta1) && theta1 > 0.0)) fail("theta1 must be > 0");
        if (!(std::isfinite(theta_eps) && theta_eps >= 0.0)) fail("theta_eps must be >= 0");
        if (!(std::isfinite(Gamma) && Gamma >= 0.0)) fail("Gamma must be >= 0");
        if (!(std::isfinite(sigma_v) && sigma_v > 0.0)) fail("sigma_v must be > 0");
        if (!(std::isfinite(sigma_2) && sigma_2 > 0.0)) fail("sigma_2 must be > 0");
        if (!std::isfinite(p0)) fail("p0 must be finite");
    }

    static ModelParams from_dimensional(const DimensionalParams& d) {
        ModelParams p;
        p.sigma_v = d.sigma_v;
        p.sigma_2 = d.sigma_2;
        p.p0 = d.p0;
        p.theta1 = (d.sigma_1 * d.sigma_1) / (d.sigma_2 * d.sigma_2);
        p.theta_eps = (d.sigma_eps * d.sigma_eps) / (d.sigma_2 * d.sigma_2);
        p.Gamma = d.gamma / (d.sigma_v / d.sigma_2);
        p.validate();
        return p;
    }

    DimensionalParams to_dimensional() const {
        DimensionalParams d;
        d.sigma_v = sigma_v;
        d.sigma_2 = sigma_2;
        d.p0 = p0;
        d.sigma_1 = sigma_2 * std::sqrt(theta1);
        d.sigma_eps = sigma_2 * std::sqrt(theta_eps);
        d.gamma = Gamma * sigma_v / sigma_2;
        return d;
    }

    /// Price per share scale: lambda = Lambda * price_scale(), alpha = A / price_scale().
    double price_scale() const { return sigma_v / sigma_2; }
};

struct SocStatus {
    bool soc1 = false; // Lambda22 + Gamma > 0
    bool soc2 = false; // Lambda1 + Gamma - (Lambda22 + Gamma) beta23^2 > 0
    bool soc3 = false; // A > 0, i.e. lambda2 > 0
    bool all() const { return soc1 && soc2 && soc3; }
};

/// Intensity form of a linear equilibrium. Lambdas are scaled by sigma_2/sigma_v,
/// A by sigma_v/sigma_2; betas are dimensionless already.
struct Equilibrium {
    double Lambda1 = 0.0;
    double Lambda21 = 0.0;
    double Lambda22 = 0.0;
    double A = 0.0;
    double beta1 = 0.0;
    double beta21 = 0.0;
    double beta22 = 0.0;
    double beta23 = 0.0;
    SocStatus soc_ok;
    double residual_norm = 0.0;

    /// Total impact of the informed order on p2 (normalized lambda2).
    double Lambda2() const { return Lambda21 * beta1 + Lambda22 * (1.0 + beta21 + beta23 * beta1); }
    /// Coefficient of the signal in x2 once x1 is substituted.
    double period2_direction() const { return beta21 + beta23 * beta1; }
    std::array<double, 8> coefficients() const {
        return {Lambda1, Lambda21, Lambda22, A, beta1, beta21, beta22, beta23};
    }
};

struct Outcomes {
    double pi_IT = 0.0;
    double pi_HFT = 0.0;
    double pi_HFT_holding = 0.0;
    double pi_HFT_impact = 0.0;
    double penalty = 0.0;
    double err_p1 = 0.0;
    double err_p2 = 0.0;
    double loss_NT1 = 0.0;
    double loss_NT2 = 0.0;
};

enum class RoleKind { SmallIT, RoundTripper, Inactive };

inline std::string_view to_string(RoleKind r) {
    switch (r) {
    case RoleKind::SmallIT: return "SmallIT";
    case RoleKind::RoundTripper: return "RoundTripper";
    case RoleKind::Inactive: return "Inactive";
    }
    return "Inactive";
}

struct Role {
    RoleKind variant = RoleKind::Inactive;
    int dir1 = 0;
    int dir2 = 0;
};

struct DerivedCoefficients {
    double Lambda1;
    double Lambda21;
    double beta21;
    double beta22;
    double beta23;
};

inline constexpr double kDefaultRoleTolerance = 1e-10;

/// Closed forms for (Lambda1, Lambda21, beta21, beta22, beta23) given the three
/// free unknowns. Lambda21 comes from the informed trader's first-order condition.
inline DerivedCoefficients derived_coefficients(double Lambda22, double A, double beta1,
                                                const ModelParams& p) {
    using detail::checked_div;
    const double t1 = p.theta1;
    const double te = p.theta_eps;
    const double G = p.Gamma;
    const double A2 = A * A;

    DerivedCoefficients d{};
    d.Lambda1 = checked_div(A * beta1, beta1 * beta1 * (A2 + te) + t1, "Lambda1 denominator");
    // The numerator is O(beta1) at a root but built from O(1) terms; extended
    // precision keeps the residual floor below 1e-12 for theta1 down to 1e-6.
    {
        using L = long double;
        const L a = A, a2 = a * a, l = Lambda22, g = G, e = te, b = beta1;
        const L num21 = a2 * a * l * (2.0L * (b - 1.0L) * g - l) + a2 * g +
                        2.0L * a * e * l * ((b - 1.0L) * g - l) + e * (g + l);
        d.Lambda21 = checked_div(static_cast<double>(num21), A * beta1 * (A2 + te) * (2.0 * G + Lambda22),
                                 "Lambda21 denominator");
    }
    d.beta21 = checked_div(A * (1.0 - A * Lambda22), 2.0 * (A2 + te) * (G + Lambda22), "beta21 denominator");
    d.beta22 = checked_div(-d.Lambda21, 2.0 * (G + Lambda22), "beta22 denominator");
    d.beta23 = checked_div(-(2.0 * G + d.Lambda21), 2.0 * (G + Lambda22), "beta23 denominator");
    return d;
}

inline SocStatus check_soc(const Equilibrium& e, const ModelParams& p) {
    SocStatus s;
    const double g = p.Gamma;
    s.soc1 = e.Lambda22 + g > 0.0;
    s.soc2 = e.Lambda1 + g - (e.Lambda22 + g) * e.beta23 * e.beta23 > 0.0;
    s.soc3 = e.A > 0.0 && e.Lambda2() > 0.0;
    return s;
}

/// Assemble the full intensity form from the three free unknowns.
inline Equilibrium assemble_equilibrium(double Lambda22, double A, double beta1, const ModelParams& p) {
    const auto d = derived_coefficients(Lambda22, A, beta1, p);
    Equilibrium e;
    e.Lambda1 = d.Lambda1;
    e.Lambda21 = d.Lambda21;
    e.Lambda22 = Lambda22;
    e.A = A;
    e.beta1 = beta1;
    e.beta21 = d.beta21;
    e.beta22 = d.beta22;
    e.beta23 = d.beta23;
    e.soc_ok = check_soc(e, p);
    return e;
}

/// A minus the value implied by the informed trader's optimality once the
/// dealers' projections are substituted. Zero at every equilibrium.
inline double check_A_consistency(const Equilibrium& e, const ModelParams& p) {
    const double t1 = p.theta1;
    const double te = p.theta_eps;
    const double D = e.beta21 + e.beta1 * (e.beta23 - e.beta22);
    const double E = 1.0 + D;
    const double num = t1 * te * D * D + e.beta1 * e.beta1 * te + t1;
    const double den = t1 * E * E + (1.0 + te) * e.beta1 * e.beta1;
    const double ratio = detail::checked_div(num, den, "A consistency denominator");
    if (ratio < 0.0) {
        throw Error(ErrorKind::NegativeRadicand, "A consistency radicand is negative");
    }
    return e.A - std::sqrt(ratio);
}

inline int sign_with_deadband(double x, double tol) {
    if (x > tol) return 1;
    if (x < -tol) return -1;
    return 0;
}

inline Role classify_directions(double d1, double d2, double tol = kDefaultRoleTolerance) {
    Role r;
    r.dir1 = sign_with_deadband(d1, tol);
    r.dir2 = sign_with_deadband(d2, tol);
    if (r.dir1 > 0 && r.dir2 > 0) {
        r.variant = RoleKind::SmallIT;
    } else if (r.dir1 > 0 && r.dir2 < 0) {
        r.variant = RoleKind::RoundTripper;
    } else {
        r.variant = RoleKind::Inactive;
    }
    return r;
}

inline Role classify_role(const Equilibrium& e, double tol = kDefaultRoleTolerance) {
    return classify_directions(e.beta1, e.period2_direction(), tol);
}

// ---------------------------------------------------------------------------
// Exact Gaussian moments.
//
// Every market quantity is linear in the four independent shocks
// (v - p0, eps, u1, u2), so second moments reduce to weighted dot products.

enum Shock : std::size_t { kValue = 0, kSignalNoise = 1, kNoise1 = 2, kNoise2 = 3 };

struct LinearForm {
    std::array<double, 4> c{};

    LinearForm operator+(const LinearForm& o) const {
        LinearForm r;
        for (std::size_t k = 0; k < 4; ++k) r.c[k] = c[k] + o.c[k];
        return r;
    }
    LinearForm operator-(const LinearForm& o) const {
        LinearForm r;
        for (std::size_t k = 0; k < 4; ++k) r.c[k] = c[k] - o.c[k];
        return r;
    }
    friend LinearForm operator*(double s, const LinearForm& f) {
        LinearForm r;
        for (std::size_t k = 0; k < 4; ++k) r.c[k] = s * f.c[k];
        return r;
    }
    static LinearForm unit(Shock s) {
        LinearForm r;
        r.c[s] = 1.0;
        return r;
    }
};

struct ShockVariances {
    std::array<double, 4> var{};

    static ShockVariances of(const ModelParams& p) {
        const double s2sq = p.sigma_2 * p.sigma_2;
        return {{p.sigma_v * p.sigma_v, p.theta_eps * s2sq, p.theta1 * s2sq, s2sq}};
    }
    double cov(const LinearForm& a, const LinearForm& b) const {
        double s = 0.0;
        for (std::size_t k = 0; k < 4; ++k) s += a.c[k] * b.c[k] * var[k];
        return s;
    }
};

/// Dimensional linear strategies and prices, all expressed in deviations from p0.
struct MarketForms {
    LinearForm value;   // v - p0
    LinearForm order;   // i
    LinearForm x1;
    LinearForm x2;
    LinearForm y1;
    LinearForm y2;
    LinearForm p1;      // p1 - p0
    LinearForm p2;      // p2 - p0
    LinearForm u1;
    LinearForm u2;

    static MarketForms build(const Equilibrium& e, const ModelParams& p) {
        const double scale = p.price_scale();
        const double alpha = e.A / scale;
        MarketForms m;
        m.value = LinearForm::unit(kValue);
        m.u1 = LinearForm::unit(kNoise1);
        m.u2 = LinearForm::unit(kNoise2);
        m.order = alpha * m.value;
        const LinearForm signal = m.order + LinearForm::unit(kSignalNoise);
        m.x1 = e.beta1 * signal;
        m.y1 = m.x1 + m.u1;
        m.p1 = (e.Lambda1 * scale) * m.y1;
        m.x2 = e.beta21 * signal + e.beta22 * m.u1 + e.beta23 * m.x1;
        m.y2 = m.order + m.x2 + m.u2;
        m.p2 = (e.Lambda21 * scale) * m.y1 + (e.Lambda22 * scale) * m.y2;
        return m;
    }
};

/// Every Outcomes field from exact bilinear Gaussian moments of the strategies.
inline Outcomes outcomes_from_moments(const Equilibrium& e, const ModelParams& p) {
    const auto m = MarketForms::build(e, p);
    const auto v = ShockVariances::of(p);
    const double gamma = p.Gamma * p.price_scale();
    const LinearForm err1 = m.value - m.p1;
    const LinearForm err2 = m.value - m.p2;
    const LinearForm position = m.x1 + m.x2;

    Outcomes o;
    o.pi_IT = v.cov(m.order, err2);
    o.pi_HFT = v.cov(m.x1, err1) + v.cov(m.x2, err2);
    o.pi_HFT_holding = v.cov(position, err1);
    o.pi_HFT_impact = -v.cov(m.x2, m.p2 - m.p1);
    o.penalty = -gamma * v.cov(position, position);
    o.err_p1 = v.cov(err1, err1);
    o.err_p2 = v.cov(err2, err2);
    o.loss_NT1 = -v.cov(m.u1, err1);
    o.loss_NT2 = -v.cov(m.u2, err2);
    return o;
}

/// Outcomes from the equilibrium closed forms. The holding/impact split and
/// the time-2 pricing error come from exact moments.
inline Outcomes compute_outcomes(const Equilibrium& e, const ModelParams& p) {
    const double s2sv = p.sigma_2 * p.sigma_v;
    const double sv2 = p.sigma_v * p.sigma_v;
    const double t1 = p.theta1;
    const double te = p.theta_eps;
    const double A = e.A;
    const double b1 = e.beta1, b21 = e.beta21, b22 = e.beta22, b23 = e.beta23;
    const double L1 = e.Lambda1, L21 = e.Lambda21, L22 = e.Lambda22;
    const double dir2 = b1 * b23 + b21;

    Outcomes o;
    o.pi_IT = 0.5 * s2sv * A;
    o.pi_HFT = s2sv * (A * dir2 * (1.0 - A * (b1 * b23 * L22 + b1 * L21 + b21 * L22 + L22)) +
                       A * b1 * (1.0 - A * b1 * L1) - b1 * b1 * te * L1 -
                       te * dir2 * (b1 * (b23 * L22 + L21) + b21 * L22) - b22 * t1 * (b22 * L22 + L21));
    const double pos = b1 * b23 + b1 + b21;
    o.penalty = -s2sv * p.Gamma * (b22 * b22 * t1 + (A * A + te) * pos * pos);
    o.err_p1 = sv2 * ((A * b1 * L1 - 1.0) * (A * b1 * L1 - 1.0) + b1 * b1 * L1 * L1 * te + L1 * L1 * t1);
    o.loss_NT1 = s2sv * L1 * t1;
    o.loss_NT2 = s2sv * L22;

    const auto mom = outcomes_from_moments(e, p);
    o.pi_HFT_holding = mom.pi_HFT_holding;
    o.pi_HFT_impact = mom.pi_HFT_impact;
    o.err_p2 = mom.err_p2;
    return o;
}

} // namespace kylehft
