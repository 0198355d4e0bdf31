#pragma once

// Limit regimes that need the general solver: the beta1/theta1 slope as
// theta1 -> 0, the duopolistic equilibrium at theta_eps = 0, and the
// existence boundary Gamma~(theta1) separating the two.

#include "kylehft/asymptotics.hpp"
#include "kylehft/bisection.hpp"
#include "kylehft/error.hpp"
#include "kylehft/model.hpp"
#include "kylehft/newton.hpp"
#include "kylehft/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace kylehft {

/// lim beta1 / theta1 as theta1 -> 0, from solves at theta1 = 1e-4, 1e-5, 1e-6
/// and Aitken extrapolation of the ratio sequence.
inline double zeta(double theta_eps, double Gamma, const SolverConfig& cfg = {}) {
    std::array<double, 3> r{};
    const std::array<double, 3> t1s{1e-4, 1e-5, 1e-6};
    ModelParams prev;
    prev.theta1 = t1s[0];
    prev.theta_eps = theta_eps;
    prev.Gamma = Gamma;
    Equilibrium e = solve_robust(prev, cfg).best();
    r[0] = e.beta1 / t1s[0];
    for (std::size_t k = 1; k < 3; ++k) {
        ModelParams p = prev;
        p.theta1 = t1s[k];
        auto next = track_root(e, prev, p, cfg);
        if (!next) throw Error(ErrorKind::NoConvergence, "zeta: continuation in theta1 failed");
        e = *next;
        prev = p;
        r[k] = e.beta1 / t1s[k];
    }
    const double d1 = r[1] - r[0];
    const double d2 = r[2] - r[1];
    const double den = d2 - d1;
    if (std::abs(den) <= 1e-14 * std::abs(r[2]) || std::abs(d2) >= std::abs(d1)) return r[2];
    return r[2] - d2 * d2 / den;
}

inline Theta1ZeroLimit solve_theta1_zero_with_zeta(double theta_eps, double Gamma, double sigma_v = 1.0,
                                                   double sigma_2 = 1.0) {
    auto lim = solve_theta1_zero(theta_eps, Gamma, sigma_v, sigma_2);
    if (theta_eps > 0.0 || Gamma > 0.0) lim.zeta = zeta(theta_eps, Gamma);
    return lim;
}

// ---------------------------------------------------------------------------
// Duopolistic equilibrium (theta_eps = 0, HFT observes v - p0 directly).

struct DuopolySoc {
    bool lambda22_positive = false;
    bool period1_curvature = false; // 4G(L1 - L21 + L22) + 4 L1 L22 - L21^2 > 0
    bool all() const { return lambda22_positive && period1_curvature; }
};

/// Intensity form; beta1 and beta21 act on v - p0 and are scaled by sigma_v/sigma_2.
struct DuopolyEquilibrium {
    double Lambda1 = 0.0;
    double Lambda21 = 0.0;
    double Lambda22 = 0.0;
    double A = 0.0;
    double beta1 = 0.0;
    double beta21 = 0.0;
    double beta22 = 0.0;
    double beta23 = 0.0;
    DuopolySoc soc_ok;
    double residual_norm = 0.0;

    /// Same market written in the signal-based form: with theta_eps = 0 the
    /// signal is A (v - p0), so the betas on it are the duopoly betas over A.
    Equilibrium as_signal_form() const {
        Equilibrium e;
        e.Lambda1 = Lambda1;
        e.Lambda21 = Lambda21;
        e.Lambda22 = Lambda22;
        e.A = A;
        e.beta1 = beta1 / A;
        e.beta21 = beta21 / A;
        e.beta22 = beta22;
        e.beta23 = beta23;
        e.residual_norm = residual_norm;
        e.soc_ok = {soc_ok.lambda22_positive, soc_ok.period1_curvature, A > 0.0};
        return e;
    }
};

inline Triple duopoly_system(double L1, double L21, double L22, double G, double t1) {
    const double L1s = L1 * L1, L1c = L1s * L1;
    const double a = L21, a2 = a * a, a3 = a2 * a, a4 = a3 * a, a5 = a4 * a;
    const double c = L22, c2 = c * c, c3 = c2 * c, c4 = c3 * c;
    const double G2 = G * G, G3 = G2 * G, G4 = G3 * G;

    Triple out;
    out[0] = 4.0 * G2 *
                 (16.0 * L1c * t1 - 24.0 * L1s * t1 * (a - c) +
                  3.0 * L1 * (3.0 * a2 * t1 - 6.0 * a * c * t1 + 3.0 * c2 * t1 - 1.0) + 3.0 * (a - c)) +
             2.0 * G *
                 (48.0 * L1c * c * t1 - 4.0 * L1s * t1 * (2.0 * a2 + 9.0 * a * c - 9.0 * c2) +
                  2.0 * L1 * (3.0 * a3 * t1 - 3.0 * a2 * c * t1 + a - 6.0 * c) - 2.0 * a2 + 12.0 * a * c - 9.0 * c2) +
             36.0 * L1c * c2 * t1 - 12.0 * L1s * a2 * c * t1 + L1 * (a4 * t1 + a2 - 9.0 * c2) - a2 * (a - 3.0 * c);

    // Leading factor 16: with 6 the Lambda21 pricing condition is violated
    // by a term proportional to Gamma^4.
    out[1] =
        16.0 * G4 *
            (4.0 * L1s * a * (4.0 * c2 + 1.0) * t1 +
             4.0 * L1 * (-c2 * (6.0 * a2 * t1 + 1.0) - 2.0 * a2 * t1 + 6.0 * a * c3 * t1 + a * c * t1) +
             a3 * (9.0 * c2 + 4.0) * t1 - 2.0 * a2 * c * (9.0 * c2 + 2.0) * t1 + a * c2 * (9.0 * c2 * t1 + t1 + 4.0) -
             3.0 * c3) +
        8.0 * G3 * c *
            (8.0 * L1s * a * (14.0 * c2 + 3.0) * t1 -
             2.0 * L1 *
                 (4.0 * a3 * c * t1 + a2 * (66.0 * c2 + 19.0) * t1 - a * c * (66.0 * c2 * t1 + 7.0 * t1 + 2.0) + 17.0 * c2) +
             6.0 * a4 * c * t1 + 2.0 * a3 * (15.0 * c2 + 7.0) * t1 - a2 * c * (72.0 * c2 * t1 + 9.0 * t1 + 4.0) +
             a * c2 * (36.0 * c2 * t1 + t1 + 34.0) - 21.0 * c3) +
        4.0 * G2 * c *
            (4.0 * L1s * a * c * (73.0 * c2 + 13.0) * t1 -
             2.0 * L1 *
                 (a3 * (22.0 * c2 * t1 + t1) + 30.0 * a2 * (4.0 * c3 + c) * t1 -
                  a * c2 * (120.0 * c2 * t1 + 5.0 * t1 + 11.0) + 53.0 * c3) +
             a5 * c * t1 + 2.0 * a4 * (12.0 * c2 * t1 + t1) + a3 * c * (12.0 * c2 + 13.0) * t1 -
             a2 * c2 * (72.0 * c2 * t1 + t1 + 19.0) + a * c3 * (36.0 * c2 * t1 - 2.0 * t1 + 97.0) - 48.0 * c4) +
        2.0 * G * c2 *
            (48.0 * L1s * a * c * (7.0 * c2 + 1.0) * t1 -
             2.0 * L1 *
                 (2.0 * a3 * (20.0 * c2 * t1 + t1) + a2 * c * (72.0 * c2 + 19.0) * t1 +
                  2.0 * a * c2 * (-36.0 * c2 * t1 + t1 - 10.0) + 72.0 * c3) +
             4.0 * a5 * c * t1 + 2.0 * a4 * (12.0 * c2 * t1 + t1) + 8.0 * a3 * c * (1.0 - 3.0 * c2) * t1 -
             a2 * c2 * (t1 + 28.0) + 108.0 * a * c3 - 36.0 * c4) +
        c3 * (16.0 * L1s * a * c * (9.0 * c2 + 1.0) * t1 -
              2.0 * L1 * (a3 * (24.0 * c2 * t1 + t1) + 5.0 * a2 * c * t1 - 12.0 * a * c2 + 36.0 * c3) +
              a * (4.0 * a4 * c * t1 + a3 * t1 + a2 * c * t1 - 12.0 * a * c2 + 36.0 * c3));

    out[2] =
        16.0 * G4 *
            (c2 * (t1 * (16.0 * L1s - 24.0 * L1 * a + 9.0 * a2 - 2.0) + 1.0) - 2.0 * t1 * (2.0 * L1s - 3.0 * L1 * a + a2) +
             6.0 * c3 * t1 * (4.0 * L1 - 3.0 * a) + c * (5.0 * a * t1 - 6.0 * L1 * t1) + 9.0 * c4 * t1) +
        8.0 * G3 *
            (2.0 * c *
                 (c2 * (56.0 * L1s * t1 - 4.0 * t1 + 5.0) - 14.0 * L1s * t1 + 66.0 * L1 * c3 * t1 - 17.0 * L1 * c * t1 +
                  18.0 * c4 * t1) +
             2.0 * a2 * t1 * (-4.0 * L1 * c2 + L1 + 15.0 * c3 - 3.0 * c) +
             a * c * (-132.0 * L1 * c2 * t1 + 32.0 * L1 * t1 - 72.0 * c3 * t1 + c * (21.0 * t1 - 2.0)) +
             2.0 * a3 * (3.0 * c2 - 1.0) * t1) +
        4.0 * G2 * c *
            (c * (c2 * (292.0 * L1s * t1 - 8.0 * t1 + 37.0) - 72.0 * L1s * t1 + 240.0 * L1 * c3 * t1 - 64.0 * L1 * c * t1 +
                  36.0 * c4 * t1) +
             a2 * (-44.0 * L1 * c2 * t1 + 12.0 * L1 * t1 + 12.0 * c3 * t1 + c * t1 + c) +
             a * c * (-240.0 * L1 * c2 * t1 + 54.0 * L1 * t1 - 72.0 * c3 * t1 + c * (23.0 * t1 - 14.0)) + a4 * c * t1 +
             8.0 * a3 * (3.0 * c2 - 1.0) * t1) +
        2.0 * G * c *
            (4.0 * c2 * (3.0 * c2 * (28.0 * L1s * t1 + 5.0) - 20.0 * L1s * t1 + 36.0 * L1 * c3 * t1 - 10.0 * L1 * c * t1) +
             2.0 * a2 * c * (-40.0 * L1 * c2 * t1 + 11.0 * L1 * t1 - 12.0 * c3 * t1 + c * (5.0 * t1 + 2.0)) +
             2.0 * a * c2 * (-72.0 * L1 * c2 * t1 + 13.0 * L1 * t1 + c * (t1 - 16.0)) + a4 * (4.0 * c2 - 1.0) * t1 +
             a3 * c * (24.0 * c2 - 7.0) * t1) +
        c2 * (4.0 * (9.0 * c4 * (4.0 * L1s * t1 + 1.0) - 8.0 * L1s * c2 * t1) +
              a2 * c * (-48.0 * L1 * c2 * t1 + 12.0 * L1 * t1 + c * (t1 + 4.0)) - 4.0 * a * c2 * (L1 * t1 + 6.0 * c) +
              a4 * (4.0 * c2 - 1.0) * t1);
    return out;
}

/// Strategies implied by (Lambda1, Lambda21, Lambda22) through their closed forms.
inline DuopolyEquilibrium duopoly_from_lambdas(double L1, double L21, double L22, double G) {
    using detail::checked_div;
    DuopolyEquilibrium d;
    d.Lambda1 = L1;
    d.Lambda21 = L21;
    d.Lambda22 = L22;
    d.A = checked_div(4.0 * G * (L1 - L21 + L22) + L22 * (2.0 * L1 - L21),
                      L22 * (G * (8.0 * L1 - 6.0 * L21 + 6.0 * L22) + 6.0 * L1 * L22 - L21 * L21), "duopoly A");
    d.beta1 = checked_div(-2.0 * G + L21 - 3.0 * L22,
                          G * (-8.0 * L1 + 6.0 * L21 - 6.0 * L22) - 6.0 * L1 * L22 + L21 * L21, "duopoly beta1");
    d.beta21 = checked_div(1.0 - L22 * d.A, 2.0 * (L22 + G), "duopoly beta21");
    d.beta22 = -L21 / (2.0 * (L22 + G));
    d.beta23 = -(2.0 * G + L21) / (2.0 * (L22 + G));
    d.soc_ok.lambda22_positive = L22 > 0.0;
    d.soc_ok.period1_curvature = 4.0 * G * (L1 - L21 + L22) + 4.0 * L1 * L22 - L21 * L21 > 0.0;
    return d;
}

/// Dealer pricing conditions recomputed from the strategies: Lambda1 from
/// period-1 flow and (Lambda21, Lambda22) from the regression on both flows.
inline Triple duopoly_pricing_residual(const DuopolyEquilibrium& d, double theta1) {
    const double b1 = d.beta1;
    const double c = d.A + d.beta21 + d.beta23 * b1;
    const double v1 = b1 * b1 + theta1;
    const double c12 = b1 * c + d.beta22 * theta1;
    const double v2 = c * c + d.beta22 * d.beta22 * theta1 + 1.0;
    const double det = detail::checked_div(1.0, v1 * v2 - c12 * c12, "duopoly flow covariance");
    return {d.Lambda1 - b1 / v1, d.Lambda21 - (b1 * v2 - c * c12) * det, d.Lambda22 - (c * v1 - b1 * c12) * det};
}

inline constexpr double kDuopolyPricingTol = 1e-8;

struct DuopolyReport {
    std::vector<DuopolyEquilibrium> roots;
    int rejected = 0;
    SolveStatus status = SolveStatus::NoRoot;

    const DuopolyEquilibrium& best() const {
        if (status == SolveStatus::OnlySOCViolating) {
            throw Error(ErrorKind::OnlySOCViolating, "every duopoly root violates a second-order inequality");
        }
        if (roots.empty()) throw Error(ErrorKind::NoRoot, "duopoly system: no start converged");
        return roots.front();
    }
};

inline std::vector<Triple> duopoly_multistart() {
    static constexpr std::array<double, 4> kL1{0.2, 0.5, 1.0, 2.0};
    static constexpr std::array<double, 4> kL21{-0.5, 0.2, 0.5, 1.0};
    static constexpr std::array<double, 4> kL22{0.1, 0.3, 0.5, 0.8};
    std::vector<Triple> g;
    for (double a : kL1)
        for (double b : kL21)
            for (double c : kL22) g.push_back({a, b, c});
    return g;
}

/// Multistart Newton on the three polynomials in (Lambda1, Lambda21, Lambda22).
/// Roots must satisfy both inequalities, give A > 0 and reproduce the dealer
/// pricing conditions; the last test discards near-origin zeros of the
/// polynomials that are not equilibria.
inline DuopolyReport solve_duopoly_all(double theta1, double Gamma, const SolverConfig& cfg = {}) {
    if (!(theta1 > 0.0) || !std::isfinite(theta1)) throw Error(ErrorKind::InvalidParameter, "theta1 must be > 0");
    if (!(Gamma >= 0.0) || !std::isfinite(Gamma)) throw Error(ErrorKind::InvalidParameter, "Gamma must be >= 0");
    cfg.validate();
    NewtonOptions opt;
    opt.tol = cfg.residual_tol;
    opt.max_iters = cfg.max_iters;
    opt.damping = cfg.damping;
    auto F = [&](const Triple& x) { return duopoly_system(x[0], x[1], x[2], Gamma, theta1); };

    DuopolyReport rep;
    std::vector<Triple> seen;
    const auto starts = cfg.multistart_grid.empty() ? duopoly_multistart() : cfg.multistart_grid;
    for (const auto& s : starts) {
        const auto x = newton3(F, s, opt);
        if (!x) continue;
        const bool dup = std::any_of(seen.begin(), seen.end(),
                                     [&](const Triple& y) { return max_abs_diff(*x, y) < cfg.dedup_tol; });
        if (dup) continue;
        seen.push_back(*x);
        try {
            auto d = duopoly_from_lambdas((*x)[0], (*x)[1], (*x)[2], Gamma);
            d.residual_norm = max_abs(F(*x));
            const bool finite = std::isfinite(d.A) && std::isfinite(d.beta1) && std::isfinite(d.beta21);
            if (finite && d.soc_ok.all() && d.A > 0.0 &&
                max_abs(duopoly_pricing_residual(d, theta1)) < kDuopolyPricingTol) {
                rep.roots.push_back(d);
            } else {
                ++rep.rejected;
            }
        } catch (const Error&) {
            ++rep.rejected;
        }
    }
    std::stable_sort(rep.roots.begin(), rep.roots.end(), [](const auto& a, const auto& b) {
        return a.residual_norm < b.residual_norm;
    });
    rep.status = !rep.roots.empty() ? SolveStatus::Found
                 : rep.rejected > 0 ? SolveStatus::OnlySOCViolating
                                    : SolveStatus::NoRoot;
    return rep;
}

inline DuopolyEquilibrium solve_duopoly(double theta1, double Gamma, const SolverConfig& cfg = {}) {
    return solve_duopoly_all(theta1, Gamma, cfg).best();
}

// ---------------------------------------------------------------------------
// Existence boundary at theta_eps = 0.

inline bool general_root_exists_at_zero_noise(double theta1, double Gamma, const SolverConfig& cfg = {}) {
    ModelParams p;
    p.theta1 = theta1;
    p.theta_eps = 0.0;
    p.Gamma = Gamma;
    return solve_robust(p, cfg).status == SolveStatus::Found;
}

struct GammaTildeOptions {
    double probe_max = 2.0;
    int probe_points = 41;
    double width = 1e-4;
};

struct GammaTildeBracket {
    double lo = 0.0; // general solver fails at theta_eps = 0
    double hi = 0.0; // general solver succeeds at theta_eps = 0
};

/// Bracket of the smallest Gamma at which the general solver finds an
/// SOC-passing root with theta_eps = 0, located on a probe grid and refined
/// by bisection. lo == hi == 0 when the root already exists at Gamma = 0.
inline GammaTildeBracket find_gamma_tilde_bracket(double theta1, const SolverConfig& cfg = {},
                                                  const GammaTildeOptions& o = {}) {
    if (!(theta1 > 0.0) || !std::isfinite(theta1)) throw Error(ErrorKind::InvalidParameter, "theta1 must be > 0");
    if (o.probe_points < 2 || !(o.probe_max > 0.0) || !(o.width > 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "gamma-tilde probe grid");
    }
    std::vector<double> grid(o.probe_points);
    std::vector<bool> ok(o.probe_points);
    for (int k = 0; k < o.probe_points; ++k) {
        grid[k] = o.probe_max * k / (o.probe_points - 1);
        ok[k] = general_root_exists_at_zero_noise(theta1, grid[k], cfg);
    }
    const auto first_it = std::find(ok.begin(), ok.end(), true);
    if (first_it == ok.end()) throw Error(ErrorKind::BoundaryNotBracketed, "no root on the Gamma probe grid");
    const auto first = static_cast<int>(first_it - ok.begin());
    if (std::find(first_it, ok.end(), false) != ok.end()) {
        std::string pattern;
        for (bool b : ok) pattern += b ? '1' : '0';
        throw Error(ErrorKind::PredicateMonotoneViolation, "existence pattern over Gamma: " + pattern);
    }
    if (first == 0) return {};
    const auto br = bisect_predicate([&](double g) { return general_root_exists_at_zero_noise(theta1, g, cfg); },
                                     grid[first - 1], grid[first], o.width);
    return {br.first, br.second};
}

inline double find_gamma_tilde(double theta1, const SolverConfig& cfg = {}, const GammaTildeOptions& o = {}) {
    return find_gamma_tilde_bracket(theta1, cfg, o).hi;
}

} // namespace kylehft
