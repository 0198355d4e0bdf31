#pragma once

// General equilibrium as a 3-unknown root-finding problem in (Lambda22, A, beta1).

#include "kylehft/asymptotics.hpp"
#include "kylehft/error.hpp"
#include "kylehft/model.hpp"
#include "kylehft/newton.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace kylehft {

struct SolverConfig {
    double residual_tol = 1e-12;
    int max_iters = 200;
    std::vector<Triple> multistart_grid; // empty: default_multistart(params)
    double damping = 1.0;
    double dedup_tol = 1e-6;

    void validate() const {
        if (!(residual_tol > 0.0)) throw Error(ErrorKind::InvalidParameter, "residual_tol must be > 0");
        if (max_iters < 1) throw Error(ErrorKind::InvalidParameter, "max_iters must be >= 1");
        if (!(damping > 0.0 && damping <= 1.0)) throw Error(ErrorKind::InvalidParameter, "damping must be in (0,1]");
        if (!(dedup_tol > residual_tol)) throw Error(ErrorKind::InvalidParameter, "dedup_tol must exceed residual_tol");
    }
};

enum class SolveStatus { Found, NoRoot, OnlySOCViolating };

inline std::string_view to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Found: return "Found";
    case SolveStatus::NoRoot: return "NoRoot";
    case SolveStatus::OnlySOCViolating: return "OnlySOCViolating";
    }
    return "NoRoot";
}

struct SolveReport {
    std::vector<Equilibrium> roots;
    int rejected = 0;
    int converged_starts = 0;
    SolveStatus status = SolveStatus::NoRoot;

    /// First (smallest-residual) root, or the matching Error when none passed.
    const Equilibrium& best() const {
        if (status == SolveStatus::OnlySOCViolating) {
            throw Error(ErrorKind::OnlySOCViolating, "every converged root violates a second-order condition");
        }
        if (roots.empty()) throw Error(ErrorKind::NoRoot, "no multistart point converged");
        return roots.front();
    }
};

inline Triple to_triple(const Equilibrium& e) { return {e.Lambda22, e.A, e.beta1}; }

/// Dealer-pricing consistency of Lambda21 and Lambda22 and the HFT period-1
/// first-order condition, each written as unknown minus implied value.
inline Triple residual_map(double Lambda22, double A, double beta1, const ModelParams& p) {
    using detail::checked_div;
    const auto d = derived_coefficients(Lambda22, A, beta1, p);
    const double t1 = p.theta1, te = p.theta_eps, G = p.Gamma;
    const double b1 = beta1;
    const double D = d.beta21 + b1 * (d.beta23 - d.beta22);
    const double E = 1.0 + D;
    const double A2 = A * A;
    const double sigma = A2 * (t1 * E * E + (1.0 + te) * b1 * b1) + t1 * te * D * D + (b1 * b1 * te + t1);
    if (!(std::abs(sigma) >= detail::kTinyDenominator)) {
        throw Error(ErrorKind::DegenerateDenominator, "order-flow covariance determinant");
    }
    Triple r;
    r[0] = d.Lambda21 - A * (-t1 * d.beta22 * E + b1 - te * b1 * (d.beta21 + d.beta23 * b1)) / sigma;
    r[1] = Lambda22 - A * (t1 * E + te * b1 * b1) / sigma;
    const double soc = 2.0 * (d.Lambda1 + G - (Lambda22 + G) * d.beta23 * d.beta23);
    r[2] = b1 - checked_div(A / (A2 + te) + 2.0 * (Lambda22 + G) * d.beta21 * d.beta23, soc, "period-1 curvature");
    return r;
}

inline Triple residual_map(const Triple& x, const ModelParams& p) { return residual_map(x[0], x[1], x[2], p); }

/// The three equilibrium conditions in the fully substituted form, kept
/// term-for-term as an independent check of residual_map. The first is a
/// rational expression, the other two are polynomials.
inline Triple expanded_system(double Lambda22, double A, double beta1, const ModelParams& p) {
    const double L = Lambda22, G = p.Gamma, te = p.theta_eps, t1 = p.theta1, b = beta1;
    const double L2 = L * L, L3 = L2 * L;
    const double G2 = G * G, G3 = G2 * G;
    const double te2 = te * te;
    const double A2 = A * A, A3 = A2 * A, A4 = A3 * A, A5 = A4 * A, A6 = A5 * A, A7 = A6 * A;
    const double b2 = b * b, b3 = b2 * b;
    const double GL = G + L, G2L = 2.0 * G + L;

    Triple out;
    {
        const double num = A4 * (-L) * (L * G2L - 4.0 * b * G * GL) + A3 * L * ((2.0 * b + 3.0) * G + 2.0 * b * L + L) +
                           A2 * (4.0 * b * te * G2 * L + G * (2.0 * (2.0 * b - 1.0) * te * L2 - 1.0) - 2.0 * te * L3) +
                           A * (2.0 * b + 3.0) * te * L * GL - te * GL;
        const double q = A3 * (4.0 * b * G * GL - L * G2L) + A2 * G + 2.0 * A * te * GL * (2.0 * b * G - L) + te * GL;
        const double inner = 4.0 * A * b / (A2 * b2 + b2 * te + t1) -
                             q * q / (A2 * b2 * (A2 + te) * (A2 + te) * GL * G2L * G2L) + 4.0 * G;
        out[0] = b - num / (b * (A2 + te) * (A2 + te) * GL * G2L * inner);
    }
    {
        const double c7 = (2.0 * (b - 1.0) * G - L) * L *
                          (4.0 * ((te + t1 + 1.0) * G2 + 2.0 * (te + 1.0) * L * G + (te + 1.0) * L2) * b2 -
                           4.0 * G * G2L * t1 * b + G2L * G2L * t1);
        const double c6 = -(8.0 * te * G * GL * GL * b3 -
                            4.0 * ((te + t1 - 1.0) * G3 + L * (2.0 * te - t1 - 3.0) * G2 + (te - 3.0) * L2 * G - L3) * b2 +
                            4.0 * G * (2.0 * G2 - L * G - L2) * t1 * b - (G - L) * G2L * G2L * t1);
        const double c5 =
            8.0 * te * G * L * ((2.0 * te + 3.0 * t1 + 3.0) * G2 + 2.0 * (2.0 * te + 3.0) * L * G + (2.0 * te + 3.0) * L2) * b3 -
            2.0 * te *
                (4.0 * L * (2.0 * te + 7.0 * t1 + 3.0) * G3 + (2.0 * L2 * (11.0 * te + 8.0 * t1 + 16.0) - 1.0) * G2 +
                 (4.0 * (5.0 * te + 7.0) * L3 - 2.0 * L) * G + L2 * ((6.0 * te + 8.0) * L2 - 1.0)) *
                b2 +
            2.0 * G * ((11.0 * te + 4.0) * L3 + 4.0 * G2 * (6.0 * te * L + L) + G * (8.0 * (4.0 * te + 1.0) * L2 - 1.0)) * t1 * b -
            G2L * (2.0 * (3.0 * te + 2.0) * L3 + 4.0 * G2 * (2.0 * te * L + L) + G * (2.0 * (7.0 * te + 4.0) * L2 - 1.0)) * t1;
        const double c4 =
            -16.0 * te2 * G * GL * GL * b3 +
            4.0 * te *
                ((2.0 * te + 3.0 * t1 - 1.0) * G3 + L * (6.0 * te - t1 - 3.0) * G2 + 3.0 * (2.0 * te - 1.0) * L2 * G +
                 (2.0 * te - 1.0) * L3) *
                b2 -
            8.0 * te * G2 * G2L * t1 * b + GL * ((8.0 * te + 4.0) * G2 + 4.0 * (2.0 * te * L + L) * G + te * L2) * t1;
        const double c3 =
            te * (8.0 * te * G * L * ((te + 3.0 * t1 + 3.0) * G2 + 2.0 * (te + 3.0) * L * G + (te + 3.0) * L2) * b3 -
                  4.0 * te * L *
                      (2.0 * (te + 5.0 * t1 + 3.0) * G3 + L * (6.0 * te + 7.0 * t1 + 17.0) * G2 +
                       2.0 * (3.0 * te + 8.0) * L2 * G + (2.0 * te + 5.0) * L3) *
                      b2 +
                  2.0 * G *
                      (8.0 * (te + 1.0) * L3 + 4.0 * (5.0 * te + 4.0) * G * L2 + 4.0 * (3.0 * te + 2.0) * G2 * L - L - 2.0 * G) *
                      t1 * b -
                  L * GL * (8.0 * (te + 2.0) * G2 + 4.0 * (4.0 * te + 7.0) * L * G + 4.0 * (2.0 * te + 3.0) * L2 - 1.0) * t1);
        const double c2 =
            4.0 * te *
            (-2.0 * te2 * G * GL * GL * b3 +
             te * ((te + 3.0 * t1 + 1.0) * G3 + L * (4.0 * te + t1 + 3.0) * G2 + (5.0 * te + 3.0) * L2 * G + (2.0 * te + 1.0) * L3) *
                 b2 -
             te * G * (2.0 * G2 + 3.0 * L * G + L2) * t1 * b + GL * GL * ((te + 2.0) * G + 2.0 * te * L + L) * t1);
        const double c1 =
            2.0 * te2 *
            (4.0 * te * G * L * ((t1 + 1.0) * G2 + 2.0 * L * G + L2) * b3 -
             te * GL * (4.0 * L3 + 8.0 * G * L2 + 4.0 * G2 * (t1 + 1.0) * L + L + G) * b2 +
             G * (4.0 * L3 + 8.0 * G * L2 + 4.0 * G2 * L - L - G) * t1 * b - GL * GL * (4.0 * L2 + 4.0 * G * L + 1.0) * t1);
        const double c0 = 4.0 * te2 * GL * (te * ((t1 + 1.0) * G2 + 2.0 * L * G + L2) * b2 + GL * GL * t1);
        out[1] = c7 * A7 + c6 * A6 + c5 * A5 + c4 * A4 + c3 * A3 + c2 * A2 + c1 * A + c0;
    }
    {
        out[2] = A4 * L *
                     (4.0 * b2 * (G2 * (te + t1 + 1.0) + 2.0 * (te + 1.0) * G * L + (te + 1.0) * L2) -
                      4.0 * b * G * t1 * G2L + t1 * G2L * G2L) -
                 2.0 * A3 * (2.0 * b2 * te * GL * GL - 2.0 * b * G2 * t1 + G * t1 * G2L) +
                 A2 * (4.0 * b2 * te * L * (G2 * (te + 2.0 * t1 + 2.0) + 2.0 * (te + 2.0) * G * L + (te + 2.0) * L2) -
                       4.0 * b * te * G * L * t1 * G2L +
                       t1 * (4.0 * (te + 1.0) * G2 * L + 8.0 * (te + 1.0) * G * L2 + 4.0 * (te + 1.0) * L3 - 2.0 * G - L)) -
                 4.0 * A * te * (b2 * te * GL * GL - b * G2 * t1 + t1 * GL * GL) +
                 4.0 * te * L * (b2 * te * (G2 * (t1 + 1.0) + 2.0 * G * L + L2) + t1 * GL * GL);
    }
    return out;
}

/// Newton from x0 on residual_map. beta1 scales like theta1 when theta1 is
/// small, so its finite-difference step floor follows it down.
inline std::optional<Triple> newton(const Triple& x0, const ModelParams& p, const SolverConfig& cfg) {
    NewtonOptions opt;
    opt.tol = cfg.residual_tol;
    opt.max_iters = cfg.max_iters;
    opt.damping = cfg.damping;
    opt.step_scale = {1.0, 1.0, std::min(1.0, p.theta1)};
    return newton3([&](const Triple& x) { return residual_map(x, p); }, x0, opt);
}

/// 4 x 4 x 4 grid in (Lambda22, A, beta1), plus limit-regime seeds when
/// Gamma is large or theta1 is small.
inline std::vector<Triple> default_multistart(const ModelParams& p) {
    static constexpr std::array<double, 4> kL22{0.05, 0.2, 0.5, 0.8};
    static constexpr std::array<double, 4> kA{0.3, 0.7, 1.0, 1.5};
    static constexpr std::array<double, 4> kB1{1e-3, 0.05, 0.2, 0.5};
    std::vector<Triple> grid;
    grid.reserve(70);
    for (double l : kL22)
        for (double a : kA)
            for (double b : kB1) grid.push_back({l, a, b});
    if (p.Gamma > 5.0) {
        const auto g = solve_gamma_inf(p.theta1, p.theta_eps);
        grid.push_back({g.Lambda22, g.A, g.beta});
    }
    if (p.theta1 < 0.01) {
        const auto z = solve_theta1_zero(p.theta_eps, p.Gamma);
        for (double mult : {1.0, 10.0, 100.0}) grid.push_back({z.Lambda22, z.alpha_norm, mult * p.theta1});
    }
    return grid;
}

/// Equilibrium at a converged triple, with SOC flags and residual norm filled.
inline Equilibrium equilibrium_at(const Triple& x, const ModelParams& p) {
    Equilibrium e = assemble_equilibrium(x[0], x[1], x[2], p);
    e.residual_norm = max_abs(residual_map(x, p));
    return e;
}

/// Newton from each start; distinct converged roots are split into
/// SOC-passing (returned) and SOC-violating (counted).
inline SolveReport solve_from(const ModelParams& p, const std::vector<Triple>& starts, const SolverConfig& cfg) {
    p.validate();
    cfg.validate();
    SolveReport rep;
    std::vector<Triple> seen;
    for (const auto& s : starts) {
        const auto x = newton(s, p, cfg);
        if (!x) continue;
        ++rep.converged_starts;
        const bool dup = std::any_of(seen.begin(), seen.end(),
                                     [&](const Triple& y) { return max_abs_diff(*x, y) < cfg.dedup_tol; });
        if (dup) continue;
        seen.push_back(*x);
        Equilibrium e;
        try {
            e = equilibrium_at(*x, p);
        } catch (const Error&) {
            ++rep.rejected;
            continue;
        }
        if (e.soc_ok.all()) {
            rep.roots.push_back(e);
        } else {
            ++rep.rejected;
        }
    }
    std::stable_sort(rep.roots.begin(), rep.roots.end(),
                     [](const Equilibrium& a, const Equilibrium& b) { return a.residual_norm < b.residual_norm; });
    if (!rep.roots.empty()) {
        rep.status = SolveStatus::Found;
    } else if (rep.rejected > 0) {
        rep.status = SolveStatus::OnlySOCViolating;
    } else {
        rep.status = SolveStatus::NoRoot;
    }
    return rep;
}

inline SolveReport solve(const ModelParams& p, const SolverConfig& cfg = {}) {
    p.validate();
    const auto starts = cfg.multistart_grid.empty() ? default_multistart(p) : cfg.multistart_grid;
    return solve_from(p, starts, cfg);
}

/// Root nearest (max-norm in the free unknowns) to a reference triple.
inline const Equilibrium* nearest_root(const SolveReport& rep, const Triple& ref) {
    const Equilibrium* best = nullptr;
    double bd = std::numeric_limits<double>::infinity();
    for (const auto& e : rep.roots) {
        const double d = max_abs_diff(to_triple(e), ref);
        if (d < bd) {
            bd = d;
            best = &e;
        }
    }
    return best;
}

namespace detail {

inline double path_point(double a, double b, double s) {
    if (a > 0.0 && b > 0.0) return a * std::pow(b / a, s);
    return a + (b - a) * s;
}

inline ModelParams params_on_path(const ModelParams& from, const ModelParams& to, double s) {
    ModelParams p = to;
    p.theta1 = path_point(from.theta1, to.theta1, s);
    p.theta_eps = path_point(from.theta_eps, to.theta_eps, s);
    p.Gamma = path_point(from.Gamma, to.Gamma, s);
    return p;
}

} // namespace detail

/// Natural-parameter continuation of an SOC-passing root from `from` to `to`.
/// Positive parameters move geometrically, others linearly; the secant
/// predictor extrapolates positive unknowns in log space. The step is halved
/// on failure and doubled on success.
inline std::optional<Equilibrium> track_root(const Equilibrium& start, const ModelParams& from, const ModelParams& to,
                                             const SolverConfig& cfg = {}, double min_step = 1e-6) {
    Triple x = to_triple(start);
    std::optional<Triple> prev;
    double s = 0.0, ds = 0.25, prev_ds = 0.0;
    while (s < 1.0) {
        ds = std::min(ds, 1.0 - s);
        Triple guess = x;
        if (prev && prev_ds > 0.0) {
            const double w = ds / prev_ds;
            for (int i = 0; i < 3; ++i) {
                const double a = (*prev)[i], b = x[i];
                guess[i] = (a > 0.0 && b > 0.0) ? b * std::pow(b / a, w) : b + w * (b - a);
            }
        }
        const ModelParams p = detail::params_on_path(from, to, s + ds);
        auto accept = [&](const std::optional<Triple>& y) {
            if (!y) return false;
            try {
                return equilibrium_at(*y, p).soc_ok.all();
            } catch (const Error&) {
                return false;
            }
        };
        auto y = newton(guess, p, cfg);
        bool ok = accept(y);
        if (!ok && prev) {
            y = newton(x, p, cfg);
            ok = accept(y);
        }
        if (!ok) {
            ds *= 0.5;
            if (ds < min_step) return std::nullopt;
            continue;
        }
        prev = x;
        prev_ds = ds;
        x = *y;
        s += ds;
        ds *= 2.0;
    }
    ModelParams end = to;
    return equilibrium_at(x, end);
}

/// solve(), falling back to continuation from nearby anchors (theta1 raised
/// to 1e-4, theta_eps and Gamma raised to 1) when no start converges to an
/// SOC-passing root.
inline SolveReport solve_robust(const ModelParams& p, const SolverConfig& cfg = {}) {
    SolveReport rep = solve(p, cfg);
    if (rep.status == SolveStatus::Found) return rep;
    std::vector<ModelParams> anchors;
    auto add = [&](double t1, double te, double g) {
        ModelParams a = p;
        a.theta1 = t1;
        a.theta_eps = te;
        a.Gamma = g;
        anchors.push_back(a);
    };
    const double t1 = std::max(p.theta1, 1e-4);
    if (t1 > p.theta1) add(t1, p.theta_eps, p.Gamma);
    if (p.theta_eps < 1.0) add(t1, 1.0, p.Gamma);
    if (p.Gamma < 1.0) add(t1, p.theta_eps, 1.0);
    if (p.theta_eps < 1.0 && p.Gamma < 1.0) add(t1, 1.0, 1.0);
    for (const auto& a : anchors) {
        const SolveReport ra = solve(a, cfg);
        if (ra.status != SolveStatus::Found) continue;
        if (auto e = track_root(ra.roots.front(), a, p, cfg)) {
            rep.roots.push_back(*e);
            rep.status = SolveStatus::Found;
            return rep;
        }
    }
    return rep;
}

} // namespace kylehft
