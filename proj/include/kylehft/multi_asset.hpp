#pragma once

// Two-asset extension. In the full variant IT trades both assets and HFT
// sees a noisy copy of both orders. In the spillover variant IT trades asset 1
// only, HFT uses the single signal on both assets, and each asset's dealers
// price from that asset's own order flow.
//
// Both variants share one representation: alpha, beta1 and beta21 are 2x2,
// and the spillover variant keeps alpha = diag(alpha, 0) with zero second
// columns in beta1 and beta21.

#include "kylehft/error.hpp"
#include "kylehft/model.hpp"
#include "kylehft/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>

namespace kylehft {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

enum class MultiVariant { Full, Spillover };

inline std::string_view to_string(MultiVariant v) { return v == MultiVariant::Full ? "full" : "spillover"; }

struct MultiParams {
    Vec2 p0{0.0, 0.0};
    Vec2 sigma_v{1.0, 1.0};
    double rho = 0.0;
    Vec2 sigma_eps{1.0, 1.0}; // spillover variant uses sigma_eps[0]
    Vec2 sigma_1{1.0, 1.0};
    Vec2 sigma_2{1.0, 1.0};
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma3 = 0.0;

    Mat2 Sigma_v() const {
        Mat2 s;
        s << sigma_v[0] * sigma_v[0], rho * sigma_v[0] * sigma_v[1], rho * sigma_v[0] * sigma_v[1],
            sigma_v[1] * sigma_v[1];
        return s;
    }
    Mat2 Sigma_eps() const { return sigma_eps.cwiseProduct(sigma_eps).asDiagonal(); }
    Mat2 Sigma_1() const { return sigma_1.cwiseProduct(sigma_1).asDiagonal(); }
    Mat2 Sigma_2() const { return sigma_2.cwiseProduct(sigma_2).asDiagonal(); }
    Mat2 gamma_mat() const {
        Mat2 g;
        g << gamma1, gamma3, gamma3, gamma2;
        return g;
    }

    void validate() const {
        auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidParameter, m); };
        auto positive = [](const Vec2& v) { return v.allFinite() && v.minCoeff() > 0.0; };
        if (!p0.allFinite()) fail("p0 must be finite");
        if (!positive(sigma_v)) fail("sigma_v entries must be > 0");
        if (!(std::abs(rho) < 1.0)) fail("|rho| must be < 1");
        if (!positive(sigma_eps)) fail("sigma_eps entries must be > 0");
        if (!positive(sigma_1)) fail("sigma_1 entries must be > 0");
        if (!positive(sigma_2)) fail("sigma_2 entries must be > 0");
        if (!std::isfinite(gamma1) || !std::isfinite(gamma2) || !std::isfinite(gamma3)) fail("gamma must be finite");
        if (gamma1 < 0.0 || gamma2 < 0.0 || gamma1 * gamma2 - gamma3 * gamma3 < -1e-15) {
            fail("gamma matrix must be positive semidefinite");
        }
    }

    /// Daily-volatility calibration with noise in millions of shares and
    /// gamma1 = gamma2 = 4 gamma3.
    static MultiParams baseline(double gamma1) {
        MultiParams p;
        p.p0 = {1.0, 1.0};
        p.sigma_v = Vec2::Constant(std::sqrt(0.00036));
        p.rho = 0.8;
        p.sigma_eps = {0.2, 0.2};
        p.sigma_1 = {0.6, 0.5};
        p.sigma_2 = {1.0, 1.0};
        p.gamma1 = gamma1;
        p.gamma2 = gamma1;
        p.gamma3 = gamma1 / 4.0;
        return p;
    }

    /// Exchange the labels of the two assets.
    MultiParams swapped() const {
        MultiParams q = *this;
        auto sw = [](Vec2 v) { return Vec2(v[1], v[0]); };
        q.p0 = sw(p0);
        q.sigma_v = sw(sigma_v);
        q.sigma_eps = sw(sigma_eps);
        q.sigma_1 = sw(sigma_1);
        q.sigma_2 = sw(sigma_2);
        std::swap(q.gamma1, q.gamma2);
        return q;
    }
};

struct MultiPD {
    bool lambda2s = false;      // symmetric part of lambda2 (IT curvature)
    bool period2 = false;       // (lambda22 + gamma)_s
    bool period1 = false;       // period-1 HFT curvature
    bool all() const { return lambda2s && period2 && period1; }
};

struct MultiEquilibrium {
    MultiVariant variant = MultiVariant::Full;
    Mat2 lambda1 = Mat2::Zero();
    Mat2 lambda21 = Mat2::Zero();
    Mat2 lambda22 = Mat2::Zero();
    Mat2 alpha = Mat2::Zero();
    Mat2 beta1 = Mat2::Zero();
    Mat2 beta21 = Mat2::Zero();
    Mat2 beta22 = Mat2::Zero();
    Mat2 beta23 = Mat2::Zero();
    MultiPD pd_ok;
    double fixed_point_residual = 0.0;
    int iterations = 0;

    Mat2 beta() const { return beta21 + beta23 * beta1; }
    Mat2 lambda2() const { return lambda21 * beta1 + lambda22 * (Mat2::Identity() + beta()); }

    template <class F>
    void for_each(F&& f) {
        for (Mat2* m : {&lambda1, &lambda21, &lambda22, &alpha, &beta1, &beta21, &beta22, &beta23}) f(*m);
    }
    template <class F>
    void for_each(F&& f) const {
        for (const Mat2* m : {&lambda1, &lambda21, &lambda22, &alpha, &beta1, &beta21, &beta22, &beta23}) f(*m);
    }
};

inline double max_abs_diff(const MultiEquilibrium& a, const MultiEquilibrium& b) {
    const Mat2* pa[] = {&a.lambda1, &a.lambda21, &a.lambda22, &a.alpha, &a.beta1, &a.beta21, &a.beta22, &a.beta23};
    const Mat2* pb[] = {&b.lambda1, &b.lambda21, &b.lambda22, &b.alpha, &b.beta1, &b.beta21, &b.beta22, &b.beta23};
    double m = 0.0;
    for (int k = 0; k < 8; ++k) m = std::max(m, (*pa[k] - *pb[k]).cwiseAbs().maxCoeff());
    return m;
}

inline Mat2 sym(const Mat2& m) { return 0.5 * (m + m.transpose()); }

inline bool positive_definite(const Mat2& m) {
    const Mat2 s = sym(m);
    return s(0, 0) > 0.0 && s.determinant() > 0.0;
}

namespace detail {

inline Mat2 checked_inverse(const Mat2& m, const char* what) {
    const double det = m.determinant();
    if (!(std::abs(det) > 1e-300) || !std::isfinite(det)) throw Error(ErrorKind::DegenerateDenominator, what);
    return m.inverse();
}

/// Problem expressed in units where sigma_v1 = 1 and sigma_21 = 1.
struct Scaled {
    MultiVariant variant;
    Mat2 Sv, Se, S1, S2, g;
    double price_unit;  // sigma_v1
    double share_unit;  // sigma_21
};

inline Scaled scale(const MultiParams& p, MultiVariant v) {
    Scaled s;
    s.variant = v;
    s.price_unit = p.sigma_v[0];
    s.share_unit = p.sigma_2[0];
    const double w2 = s.price_unit * s.price_unit, q2 = s.share_unit * s.share_unit;
    s.Sv = p.Sigma_v() / w2;
    s.Se = p.Sigma_eps() / q2;
    if (v == MultiVariant::Spillover) s.Se(1, 1) = s.Se(0, 0); // second signal coordinate is never used
    s.S1 = p.Sigma_1() / q2;
    s.S2 = p.Sigma_2() / q2;
    s.g = p.gamma_mat() * (s.share_unit / s.price_unit);
    return s;
}

/// Convert between physical units and the scaled units of `Scaled`.
inline MultiEquilibrium rescale(MultiEquilibrium e, double price_unit, double share_unit, bool to_physical) {
    const double lam = to_physical ? price_unit / share_unit : share_unit / price_unit;
    e.lambda1 *= lam;
    e.lambda21 *= lam;
    e.lambda22 *= lam;
    e.alpha /= lam;
    return e;
}

inline Mat2 signal_cov(const MultiEquilibrium& e, const Scaled& s) { return e.alpha * s.Sv * e.alpha.transpose() + s.Se; }

/// Dealer pricing: joint regressions for the full variant, per-asset scalar
/// regressions for the spillover variant.
inline void update_prices(MultiEquilibrium& e, const Scaled& s) {
    const Mat2 I = Mat2::Identity();
    const Mat2 b = e.beta();
    const Mat2 aSa = e.alpha * s.Sv * e.alpha.transpose();
    const Mat2 V1 = e.beta1 * (aSa + s.Se) * e.beta1.transpose() + s.S1;
    const Mat2 C12 = e.beta1 * aSa * (I + b).transpose() + e.beta1 * s.Se * b.transpose() + s.S1 * e.beta22.transpose();
    const Mat2 V2 = (I + b) * aSa * (I + b).transpose() + b * s.Se * b.transpose() + e.beta22 * s.S1 * e.beta22.transpose() + s.S2;
    const Mat2 Cv1 = s.Sv * e.alpha.transpose() * e.beta1.transpose();
    const Mat2 Cv2 = s.Sv * e.alpha.transpose() * (I + b).transpose();

    if (s.variant == MultiVariant::Full) {
        e.lambda1 = Cv1 * checked_inverse(V1, "period-1 order-flow covariance");
        Eigen::Matrix4d V;
        V << V1, C12, C12.transpose(), V2;
        Eigen::FullPivLU<Eigen::Matrix4d> lu(V);
        if (!lu.isInvertible()) throw Error(ErrorKind::DegenerateDenominator, "joint order-flow covariance");
        Eigen::Matrix<double, 2, 4> C;
        C << Cv1, Cv2;
        const Eigen::Matrix<double, 2, 4> L = C * lu.inverse();
        e.lambda21 = L.leftCols<2>();
        e.lambda22 = L.rightCols<2>();
        return;
    }
    e.lambda1.setZero();
    e.lambda21.setZero();
    e.lambda22.setZero();
    for (int j = 0; j < 2; ++j) {
        const double v1 = V1(j, j), v2 = V2(j, j), c12 = C12(j, j);
        const double cv1 = Cv1(j, j), cv2 = Cv2(j, j);
        if (!(v1 > 0.0)) throw Error(ErrorKind::DegenerateDenominator, "period-1 flow variance");
        e.lambda1(j, j) = cv1 / v1;
        const double det = v1 * v2 - c12 * c12;
        if (!(det > 0.0)) throw Error(ErrorKind::DegenerateDenominator, "per-asset flow covariance");
        e.lambda21(j, j) = (cv1 * v2 - cv2 * c12) / det;
        e.lambda22(j, j) = (cv2 * v1 - cv1 * c12) / det;
    }
}

inline void update_alpha(MultiEquilibrium& e, const Scaled& s) {
    const Mat2 l2 = e.lambda2();
    if (s.variant == MultiVariant::Full) {
        e.alpha = 0.5 * checked_inverse(sym(l2), "symmetric part of lambda2");
        return;
    }
    if (!(std::abs(l2(0, 0)) > 1e-300)) throw Error(ErrorKind::DegenerateDenominator, "asset-1 total impact");
    e.alpha.setZero();
    e.alpha(0, 0) = 0.5 / l2(0, 0);
}

struct Posteriors {
    Mat2 mu;  // E[v - p0 | signal] = mu * signal
    Mat2 eta; // E[v - p0 - lambda22 i | signal] = eta * signal
};

inline Posteriors posteriors(const MultiEquilibrium& e, const Scaled& s) {
    const Mat2 Sinv = checked_inverse(signal_cov(e, s), "signal covariance");
    Posteriors q;
    q.mu = s.Sv * e.alpha.transpose() * Sinv;
    q.eta = (Mat2::Identity() - e.lambda22 * e.alpha) * s.Sv * e.alpha.transpose() * Sinv;
    if (s.variant == MultiVariant::Spillover) {
        q.mu.col(1).setZero();
        q.eta.col(1).setZero();
    }
    return q;
}

inline void update_period2(MultiEquilibrium& e, const Scaled& s) {
    const Mat2 Minv = checked_inverse(sym(e.lambda22 + s.g), "period-2 curvature");
    const Posteriors q = posteriors(e, s);
    e.beta21 = 0.5 * Minv * q.eta;
    e.beta22 = -0.5 * Minv * e.lambda21;
    e.beta23 = -0.5 * Minv * (e.lambda21 + 2.0 * s.g);
}

/// Quadratic and linear parts of the period-1 HFT objective in x1 after the
/// period-2 response is substituted.
inline std::pair<Mat2, Mat2> period1_terms(const MultiEquilibrium& e, const Scaled& s) {
    const Mat2 M = e.lambda22 + s.g;
    const Mat2 Msi = checked_inverse(sym(M), "period-2 curvature");
    const Mat2 B = 0.5 * Msi - 0.25 * Msi * M * Msi;
    const Mat2 c = e.lambda21 + 2.0 * s.g;
    const Posteriors q = posteriors(e, s);
    const Mat2 quad = e.lambda1 + s.g - c.transpose() * B * c;
    const Mat2 lin = q.mu - c.transpose() * (B + B.transpose()) * q.eta;
    return {quad, lin};
}

inline void update_period1(MultiEquilibrium& e, const Scaled& s) {
    const auto [quad, lin] = period1_terms(e, s);
    e.beta1 = 0.5 * checked_inverse(sym(quad), "period-1 curvature") * lin;
}

inline MultiEquilibrium best_response_sweep(MultiEquilibrium e, const Scaled& s) {
    update_prices(e, s);
    update_alpha(e, s);
    update_period2(e, s);
    update_period1(e, s);
    return e;
}

inline MultiPD check_pd(const MultiEquilibrium& e, const Scaled& s) {
    MultiPD pd;
    const Mat2 l2 = e.lambda2();
    pd.lambda2s = s.variant == MultiVariant::Full ? positive_definite(l2) : l2(0, 0) > 0.0;
    pd.period2 = positive_definite(e.lambda22 + s.g);
    try {
        pd.period1 = positive_definite(period1_terms(e, s).first);
    } catch (const Error&) {
        pd.period1 = false;
    }
    return pd;
}

} // namespace detail

/// Max-norm violation of each defining equation at `e`, each evaluated with
/// every other coefficient held at its value in `e` (scaled units).
struct MultiResiduals {
    double prices = 0.0;
    double alpha = 0.0;
    double period2 = 0.0;
    double period1 = 0.0;
    double max() const { return std::max({prices, alpha, period2, period1}); }
};

inline MultiResiduals multi_residuals(const MultiEquilibrium& phys, const MultiParams& p) {
    const auto s = detail::scale(p, phys.variant);
    const MultiEquilibrium e = detail::rescale(phys, s.price_unit, s.share_unit, false);
    auto diff = [](const Mat2& a, const Mat2& b) { return (a - b).cwiseAbs().maxCoeff(); };
    MultiResiduals r;
    MultiEquilibrium t = e;
    detail::update_prices(t, s);
    r.prices = std::max({diff(t.lambda1, e.lambda1), diff(t.lambda21, e.lambda21), diff(t.lambda22, e.lambda22)});
    t = e;
    detail::update_alpha(t, s);
    r.alpha = diff(t.alpha, e.alpha);
    t = e;
    detail::update_period2(t, s);
    r.period2 = std::max({diff(t.beta21, e.beta21), diff(t.beta22, e.beta22), diff(t.beta23, e.beta23)});
    t = e;
    detail::update_period1(t, s);
    r.period1 = diff(t.beta1, e.beta1);
    return r;
}

struct MultiConfig {
    double damping = 0.3;
    double step_tol = 1e-12;
    int max_iters = 100000;
    double continuation_step = 0.1; // initial step in the gamma scale factor
    SolverConfig single;            // used for the decoupled initialisation

    void validate() const {
        if (!(damping > 0.0 && damping <= 1.0)) throw Error(ErrorKind::InvalidParameter, "damping must be in (0, 1]");
        if (!(continuation_step > 0.0 && continuation_step <= 1.0))
            throw Error(ErrorKind::InvalidParameter, "continuation_step must be in (0, 1]");
        if (!(step_tol > 0.0)) throw Error(ErrorKind::InvalidParameter, "step_tol must be > 0");
        if (max_iters < 1) throw Error(ErrorKind::InvalidParameter, "max_iters must be >= 1");
    }
};

/// Single-asset equilibrium for asset j alone, in physical units.
inline Equilibrium single_asset_equilibrium(const MultiParams& p, int j, double sigma_eps, double gamma,
                                            const SolverConfig& cfg = {}) {
    DimensionalParams d;
    d.sigma_v = p.sigma_v[j];
    d.sigma_1 = p.sigma_1[j];
    d.sigma_2 = p.sigma_2[j];
    d.sigma_eps = sigma_eps;
    d.gamma = gamma;
    return solve_robust(ModelParams::from_dimensional(d), cfg).best();
}

/// Decoupled starting point: each asset from its own single-asset solve with
/// rho treated as 0. In the spillover variant asset 2 starts from asset 1's
/// coefficients scaled by rho.
inline MultiEquilibrium decoupled_start(const MultiParams& p, MultiVariant v, const SolverConfig& cfg = {}) {
    MultiEquilibrium e;
    e.variant = v;
    const int n = v == MultiVariant::Full ? 2 : 1;
    const double gam[2] = {p.gamma1, p.gamma2};
    for (int j = 0; j < n; ++j) {
        const Equilibrium s = single_asset_equilibrium(p, j, p.sigma_eps[j], gam[j], cfg);
        const double ps = p.sigma_v[j] / p.sigma_2[j];
        e.lambda1(j, j) = s.Lambda1 * ps;
        e.lambda21(j, j) = s.Lambda21 * ps;
        e.lambda22(j, j) = s.Lambda22 * ps;
        e.alpha(j, j) = s.A / ps;
        e.beta1(j, j) = s.beta1;
        e.beta21(j, j) = s.beta21;
        e.beta22(j, j) = s.beta22;
        e.beta23(j, j) = s.beta23;
    }
    if (v == MultiVariant::Spillover) {
        // Asset 2 mirrors asset 1, scaled by how much the signal says about v2.
        const double r = p.rho * (p.sigma_v[1] / p.sigma_v[0]);
        const double ps = (p.sigma_v[1] / p.sigma_2[1]) / (p.sigma_v[0] / p.sigma_2[0]);
        e.lambda1(1, 1) = std::abs(p.rho) * ps * e.lambda1(0, 0);
        e.lambda21(1, 1) = std::abs(p.rho) * ps * e.lambda21(0, 0);
        e.lambda22(1, 1) = std::abs(p.rho) * ps * e.lambda22(0, 0);
        e.beta1(1, 0) = r * e.beta1(0, 0);
        e.beta21(1, 0) = r * e.beta21(0, 0);
        e.beta22(1, 1) = e.beta22(0, 0);
        e.beta23(1, 1) = e.beta23(0, 0);
    }
    return e;
}

/// Damped best-response iteration x <- (1 - d) x + d G(x) from `start`
/// (physical units). When the fixed-point residual blows up the iteration
/// returns to the best iterate so far with d halved.
inline MultiEquilibrium solve_multi_from(const MultiParams& p, const MultiEquilibrium& start, const MultiConfig& cfg = {}) {
    p.validate();
    cfg.validate();
    const auto s = detail::scale(p, start.variant);
    MultiEquilibrium x = detail::rescale(start, s.price_unit, s.share_unit, false);

    auto sweep = [&](const MultiEquilibrium& e, MultiEquilibrium& out) {
        try {
            out = detail::best_response_sweep(e, s);
            return max_abs_diff(out, e);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    double d = cfg.damping;
    MultiEquilibrium g;
    double r = sweep(x, g);
    if (!std::isfinite(r)) throw Error(ErrorKind::DegenerateDenominator, "best response undefined at the starting point");
    MultiEquilibrium best = x;
    double best_r = r;
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        const Mat2* src[] = {&g.lambda1, &g.lambda21, &g.lambda22, &g.alpha, &g.beta1, &g.beta21, &g.beta22, &g.beta23};
        double step = 0.0;
        int k = 0;
        x.for_each([&](Mat2& m) {
            const Mat2 delta = d * (*src[k++] - m);
            step = std::max(step, delta.cwiseAbs().maxCoeff());
            m += delta;
        });
        if (step < cfg.step_tol) break;
        r = sweep(x, g);
        if (!std::isfinite(r) || r > 1e3 * best_r) {
            d *= 0.5;
            if (d < 1e-6) break;
            x = best;
            r = sweep(x, g);
            continue;
        }
        if (r < best_r) {
            best = x;
            best_r = r;
        }
    }
    r = sweep(x, g);
    x.iterations = it;
    x.fixed_point_residual = r;
    x.pd_ok = detail::check_pd(x, s);
    if (!(r < 1e3 * cfg.step_tol)) {
        throw Error(ErrorKind::NoConvergence, "fixed point not reached (residual " + std::to_string(r) + ")");
    }
    if (!x.pd_ok.all()) throw Error(ErrorKind::PDViolation, "second-order condition matrix is not positive definite");
    return detail::rescale(x, s.price_unit, s.share_unit, true);
}

/// Tracks a solution from inventory-aversion scale t = 0 to t = 1, where the
/// penalty matrix is t * gamma. `x` must solve the problem at t = 0.
inline MultiEquilibrium continue_in_gamma(const MultiParams& p, MultiEquilibrium x, const MultiConfig& cfg = {}) {
    auto at = [&](double t) {
        MultiParams q = p;
        q.gamma1 *= t;
        q.gamma2 *= t;
        q.gamma3 *= t;
        return q;
    };
    double t = 0.0;
    double h = cfg.continuation_step;
    while (t < 1.0) {
        const double tn = std::min(1.0, t + h);
        try {
            x = solve_multi_from(at(tn), x, cfg);
            t = tn;
            h = std::min(2.0 * h, 0.25);
        } catch (const Error& e) {
            h *= 0.5;
            if (h < 1e-4) throw Error(e.kind(), std::string("gamma continuation stalled: ") + e.what());
        }
    }
    return x;
}

inline MultiEquilibrium solve_multi_continued(const MultiParams& p, MultiVariant v, const MultiConfig& cfg = {}) {
    MultiParams q = p;
    q.gamma1 = q.gamma2 = q.gamma3 = 0.0;
    const MultiEquilibrium start = decoupled_start(q, v, cfg.single);
    MultiEquilibrium anchor;
    try {
        anchor = solve_multi_from(q, start, cfg);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidParameter) throw;
        MultiConfig slow = cfg;
        slow.damping = cfg.damping / 3.0;
        anchor = solve_multi_from(q, start, slow);
    }
    if (p.gamma1 == 0.0 && p.gamma2 == 0.0 && p.gamma3 == 0.0) return anchor;
    return continue_in_gamma(p, anchor, cfg);
}

inline MultiEquilibrium solve_multi_full(const MultiParams& p, const MultiConfig& cfg = {}) {
    p.validate();
    try {
        return solve_multi_from(p, decoupled_start(p, MultiVariant::Full, cfg.single), cfg);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidParameter) throw;
    }
    return solve_multi_continued(p, MultiVariant::Full, cfg);
}

/// Spillover solutions are tracked from gamma = 0: started directly at
/// positive gamma the iteration settles on a fixed point whose period-1 SOC
/// fails.
inline MultiEquilibrium solve_multi_spillover(const MultiParams& p, const MultiConfig& cfg = {}) {
    p.validate();
    if (p.rho == 0.0) {
        // Asset 2 carries no information: no flow, no impact, and any period-1
        // position could be unwound for free, so the trivial solution is returned
        // and the PD flags describe asset 1 only.
        if (p.gamma3 != 0.0)
            throw Error(ErrorKind::DegenerateDenominator, "spillover variant with rho = 0 requires gamma3 = 0");
        MultiEquilibrium e = decoupled_start(p, MultiVariant::Spillover, cfg.single);
        e.pd_ok = {true, true, true};
        e.fixed_point_residual = 0.0;
        e.iterations = 0;
        return e;
    }
    return solve_multi_continued(p, MultiVariant::Spillover, cfg);
}

inline MultiEquilibrium solve_multi(const MultiParams& p, MultiVariant v, const MultiConfig& cfg = {}) {
    return v == MultiVariant::Full ? solve_multi_full(p, cfg) : solve_multi_spillover(p, cfg);
}

/// Spillover-variant roles. Asset-2 directions carry a sgn(rho) factor so that
/// "in IT's direction" refers to the direction implied for v2.
inline std::pair<Role, Role> classify_multi_roles(const MultiEquilibrium& e, double rho,
                                                  double tol = kDefaultRoleTolerance) {
    const double sg = rho > 0.0 ? 1.0 : (rho < 0.0 ? -1.0 : 0.0);
    const Mat2& b1 = e.beta1;
    const Mat2& b21 = e.beta21;
    const Mat2& b23 = e.beta23;
    const double d11 = b1(0, 0);
    const double d12 = sg * b1(1, 0);
    const double d21 = b21(0, 0) + b23(0, 0) * b1(0, 0) + b23(0, 1) * b1(1, 0);
    const double d22 = sg * (b21(1, 0) + b23(1, 0) * b1(0, 0) + b23(1, 1) * b1(1, 0));
    return {classify_directions(d11, d21, tol), classify_directions(d12, d22, tol)};
}

/// Largest off-diagonal entry over all coefficient matrices.
inline double off_diagonal_max(const MultiEquilibrium& e) {
    double m = 0.0;
    e.for_each([&](const Mat2& x) { m = std::max({m, std::abs(x(0, 1)), std::abs(x(1, 0))}); });
    return m;
}

} // namespace kylehft
