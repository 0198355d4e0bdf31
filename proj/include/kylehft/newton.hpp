#pragma once

#include "kylehft/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

namespace kylehft {

using Triple = std::array<double, 3>;

inline double max_abs(const Triple& r) {
    return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
}

inline double max_abs_diff(const Triple& a, const Triple& b) {
    return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

struct NewtonOptions {
    double tol = 1e-12;
    int max_iters = 200;
    double damping = 1.0;
    Triple step_scale{1.0, 1.0, 1.0}; // floor of the finite-difference step per unknown
    int polish_steps = 2;             // extra steps after reaching tol, kept only if they lower the norm
};

namespace detail {

/// Max-norm of F(x), or +inf when F throws or returns non-finite values.
template <class F>
double guarded_norm(F& f, const Triple& x, Triple& out) {
    try {
        const Triple r = f(x);
        const double n = max_abs(r);
        if (!std::isfinite(n)) return std::numeric_limits<double>::infinity();
        out = r;
        return n;
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
}

} // namespace detail

/// Damped Newton for F: R^3 -> R^3 with a central-difference Jacobian
/// (step 1e-7 * max(step_scale_j, |x_j|)) and step halving on the max-norm.
/// A few steps past tol bring the root to working precision.
template <class F>
std::optional<Triple> newton3(F&& f, const Triple& x0, const NewtonOptions& opt) {
    Triple x = x0;
    Triple r{};
    double norm = detail::guarded_norm(f, x, r);
    if (!std::isfinite(norm)) return std::nullopt;

    int polished = 0;
    for (int it = 0; it < opt.max_iters; ++it) {
        if (norm < opt.tol && polished++ >= opt.polish_steps) return x;
        Eigen::Matrix3d J;
        for (int j = 0; j < 3; ++j) {
            const double h = 1e-7 * std::max(opt.step_scale[j], std::abs(x[j]));
            Triple xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            Triple rp{}, rm{};
            if (!std::isfinite(detail::guarded_norm(f, xp, rp)) || !std::isfinite(detail::guarded_norm(f, xm, rm))) {
                return std::nullopt;
            }
            for (int i = 0; i < 3; ++i) J(i, j) = (rp[i] - rm[i]) / (xp[j] - xm[j]);
        }
        Eigen::FullPivLU<Eigen::Matrix3d> lu(J);
        if (!lu.isInvertible()) return std::nullopt;
        const Eigen::Vector3d dx = lu.solve(Eigen::Vector3d(-r[0], -r[1], -r[2]));
        if (!dx.allFinite()) return std::nullopt;

        double t = opt.damping;
        bool accepted = false;
        for (int k = 0; k < 40; ++k) {
            const Triple xn{x[0] + t * dx[0], x[1] + t * dx[1], x[2] + t * dx[2]};
            Triple rn{};
            const double nn = detail::guarded_norm(f, xn, rn);
            if (nn < norm) {
                x = xn;
                r = rn;
                norm = nn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
    }
    if (norm < opt.tol) return x;
    return std::nullopt;
}

} // namespace kylehft
