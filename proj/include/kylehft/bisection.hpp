#pragma once

#include "kylehft/error.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace kylehft {

/// Root of f on [lo, hi] by bisection. f(lo) and f(hi) must have opposite signs
/// (an exact zero at either end is returned as is).
template <class F>
double bisect(F&& f, double lo, double hi, double xtol = 1e-12, int max_iters = 400) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (!(std::signbit(flo) != std::signbit(fhi))) {
        throw Error(ErrorKind::BracketFailure,
                    "no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    for (int it = 0; it < max_iters && (hi - lo) > xtol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Bisection on a boolean predicate: pred(lo) != pred(hi); returns the
/// final bracket of width <= xtol.
template <class P>
std::pair<double, double> bisect_predicate(P&& pred, double lo, double hi, double xtol) {
    const bool plo = pred(lo);
    if (plo == pred(hi)) {
        throw Error(ErrorKind::BracketFailure, "predicate does not change on the bracket");
    }
    while (hi - lo > xtol) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid) == plo) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {lo, hi};
}

/// Locations where f changes sign between consecutive samples of an
/// n-interval uniform partition of [lo, hi].
template <class F>
std::vector<std::pair<double, double>> sign_change_brackets(F&& f, double lo, double hi, int n) {
    std::vector<std::pair<double, double>> out;
    double xa = lo;
    double fa = f(xa);
    for (int k = 1; k <= n; ++k) {
        const double xb = lo + (hi - lo) * k / n;
        const double fb = f(xb);
        if (fa == 0.0 || std::signbit(fa) != std::signbit(fb)) out.emplace_back(xa, xb);
        xa = xb;
        fa = fb;
    }
    return out;
}

} // namespace kylehft
