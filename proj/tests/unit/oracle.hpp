#pragma once

// Independent exact-moment model of the single-asset market, written
// separately from the library so tests do not check code against itself.

#include <array>
#include <cmath>

namespace oracle {

// Loadings on the standardized shocks (v, eps, u1, u2).
using Vec = std::array<double, 4>;

inline Vec add(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]}; }
inline Vec scale(double s, const Vec& a) { return {s * a[0], s * a[1], s * a[2], s * a[3]}; }
inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; }

struct Coeffs {
    double alpha, beta1, beta21, beta22, beta23, lambda1, lambda21, lambda22, gamma;
    double sv, se, s1, s2;
};

struct Market {
    Vec v, u1, u2, i, sig, x1, x2, y1, y2, p1, p2;
};

inline Market build(const Coeffs& c) {
    Market m;
    m.v = {c.sv, 0, 0, 0};
    m.u1 = {0, 0, c.s1, 0};
    m.u2 = {0, 0, 0, c.s2};
    m.i = scale(c.alpha, m.v);
    m.sig = add(m.i, Vec{0, c.se, 0, 0});
    m.x1 = scale(c.beta1, m.sig);
    m.y1 = add(m.x1, m.u1);
    m.p1 = scale(c.lambda1, m.y1);
    m.x2 = add(add(scale(c.beta21, m.sig), scale(c.beta22, m.u1)), scale(c.beta23, m.x1));
    m.y2 = add(add(m.i, m.x2), m.u2);
    m.p2 = add(scale(c.lambda21, m.y1), scale(c.lambda22, m.y2));
    return m;
}

inline Vec minus(const Vec& a, const Vec& b) { return add(a, scale(-1.0, b)); }

inline double it_objective(const Coeffs& c) {
    const Market m = build(c);
    return dot(m.i, minus(m.v, m.p2));
}

inline double hft_total(const Coeffs& c) {
    const Market m = build(c);
    const Vec pos = add(m.x1, m.x2);
    return dot(m.x1, minus(m.v, m.p1)) + dot(m.x2, minus(m.v, m.p2)) - c.gamma * dot(pos, pos);
}

inline double hft_period2(const Coeffs& c) {
    const Market m = build(c);
    const Vec pos = add(m.x1, m.x2);
    return dot(m.x2, minus(m.v, m.p2)) - c.gamma * dot(pos, pos);
}

/// Dealer projections: lambda1 from y1 alone, (lambda21, lambda22) from (y1, y2).
inline std::array<double, 3> dealer_lambdas(const Coeffs& c) {
    const Market m = build(c);
    const double v11 = dot(m.y1, m.y1), v22 = dot(m.y2, m.y2), v12 = dot(m.y1, m.y2);
    const double c1 = dot(m.v, m.y1), c2 = dot(m.v, m.y2);
    const double det = v11 * v22 - v12 * v12;
    return {c1 / v11, (c1 * v22 - c2 * v12) / det, (c2 * v11 - c1 * v12) / det};
}

/// Central-difference derivative of f along one coefficient.
template <class F>
double partial(const Coeffs& c, double Coeffs::*field, F&& f, double h = 1e-6) {
    Coeffs up = c, dn = c;
    const double step = h * std::max(1.0, std::abs(c.*field));
    up.*field += step;
    dn.*field -= step;
    return (f(up) - f(dn)) / (2.0 * step);
}

} // namespace oracle
