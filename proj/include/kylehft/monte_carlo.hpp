#pragma once

#include "kylehft/error.hpp"
#include "kylehft/model.hpp"
#include "kylehft/multi_asset.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

namespace kylehft {

struct SimConfig {
    std::int64_t n_paths = 1000000;
    std::uint64_t seed = 20240101;
    bool antithetic = true;
    int batches = 100;
    int jobs = 1;

    void validate() const {
        if (n_paths < 10000) throw Error(ErrorKind::InvalidParameter, "n_paths must be >= 10000");
        if (antithetic && n_paths % 2 != 0)
            throw Error(ErrorKind::InvalidParameter, "n_paths must be even with antithetic variates");
        if (batches < 2) throw Error(ErrorKind::InvalidParameter, "batches must be >= 2");
        if (jobs < 1) throw Error(ErrorKind::InvalidParameter, "jobs must be >= 1");
    }
};

struct Estimate {
    double mean = 0.0;
    double se = 0.0;

    /// |mean - exact| in units of the standard error.
    double z_score(double exact) const {
        const double d = std::abs(mean - exact);
        if (se > 0.0) return d / se;
        return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    bool within(double exact, double n_se) const { return z_score(exact) <= n_se; }
};

// Counter-based normals: the k-th draw of a run is a pure function of
// (seed, k), so results do not depend on how paths are split across threads.
namespace rng {

inline std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t at(std::uint64_t seed, std::uint64_t counter) {
    return mix(seed + (counter + 1) * 0x9E3779B97F4A7C15ULL);
}

inline double uniform(std::uint64_t seed, std::uint64_t counter) {
    return (static_cast<double>(at(seed, counter) >> 11) + 0.5) * 0x1.0p-53;
}

/// N standard normals for path `k` (N even).
template <std::size_t N>
std::array<double, N> normals(std::uint64_t seed, std::uint64_t k) {
    static_assert(N % 2 == 0);
    std::array<double, N> z;
    for (std::size_t j = 0; j < N; j += 2) {
        const double u1 = uniform(seed, N * k + j);
        const double u2 = uniform(seed, N * k + j + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        z[j] = r * std::cos(t);
        z[j + 1] = r * std::sin(t);
    }
    return z;
}

} // namespace rng

/// Path-level means of K estimands with batch-means standard errors. `f` maps
/// N standard normals to K values; with antithetics each sample is the average
/// of f(z) and f(-z).
template <std::size_t N, std::size_t K, class F>
std::array<Estimate, K> monte_carlo(const SimConfig& cfg, F&& f) {
    cfg.validate();
    const std::int64_t n_base = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
    const int nb = static_cast<int>(std::min<std::int64_t>(cfg.batches, n_base));
    std::vector<std::array<double, K>> sums(nb);
    std::vector<std::int64_t> counts(nb);

    auto run_batch = [&](int b) {
        const std::int64_t lo = n_base * b / nb, hi = n_base * (b + 1) / nb;
        std::array<double, K> s{};
        for (std::int64_t k = lo; k < hi; ++k) {
            auto z = rng::normals<N>(cfg.seed, static_cast<std::uint64_t>(k));
            std::array<double, K> a = f(z);
            if (cfg.antithetic) {
                for (auto& x : z) x = -x;
                const std::array<double, K> c = f(z);
                for (std::size_t j = 0; j < K; ++j) a[j] = 0.5 * (a[j] + c[j]);
            }
            for (std::size_t j = 0; j < K; ++j) s[j] += a[j];
        }
        sums[b] = s;
        counts[b] = hi - lo;
    };

    const int jobs = std::min(cfg.jobs, nb);
    if (jobs <= 1) {
        for (int b = 0; b < nb; ++b) run_batch(b);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (int b = next++; b < nb; b = next++) run_batch(b);
            });
        for (auto& th : pool) th.join();
    }

    std::array<Estimate, K> out;
    for (std::size_t j = 0; j < K; ++j) {
        double total = 0.0;
        std::int64_t n = 0;
        for (int b = 0; b < nb; ++b) {
            total += sums[b][j];
            n += counts[b];
        }
        const double mean = total / static_cast<double>(n);
        double ss = 0.0;
        for (int b = 0; b < nb; ++b) {
            const double d = sums[b][j] / static_cast<double>(counts[b]) - mean;
            ss += d * d;
        }
        out[j] = {mean, std::sqrt(ss / (nb - 1) / nb)};
    }
    return out;
}

/// Dimensional single-asset market: every coefficient acts on deviations from p0.
struct LinearMarket {
    double alpha = 0.0, beta1 = 0.0, beta21 = 0.0, beta22 = 0.0, beta23 = 0.0;
    double lambda1 = 0.0, lambda21 = 0.0, lambda22 = 0.0;
    double gamma = 0.0;
    double sigma_v = 1.0, sigma_eps = 0.0, sigma_1 = 1.0, sigma_2 = 1.0;

    static LinearMarket from(const Equilibrium& e, const ModelParams& p) {
        const double s = p.price_scale();
        LinearMarket m;
        m.alpha = e.A / s;
        m.beta1 = e.beta1;
        m.beta21 = e.beta21;
        m.beta22 = e.beta22;
        m.beta23 = e.beta23;
        m.lambda1 = e.Lambda1 * s;
        m.lambda21 = e.Lambda21 * s;
        m.lambda22 = e.Lambda22 * s;
        m.gamma = p.Gamma * s;
        m.sigma_v = p.sigma_v;
        m.sigma_eps = std::sqrt(p.theta_eps) * p.sigma_2;
        m.sigma_1 = std::sqrt(p.theta1) * p.sigma_2;
        m.sigma_2 = p.sigma_2;
        return m;
    }

    struct Path {
        double v, u1, u2, i, signal, x1, x2, p1, p2;
    };

    Path path(const std::array<double, 4>& z) const {
        Path q;
        q.v = sigma_v * z[0];
        q.u1 = sigma_1 * z[2];
        q.u2 = sigma_2 * z[3];
        q.i = alpha * q.v;
        q.signal = q.i + sigma_eps * z[1];
        q.x1 = beta1 * q.signal;
        const double y1 = q.x1 + q.u1;
        q.p1 = lambda1 * y1;
        q.x2 = beta21 * q.signal + beta22 * q.u1 + beta23 * q.x1;
        q.p2 = lambda21 * y1 + lambda22 * (q.i + q.x2 + q.u2);
        return q;
    }

    /// -gamma * pos^2, with 0 for a flat position even when gamma is infinite.
    double penalty(double pos) const { return pos == 0.0 ? 0.0 : -gamma * pos * pos; }
};

struct SimEstimates {
    Estimate pi_IT, pi_HFT, pi_HFT_holding, pi_HFT_impact, penalty;
    Estimate err_p1, err_p2, loss_NT1, loss_NT2;
    Estimate inventory_second_moment;
    Estimate price_bias; // E[p2 - p0], an odd moment

    /// Largest |z-score| against the closed-form outcomes.
    double max_z(const Outcomes& o) const {
        const std::pair<const Estimate*, double> pairs[] = {
            {&pi_IT, o.pi_IT},     {&pi_HFT, o.pi_HFT}, {&pi_HFT_holding, o.pi_HFT_holding},
            {&pi_HFT_impact, o.pi_HFT_impact}, {&penalty, o.penalty}, {&err_p1, o.err_p1},
            {&err_p2, o.err_p2},   {&loss_NT1, o.loss_NT1}, {&loss_NT2, o.loss_NT2}};
        double m = 0.0;
        for (const auto& [e, x] : pairs) m = std::max(m, e->z_score(x));
        return m;
    }
};

inline SimEstimates simulate(const LinearMarket& m, const SimConfig& cfg) {
    const auto r = monte_carlo<4, 11>(cfg, [&](const std::array<double, 4>& z) {
        const auto q = m.path(z);
        const double e1 = q.v - q.p1, e2 = q.v - q.p2, pos = q.x1 + q.x2;
        return std::array<double, 11>{q.i * e2,
                                      q.x1 * e1 + q.x2 * e2,
                                      pos * e1,
                                      -q.x2 * (q.p2 - q.p1),
                                      m.penalty(pos),
                                      e1 * e1,
                                      e2 * e2,
                                      -q.u1 * e1,
                                      -q.u2 * e2,
                                      pos * pos,
                                      q.p2};
    });
    SimEstimates s;
    s.pi_IT = r[0];
    s.pi_HFT = r[1];
    s.pi_HFT_holding = r[2];
    s.pi_HFT_impact = r[3];
    s.penalty = r[4];
    s.err_p1 = r[5];
    s.err_p2 = r[6];
    s.loss_NT1 = r[7];
    s.loss_NT2 = r[8];
    s.inventory_second_moment = r[9];
    s.price_bias = r[10];
    return s;
}

inline SimEstimates simulate(const Equilibrium& e, const ModelParams& p, const SimConfig& cfg = {}) {
    p.validate();
    for (double c : e.coefficients())
        if (!std::isfinite(c)) throw Error(ErrorKind::InvalidParameter, "equilibrium coefficients must be finite");
    return simulate(LinearMarket::from(e, p), cfg);
}

enum class Control { Alpha, Beta1, Period2 };

inline std::string_view to_string(Control c) {
    switch (c) {
    case Control::Alpha: return "alpha";
    case Control::Beta1: return "beta1";
    case Control::Period2: return "beta2";
    }
    return "?";
}

struct Deviation {
    Control control;
    double delta;
    Estimate gain; // objective(deviated) - objective(equilibrium), common random numbers
};

struct Concavity {
    Control control;
    double delta;
    Estimate second_difference; // f(+delta) + f(-delta) - 2 f(0)
};

struct BestResponseReport {
    std::vector<Deviation> deviations;
    std::vector<Concavity> concavity;

    bool all_concave() const {
        return std::all_of(concavity.begin(), concavity.end(),
                           [](const Concavity& c) { return c.second_difference.mean < 0.0; });
    }
};

namespace detail {

inline LinearMarket deviate(LinearMarket m, Control c, double delta) {
    const double f = 1.0 + delta;
    switch (c) {
    case Control::Alpha: m.alpha *= f; break;
    case Control::Beta1: m.beta1 *= f; break;
    case Control::Period2:
        m.beta21 *= f;
        m.beta22 *= f;
        m.beta23 *= f;
        break;
    }
    return m;
}

/// Objective of the deviating agent. A deviation in alpha leaves the HFT
/// coefficients as functions of the signal, so HFT reacts through the signal.
/// A beta1 deviation keeps the period-2 rule, which does not depend on beta1.
inline double objective(const LinearMarket& m, Control c, const std::array<double, 4>& z) {
    const auto q = m.path(z);
    switch (c) {
    case Control::Alpha: return q.i * (q.v - q.p2);
    case Control::Beta1: return q.x1 * (q.v - q.p1) + q.x2 * (q.v - q.p2) + m.penalty(q.x1 + q.x2);
    case Control::Period2: return q.x2 * (q.v - q.p2) + m.penalty(q.x1 + q.x2);
    }
    return 0.0;
}

} // namespace detail

/// Deviation tests on alpha, beta1 and the period-2 trio with prices held
/// fixed. Throws NotBestResponse when a deviation improves the objective by
/// more than `n_se` standard errors.
inline BestResponseReport best_response_check(const Equilibrium& e, const ModelParams& p, const SimConfig& cfg = {},
                                              std::vector<double> deltas = {-0.05, -0.01, 0.01, 0.05},
                                              double n_se = 3.0) {
    p.validate();
    const LinearMarket base = LinearMarket::from(e, p);
    BestResponseReport rep;
    for (Control c : {Control::Alpha, Control::Beta1, Control::Period2}) {
        for (double d : deltas) {
            const LinearMarket dev = detail::deviate(base, c, d);
            const auto r = monte_carlo<4, 1>(cfg, [&](const std::array<double, 4>& z) {
                return std::array<double, 1>{detail::objective(dev, c, z) - detail::objective(base, c, z)};
            });
            rep.deviations.push_back({c, d, r[0]});
            if (d > 0.0) {
                const LinearMarket dn = detail::deviate(base, c, -d);
                const auto s = monte_carlo<4, 1>(cfg, [&](const std::array<double, 4>& z) {
                    return std::array<double, 1>{detail::objective(dev, c, z) + detail::objective(dn, c, z) -
                                                 2.0 * detail::objective(base, c, z)};
                });
                rep.concavity.push_back({c, d, s[0]});
            }
        }
    }
    for (const auto& d : rep.deviations) {
        if (d.gain.mean > n_se * d.gain.se && d.gain.mean > 0.0) {
            throw Error(ErrorKind::NotBestResponse, std::string("deviation in ") + std::string(to_string(d.control)) +
                                                        " by " + std::to_string(d.delta) + " improves the objective by " +
                                                        std::to_string(d.gain.mean / d.gain.se) + " SE");
        }
    }
    return rep;
}

// Two-asset extension. Shocks: v (2, correlated), eps (2), u1 (2), u2 (2).

struct MultiObjectives {
    double pi_IT = 0.0;
    double hft = 0.0; // trading profit net of the inventory penalty
};

struct MultiSimEstimates {
    Estimate pi_IT;
    Estimate hft;
};

namespace detail {

/// Loadings of every market vector on the 8 standard normal drivers.
struct MultiLoadings {
    using L = Eigen::Matrix<double, 2, 8>;
    L v, i, x1, x2, p1, p2;

    static MultiLoadings build(const MultiEquilibrium& e, const MultiParams& p) {
        const Eigen::LLT<Mat2> chol(p.Sigma_v());
        const Mat2 Lv = chol.matrixL();
        const Mat2 I = Mat2::Identity();
        L zv = L::Zero(), ze = L::Zero(), z1 = L::Zero(), z2 = L::Zero();
        zv.leftCols<2>() = Lv;
        ze.block<2, 2>(0, 2) = p.sigma_eps.asDiagonal();
        z1.block<2, 2>(0, 4) = p.sigma_1.asDiagonal();
        z2.block<2, 2>(0, 6) = p.sigma_2.asDiagonal();
        MultiLoadings m;
        m.v = zv;
        m.i = e.alpha * zv;
        const L signal = m.i + ze;
        m.x1 = e.beta1 * signal;
        const L y1 = m.x1 + z1;
        m.p1 = e.lambda1 * y1;
        m.x2 = e.beta21 * signal + e.beta22 * z1 + e.beta23 * m.x1;
        m.p2 = e.lambda21 * y1 + e.lambda22 * ((I * m.i) + m.x2 + z2);
        return m;
    }
};

} // namespace detail

/// Exact expected objectives from the Gaussian loadings.
inline MultiObjectives multi_expected_objectives(const MultiEquilibrium& e, const MultiParams& p) {
    const auto m = detail::MultiLoadings::build(e, p);
    auto E = [](const detail::MultiLoadings::L& a, const detail::MultiLoadings::L& b) { return (a * b.transpose()).trace(); };
    const auto pos = m.x1 + m.x2;
    MultiObjectives o;
    o.pi_IT = E(m.i, m.v - m.p2);
    o.hft = E(m.x1, m.v - m.p1) + E(m.x2, m.v - m.p2) - (p.gamma_mat() * pos * pos.transpose()).trace();
    return o;
}

inline MultiSimEstimates simulate_multi(const MultiEquilibrium& e, const MultiParams& p, const SimConfig& cfg = {}) {
    p.validate();
    const auto m = detail::MultiLoadings::build(e, p);
    const Mat2 g = p.gamma_mat();
    const auto r = monte_carlo<8, 2>(cfg, [&](const std::array<double, 8>& za) {
        const Eigen::Map<const Eigen::Matrix<double, 8, 1>> z(za.data());
        const Vec2 v = m.v * z, i = m.i * z, x1 = m.x1 * z, x2 = m.x2 * z, p1 = m.p1 * z, p2 = m.p2 * z;
        const Vec2 pos = x1 + x2;
        return std::array<double, 2>{i.dot(v - p2), x1.dot(v - p1) + x2.dot(v - p2) - pos.dot(g * pos)};
    });
    return {r[0], r[1]};
}

} // namespace kylehft
