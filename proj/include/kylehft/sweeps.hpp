#pragma once

// Grid sweeps over (theta_eps, Gamma) at fixed theta1 and the boundary curves
// read off them: role boundaries Gamma_under / Gamma_over, the role switch
// theta_bar_eps(Gamma), and the IT benefit thresholds in theta_eps.

#include "kylehft/bisection.hpp"
#include "kylehft/error.hpp"
#include "kylehft/limits.hpp"
#include "kylehft/model.hpp"
#include "kylehft/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace kylehft {

inline std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw Error(ErrorKind::InvalidParameter, "log grid bounds");
    std::vector<double> g(n);
    const double a = std::log(lo), b = std::log(hi);
    for (int k = 0; k < n; ++k) g[k] = std::exp(a + (b - a) * k / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

inline std::vector<double> default_theta_eps_grid() { return log_grid(1e-4, 9.0, 60); }

/// Gamma bands [0, 1] by 0.1, (1, 20] by 1 and (20, 100] by 10.
inline std::vector<double> default_Gamma_grid() {
    std::vector<double> g;
    for (int k = 0; k <= 10; ++k) g.push_back(0.1 * k);
    for (int k = 2; k <= 20; ++k) g.push_back(k);
    for (int k = 30; k <= 100; k += 10) g.push_back(k);
    return g;
}

struct SweepSpec {
    double theta1 = 1.0;
    std::vector<double> theta_eps_grid = default_theta_eps_grid();
    std::vector<double> Gamma_grid = default_Gamma_grid();
    bool continuation = true;
    double sigma_v = 1.0;
    double sigma_2 = 1.0;

    void validate() const {
        if (!(theta1 > 0.0) || !std::isfinite(theta1)) throw Error(ErrorKind::InvalidParameter, "theta1 must be > 0");
        auto check = [](const std::vector<double>& g, const char* name) {
            if (g.empty()) throw Error(ErrorKind::InvalidParameter, std::string(name) + " grid is empty");
            for (double x : g) {
                if (!(x >= 0.0) || !std::isfinite(x)) {
                    throw Error(ErrorKind::InvalidParameter, std::string(name) + " grid values must be finite and >= 0");
                }
            }
            if (!std::is_sorted(g.begin(), g.end()) || std::adjacent_find(g.begin(), g.end()) != g.end()) {
                throw Error(ErrorKind::InvalidParameter, std::string(name) + " grid must be strictly ascending");
            }
        };
        check(theta_eps_grid, "theta_eps");
        check(Gamma_grid, "Gamma");
        if (!(sigma_v > 0.0) || !(sigma_2 > 0.0)) throw Error(ErrorKind::InvalidParameter, "sigma_v, sigma_2 must be > 0");
    }

    ModelParams params(double theta_eps, double Gamma) const {
        ModelParams p;
        p.theta1 = theta1;
        p.theta_eps = theta_eps;
        p.Gamma = Gamma;
        p.sigma_v = sigma_v;
        p.sigma_2 = sigma_2;
        return p;
    }
};

enum class RowStatus { Found, Duopoly, NoRoot, OnlySOCViolating };

inline std::string_view to_string(RowStatus s) {
    switch (s) {
    case RowStatus::Found: return "found";
    case RowStatus::Duopoly: return "duopoly";
    case RowStatus::NoRoot: return "no_root";
    case RowStatus::OnlySOCViolating: return "only_soc_violating";
    }
    return "no_root";
}

struct SweepRow {
    ModelParams params;
    RowStatus status = RowStatus::NoRoot;
    Equilibrium eq;
    Outcomes out;
    Role role;
    int selected_root_index = -1; // index into the multistart roots; -1 if reached by tracking
    int n_roots = 0;

    bool solved() const { return status == RowStatus::Found || status == RowStatus::Duopoly; }
};

inline SweepRow make_row(const ModelParams& p, RowStatus status, const Equilibrium& e) {
    SweepRow r;
    r.params = p;
    r.status = status;
    r.eq = e;
    r.out = status == RowStatus::Duopoly ? outcomes_from_moments(e, p) : compute_outcomes(e, p);
    r.role = classify_role(e);
    return r;
}

/// Solve one grid point. `prev` (the solved neighbour, if any) selects among
/// multiple roots and seeds tracking when multistart finds none.
inline SweepRow solve_point(const ModelParams& p, const SweepRow* prev, bool continuation,
                            const SolverConfig& cfg = {}) {
    const SolveReport rep = solve(p, cfg);
    if (rep.status == SolveStatus::Found) {
        int idx = 0;
        if (continuation && prev && prev->status == RowStatus::Found) {
            const Equilibrium* near = nearest_root(rep, to_triple(prev->eq));
            idx = static_cast<int>(near - rep.roots.data());
        }
        SweepRow r = make_row(p, RowStatus::Found, rep.roots[idx]);
        r.selected_root_index = idx;
        r.n_roots = static_cast<int>(rep.roots.size());
        return r;
    }
    if (continuation && prev && prev->status == RowStatus::Found) {
        if (auto e = track_root(prev->eq, prev->params, p, cfg)) {
            SweepRow r = make_row(p, RowStatus::Found, *e);
            r.n_roots = 1;
            return r;
        }
    }
    if (!prev) {
        const SolveReport rob = solve_robust(p, cfg);
        if (rob.status == SolveStatus::Found) {
            SweepRow r = make_row(p, RowStatus::Found, rob.roots.front());
            r.n_roots = 1;
            return r;
        }
    }
    if (p.theta_eps == 0.0) {
        const DuopolyReport d = solve_duopoly_all(p.theta1, p.Gamma, cfg);
        if (d.status == SolveStatus::Found) {
            SweepRow r = make_row(p, RowStatus::Duopoly, d.roots.front().as_signal_form());
            r.n_roots = static_cast<int>(d.roots.size());
            return r;
        }
    }
    SweepRow r;
    r.params = p;
    r.status = rep.status == SolveStatus::OnlySOCViolating ? RowStatus::OnlySOCViolating : RowStatus::NoRoot;
    return r;
}

/// One Gamma row, walked from the largest theta_eps down so each point is
/// seeded by its solved neighbour. Returned in ascending theta_eps order.
inline std::vector<SweepRow> solve_gamma_row(const SweepSpec& spec, double Gamma, const SolverConfig& cfg = {}) {
    const auto& te = spec.theta_eps_grid;
    std::vector<SweepRow> rows(te.size());
    const SweepRow* prev = nullptr;
    for (std::size_t k = te.size(); k-- > 0;) {
        rows[k] = solve_point(spec.params(te[k], Gamma), prev, spec.continuation, cfg);
        if (rows[k].status == RowStatus::Found) prev = &rows[k];
    }
    return rows;
}

inline unsigned resolve_jobs(unsigned jobs) {
    if (jobs > 0) return jobs;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Rows in grid order: Gamma outer, theta_eps inner. Gamma rows run in
/// parallel; each row is sequential, so output does not depend on `jobs`.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned jobs = 1, const SolverConfig& cfg = {}) {
    spec.validate();
    cfg.validate();
    const std::size_t nG = spec.Gamma_grid.size();
    const std::size_t nE = spec.theta_eps_grid.size();
    std::vector<std::vector<SweepRow>> by_gamma(nG);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < nG;) by_gamma[i] = solve_gamma_row(spec, spec.Gamma_grid[i], cfg);
    };
    const unsigned n = std::min<unsigned>(resolve_jobs(jobs), static_cast<unsigned>(nG));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    std::vector<SweepRow> out;
    out.reserve(nG * nE);
    for (auto& r : by_gamma) out.insert(out.end(), r.begin(), r.end());
    return out;
}

// ---------------------------------------------------------------------------
// Re-solving at off-grid theta_eps for bisection.

/// Equilibrium at `target` tracked from the solved row whose theta_eps is
/// closest; falls back to multistart.
inline std::optional<Equilibrium> resolve_near(const std::vector<SweepRow>& gamma_row, const ModelParams& target,
                                               const SolverConfig& cfg = {}) {
    const SweepRow* best = nullptr;
    double bd = std::numeric_limits<double>::infinity();
    for (const auto& r : gamma_row) {
        if (r.status != RowStatus::Found) continue;
        const double d = std::abs(std::log((r.params.theta_eps + 1e-12) / (target.theta_eps + 1e-12)));
        if (d < bd) {
            bd = d;
            best = &r;
        }
    }
    if (best) {
        if (best->params.theta_eps == target.theta_eps) return best->eq;
        if (auto e = track_root(best->eq, best->params, target, cfg)) return e;
    }
    const SolveReport rep = solve_robust(target, cfg);
    if (rep.status != SolveStatus::Found) return std::nullopt;
    return best ? *nearest_root(rep, to_triple(best->eq)) : rep.roots.front();
}

inline std::vector<SweepRow> rows_at_gamma(const std::vector<SweepRow>& rows, double Gamma) {
    std::vector<SweepRow> out;
    for (const auto& r : rows) {
        if (r.params.Gamma == Gamma) out.push_back(r);
    }
    std::sort(out.begin(), out.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.params.theta_eps < b.params.theta_eps; });
    return out;
}

/// Sign change of g along the solved rows of one Gamma row, refined by
/// bisection on re-solved points. The first change in theta_eps is used.
template <class G>
std::optional<double> bisect_row_sign_change(const std::vector<SweepRow>& gamma_row, G&& g, double xtol,
                                             const SolverConfig& cfg, std::string* pattern = nullptr) {
    std::vector<const SweepRow*> solved;
    for (const auto& r : gamma_row) {
        if (r.status == RowStatus::Found) solved.push_back(&r);
    }
    if (pattern) {
        pattern->clear();
        for (const auto* r : solved) *pattern += g(r->eq, r->params) > 0.0 ? '+' : '-';
    }
    for (std::size_t k = 0; k + 1 < solved.size(); ++k) {
        const double ga = g(solved[k]->eq, solved[k]->params);
        const double gb = g(solved[k + 1]->eq, solved[k + 1]->params);
        if ((ga > 0.0) == (gb > 0.0)) continue;
        const ModelParams base = solved[k]->params;
        auto f = [&](double te) {
            ModelParams p = base;
            p.theta_eps = te;
            auto e = resolve_near(gamma_row, p, cfg);
            if (!e) throw Error(ErrorKind::NoConvergence, "re-solve failed during boundary bisection");
            return g(*e, p);
        };
        const double lo = solved[k]->params.theta_eps, hi = solved[k + 1]->params.theta_eps;
        return bisect(f, lo, hi, std::min(xtol, 1e-2 * std::max(lo, 1e-6)));
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Role boundaries.

struct ThetaBarPoint {
    double Gamma = 0.0;
    std::optional<double> theta_bar;
    std::string sign_pattern; // sign of beta21 + beta23 beta1 over the solved theta_eps grid
};

struct RoleBoundaries {
    std::optional<double> Gamma_under; // largest grid Gamma with SmallIT on the whole theta_eps grid
    std::optional<double> Gamma_over;  // smallest grid Gamma with RoundTripper on the whole theta_eps grid
    std::vector<ThetaBarPoint> theta_bar;
};

inline bool row_all_role(const std::vector<SweepRow>& gamma_row, RoleKind kind) {
    if (gamma_row.empty()) return false;
    return std::all_of(gamma_row.begin(), gamma_row.end(),
                       [&](const SweepRow& r) { return r.solved() && r.role.variant == kind; });
}

inline RoleBoundaries find_role_boundaries(const SweepSpec& spec, const std::vector<SweepRow>& rows,
                                           const SolverConfig& cfg = {}, double xtol = 1e-4) {
    RoleBoundaries b;
    for (double G : spec.Gamma_grid) {
        const auto row = rows_at_gamma(rows, G);
        if (row_all_role(row, RoleKind::SmallIT)) {
            b.Gamma_under = G;
        } else {
            break;
        }
    }
    for (auto it = spec.Gamma_grid.rbegin(); it != spec.Gamma_grid.rend(); ++it) {
        if (row_all_role(rows_at_gamma(rows, *it), RoleKind::RoundTripper)) {
            b.Gamma_over = *it;
        } else {
            break;
        }
    }
    for (double G : spec.Gamma_grid) {
        if (b.Gamma_under && G <= *b.Gamma_under) continue;
        if (b.Gamma_over && G >= *b.Gamma_over) continue;
        ThetaBarPoint pt;
        pt.Gamma = G;
        const auto row = rows_at_gamma(rows, G);
        pt.theta_bar = bisect_row_sign_change(
            row, [](const Equilibrium& e, const ModelParams&) { return e.period2_direction(); }, xtol, cfg,
            &pt.sign_pattern);
        b.theta_bar.push_back(std::move(pt));
    }
    return b;
}

inline RoleBoundaries find_role_boundaries(const SweepSpec& spec, unsigned jobs = 1, const SolverConfig& cfg = {}) {
    return find_role_boundaries(spec, run_sweep(spec, jobs, cfg), cfg);
}

// ---------------------------------------------------------------------------
// IT benefit thresholds.

struct BenefitThresholds {
    std::optional<double> theta_tilde; // A - 1 changes sign
    std::optional<double> theta_hat;   // dA/dtheta_eps changes sign
    std::string A_pattern;
    std::string slope_pattern;
    bool ordered = true; // theta_hat >= theta_tilde whenever both exist
};

/// Central difference of A in theta_eps on re-solved points.
inline double dA_dtheta_eps(const std::vector<SweepRow>& gamma_row, const ModelParams& p, double h,
                            const SolverConfig& cfg = {}) {
    h = std::min(h, 0.5 * p.theta_eps);
    if (!(h > 0.0)) throw Error(ErrorKind::InvalidParameter, "finite-difference step");
    ModelParams lo = p, hi = p;
    lo.theta_eps -= h;
    hi.theta_eps += h;
    const auto a = resolve_near(gamma_row, lo, cfg);
    const auto b = resolve_near(gamma_row, hi, cfg);
    if (!a || !b) throw Error(ErrorKind::NoConvergence, "re-solve failed for dA/dtheta_eps");
    return (b->A - a->A) / (2.0 * h);
}

inline BenefitThresholds find_benefit_thresholds(const SweepSpec& spec, double Gamma, const SolverConfig& cfg = {},
                                                 double xtol = 1e-4) {
    SweepSpec one = spec;
    one.Gamma_grid = {Gamma};
    one.validate();
    const auto row = solve_gamma_row(one, Gamma, cfg);

    BenefitThresholds t;
    t.theta_tilde = bisect_row_sign_change(
        row, [](const Equilibrium& e, const ModelParams&) { return e.A - 1.0; }, xtol, cfg, &t.A_pattern);

    // Slope sign on grid points, with step half of the local grid spacing.
    std::vector<SweepRow> interior;
    std::vector<double> steps;
    const auto& g = one.theta_eps_grid;
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k].status != RowStatus::Found) continue;
        const double left = k > 0 ? g[k] - g[k - 1] : std::numeric_limits<double>::infinity();
        const double right = k + 1 < g.size() ? g[k + 1] - g[k] : std::numeric_limits<double>::infinity();
        const double h = 0.5 * std::min(left, right);
        if (!std::isfinite(h)) continue;
        interior.push_back(row[k]);
        steps.push_back(h);
    }
    std::vector<double> slope(interior.size());
    for (std::size_t k = 0; k < interior.size(); ++k) {
        slope[k] = dA_dtheta_eps(row, interior[k].params, steps[k], cfg);
        t.slope_pattern += slope[k] > 0.0 ? '+' : '-';
    }
    for (std::size_t k = 0; k + 1 < interior.size(); ++k) {
        if ((slope[k] > 0.0) == (slope[k + 1] > 0.0)) continue;
        const double h = std::min(steps[k], steps[k + 1]);
        const double lo = interior[k].params.theta_eps, hi = interior[k + 1].params.theta_eps;
        t.theta_hat = bisect(
            [&](double te) {
                ModelParams p = interior[k].params;
                p.theta_eps = te;
                return dA_dtheta_eps(row, p, h, cfg);
            },
            lo, hi, std::min(xtol, 1e-2 * lo));
        break;
    }
    if (t.theta_tilde && t.theta_hat) t.ordered = *t.theta_hat >= *t.theta_tilde;
    return t;
}

// ---------------------------------------------------------------------------
// Sweep audits. These are reported, not enforced.

struct SweepFindings {
    std::vector<std::string> small_it_not_harmed; // SmallIT rows with pi_IT >= sigma_2 sigma_v / 2
    std::vector<std::string> harmed_not_increasing; // pi_IT falls in theta_eps inside the harmed region, Gamma <= 1
    std::vector<std::string> branch_jumps;          // coefficient steps > 10x both neighbouring steps
    int unsolved = 0;

    bool clean() const { return small_it_not_harmed.empty() && harmed_not_increasing.empty() && branch_jumps.empty(); }
};

inline std::string describe(const ModelParams& p) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "theta1=%.6g theta_eps=%.6g Gamma=%.6g", p.theta1, p.theta_eps, p.Gamma);
    return buf;
}

inline SweepFindings audit_sweep(const SweepSpec& spec, const std::vector<SweepRow>& rows) {
    SweepFindings f;
    const double half = 0.5 * spec.sigma_2 * spec.sigma_v;
    for (const auto& r : rows) {
        if (!r.solved()) {
            ++f.unsolved;
            continue;
        }
        if (r.role.variant == RoleKind::SmallIT && !(r.out.pi_IT < half)) f.small_it_not_harmed.push_back(describe(r.params));
    }
    for (double G : spec.Gamma_grid) {
        const auto row = rows_at_gamma(rows, G);
        for (std::size_t k = 0; k + 1 < row.size(); ++k) {
            const auto &a = row[k], &b = row[k + 1];
            if (G > 1.0 || !a.solved() || !b.solved()) continue;
            if (a.out.pi_IT < half && b.out.pi_IT < half && b.out.pi_IT < a.out.pi_IT - 1e-12 * half) {
                f.harmed_not_increasing.push_back(describe(b.params));
            }
        }
        for (std::size_t k = 1; k + 2 < row.size(); ++k) {
            if (!row[k - 1].solved() || !row[k].solved() || !row[k + 1].solved() || !row[k + 2].solved()) continue;
            const double before = max_abs_diff(to_triple(row[k].eq), to_triple(row[k - 1].eq));
            const double step = max_abs_diff(to_triple(row[k + 1].eq), to_triple(row[k].eq));
            const double after = max_abs_diff(to_triple(row[k + 2].eq), to_triple(row[k + 1].eq));
            if (step > 10.0 * std::max(before, after) + 1e-6) f.branch_jumps.push_back(describe(row[k + 1].params));
        }
    }
    return f;
}

} // namespace kylehft
