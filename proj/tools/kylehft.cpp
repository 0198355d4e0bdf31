// kylehft: single solves, sweeps, limit regimes, boundaries, Monte Carlo
// verification and multi-asset runs. Exit codes: 0 success, 1 invalid input,
// 2 no equilibrium, 3 verification failure.

#include "kylehft/asymptotics.hpp"
#include "kylehft/io.hpp"
#include "kylehft/limits.hpp"
#include "kylehft/monte_carlo.hpp"
#include "kylehft/multi_asset.hpp"
#include "kylehft/solver.hpp"
#include "kylehft/sweeps.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace kylehft;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kNoEquilibrium = 2;
constexpr int kVerifyFailed = 3;

constexpr const char* kOutputDirEnv = "KYLEHFT_OUTPUT_DIR";

struct Output {
    std::string path;
    std::string format = "csv";

    io::Format fmt() const { return format == "json" ? io::Format::Json : io::Format::Csv; }

    // Explicit --output wins; otherwise $KYLEHFT_OUTPUT_DIR/<stem>.<ext>; otherwise stdout.
    void emit(const std::vector<io::Record>& rows, const std::string& stem) const {
        std::string target = path;
        if (target.empty()) {
            if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) {
                fs::create_directories(dir);
                target = (fs::path(dir) / (stem + (fmt() == io::Format::Json ? ".json" : ".csv"))).string();
            }
        }
        if (target.empty()) {
            io::write(std::cout, rows, fmt());
            return;
        }
        std::ofstream out(target, std::ios::binary);
        if (!out) throw Error(ErrorKind::InvalidParameter, "cannot write " + target);
        io::write(out, rows, fmt());
    }
};

void add_output(CLI::App* cmd, Output& o) {
    cmd->add_option("-o,--output", o.path, "Output file (default: stdout or $KYLEHFT_OUTPUT_DIR)");
    cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidParameter, "not a number: " + item);
        }
    }
    if (out.empty()) throw Error(ErrorKind::InvalidParameter, "empty list");
    return out;
}

struct SingleArgs {
    double theta1 = 1.0;
    double theta_eps = 1.0;
    double Gamma = 1.0;
    double sigma_v = 1.0;
    double sigma_2 = 1.0;

    ModelParams params() const {
        ModelParams p;
        p.theta1 = theta1;
        p.theta_eps = theta_eps;
        p.Gamma = Gamma;
        p.sigma_v = sigma_v;
        p.sigma_2 = sigma_2;
        p.validate();
        return p;
    }
};

void add_single(CLI::App* cmd, SingleArgs& a, bool with_theta1 = true, bool with_eps = true, bool with_gamma = true) {
    if (with_theta1) cmd->add_option("--theta1", a.theta1, "sigma_1^2 / sigma_2^2");
    if (with_eps) cmd->add_option("--theta-eps", a.theta_eps, "sigma_eps^2 / sigma_2^2");
    if (with_gamma) cmd->add_option("--gamma", a.Gamma, "normalized inventory aversion");
    cmd->add_option("--sigma-v", a.sigma_v, "value std");
    cmd->add_option("--sigma-2", a.sigma_2, "period-2 noise std");
}

int no_equilibrium(const ModelParams& p, SolveStatus s) {
    std::cerr << "no equilibrium at " << describe(p) << " (" << to_string(s) << ")";
    if (p.theta_eps == 0.0) std::cerr << "; with theta_eps = 0 try `limits duopoly`";
    std::cerr << '\n';
    return kNoEquilibrium;
}

int cmd_solve(const SingleArgs& a, const Output& o, const SolverConfig& cfg) {
    const ModelParams p = a.params();
    const SolveReport rep = solve_robust(p, cfg);
    if (rep.status != SolveStatus::Found) return no_equilibrium(p, rep.status);
    std::vector<io::Record> rows;
    for (const auto& e : rep.roots) rows.push_back(io::row_record(make_row(p, RowStatus::Found, e)));
    if (rows.size() > 1) std::cerr << rows.size() << " SOC-passing roots; listed by residual\n";
    o.emit(rows, "solve");
    return kOk;
}

struct SweepArgs {
    double theta1 = 1.0;
    double eps_lo = 1e-4, eps_hi = 9.0;
    int eps_points = 60;
    std::string gamma_list;
    bool no_continuation = false;
    double sigma_v = 1.0, sigma_2 = 1.0;

    SweepSpec spec() const {
        SweepSpec s;
        s.theta1 = theta1;
        s.theta_eps_grid = log_grid(eps_lo, eps_hi, eps_points);
        s.Gamma_grid = gamma_list.empty() ? default_Gamma_grid() : parse_list(gamma_list);
        s.continuation = !no_continuation;
        s.sigma_v = sigma_v;
        s.sigma_2 = sigma_2;
        s.validate();
        return s;
    }
};

void add_sweep_grid(CLI::App* cmd, SweepArgs& a) {
    cmd->add_option("--theta1", a.theta1, "sigma_1^2 / sigma_2^2");
    cmd->add_option("--theta-eps-min", a.eps_lo, "smallest theta_eps (log grid)");
    cmd->add_option("--theta-eps-max", a.eps_hi, "largest theta_eps (log grid)");
    cmd->add_option("--theta-eps-points", a.eps_points, "theta_eps grid size");
    cmd->add_option("--gamma-grid", a.gamma_list, "comma-separated Gamma values (default 0..1 by 0.1, 2..20, 30..100 by 10)");
    cmd->add_flag("--no-continuation", a.no_continuation, "solve every point independently");
    cmd->add_option("--sigma-v", a.sigma_v, "value std");
    cmd->add_option("--sigma-2", a.sigma_2, "period-2 noise std");
}

int cmd_sweep(const SweepArgs& a, unsigned jobs, const Output& o, const SolverConfig& cfg) {
    const auto rows = run_sweep(a.spec(), jobs, cfg);
    o.emit(io::row_records(rows), "sweep");
    const auto f = audit_sweep(a.spec(), rows);
    if (f.unsolved > 0) std::cerr << f.unsolved << " grid points without an equilibrium\n";
    return kOk;
}

int cmd_boundaries(const SweepArgs& a, unsigned jobs, const Output& o, const SolverConfig& cfg) {
    const SweepSpec spec = a.spec();
    const auto rows = run_sweep(spec, jobs, cfg);
    const RoleBoundaries b = find_role_boundaries(spec, rows, cfg);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<io::Record> out;
    for (const auto& t : b.theta_bar) {
        io::Record r;
        r.add("theta1", spec.theta1).add("Gamma", t.Gamma).add("theta_bar", t.theta_bar.value_or(nan));
        r.add("Gamma_under", b.Gamma_under.value_or(nan)).add("Gamma_over", b.Gamma_over.value_or(nan));
        r.add("role_pattern", t.sign_pattern);
        out.push_back(std::move(r));
    }
    o.emit(out, "boundaries");
    return kOk;
}

int cmd_thresholds(const SweepArgs& a, double Gamma, const Output& o, const SolverConfig& cfg) {
    const SweepSpec spec = a.spec();
    const BenefitThresholds t = find_benefit_thresholds(spec, Gamma, cfg);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    io::Record r;
    r.add("theta1", spec.theta1).add("Gamma", Gamma);
    r.add("theta_tilde", t.theta_tilde.value_or(nan)).add("theta_hat", t.theta_hat.value_or(nan));
    r.add("A_pattern", t.A_pattern).add("slope_pattern", t.slope_pattern).add("ordered", t.ordered);
    o.emit({r}, "thresholds");
    return kOk;
}

struct VerifyArgs {
    SingleArgs single;
    std::string equilibrium_file;
    std::int64_t paths = 1000000;
    bool no_antithetic = false;
    double n_se = 4.0;
};

int cmd_verify(const VerifyArgs& a, std::uint64_t seed, unsigned jobs, const Output& o, const SolverConfig& cfg) {
    SimConfig sc;
    sc.n_paths = a.paths;
    sc.seed = seed;
    sc.antithetic = !a.no_antithetic;
    sc.jobs = static_cast<int>(resolve_jobs(jobs));
    sc.validate();

    ModelParams p;
    Equilibrium e;
    if (!a.equilibrium_file.empty()) {
        std::tie(p, e) = io::read_equilibrium_json(a.equilibrium_file);
    } else {
        p = a.single.params();
        const SolveReport rep = solve_robust(p, cfg);
        if (rep.status != SolveStatus::Found) return no_equilibrium(p, rep.status);
        e = rep.best();
    }
    const SimEstimates s = simulate(e, p, sc);
    const Outcomes exact = compute_outcomes(e, p);
    o.emit(io::verification_records(s, exact), "verify");

    int rc = kOk;
    if (s.max_z(exact) > a.n_se) {
        std::cerr << "moment mismatch: max |z| = " << s.max_z(exact) << " > " << a.n_se << '\n';
        rc = kVerifyFailed;
    }
    try {
        const auto rep = best_response_check(e, p, sc);
        if (!rep.all_concave()) {
            std::cerr << "deviation objective not concave on the stencil\n";
            rc = kVerifyFailed;
        }
    } catch (const Error& err) {
        if (err.kind() != ErrorKind::NotBestResponse) throw;
        std::cerr << err.what() << '\n';
        rc = kVerifyFailed;
    }
    if (rc == kOk) std::cerr << "verified: max |z| = " << s.max_z(exact) << ", no profitable deviation\n";
    return rc;
}

struct MultiArgs {
    std::string params_file;
    std::string gamma_list = "0,0.1,0.2,0.3,0.4,0.5";
    std::optional<double> rho;
};

int cmd_multi(MultiVariant v, const MultiArgs& a, const Output& o, const MultiConfig& cfg) {
    MultiParams base = MultiParams::baseline(0.0);
    std::optional<double> g2, g3;
    if (!a.params_file.empty()) {
        std::ifstream in(a.params_file);
        if (!in) throw Error(ErrorKind::InvalidParameter, "cannot open " + a.params_file);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorKind::InvalidParameter, std::string("malformed params file: ") + ex.what());
        }
        base = io::read_multi_params(j, base);
        if (j.contains("gamma2")) g2 = base.gamma2;
        if (j.contains("gamma3")) g3 = base.gamma3;
    }
    if (a.rho) base.rho = *a.rho;
    std::vector<io::Record> rows;
    int rc = kOk;
    for (double g : parse_list(a.gamma_list)) {
        MultiParams p = base;
        p.gamma1 = g;
        p.gamma2 = g2.value_or(g);
        p.gamma3 = g3.value_or(g / 4.0);
        p.validate();
        try {
            rows.push_back(io::multi_record(p, solve_multi(p, v, cfg), "found"));
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::InvalidParameter) throw;
            std::cerr << "gamma1=" << g << ": " << e.what() << '\n';
            MultiEquilibrium empty;
            empty.variant = v;
            rows.push_back(io::multi_record(p, empty, e.kind() == ErrorKind::PDViolation ? "pd_violation" : "no_convergence"));
            rc = kNoEquilibrium;
        }
    }
    o.emit(rows, std::string("multi_") + std::string(to_string(v)));
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anticipatory trading equilibria: solve, sweep, limits, verify, multi-asset"};
    app.set_config("--config", "", "key = value config file; command-line flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 20240101;
    unsigned jobs = 1;
    app.add_option("--seed", seed, "Monte Carlo seed");
    app.add_option("--jobs", jobs, "worker threads (0 = hardware concurrency)");

    SolverConfig cfg;
    Output out;

    SingleArgs solve_args;
    auto* solve_cmd = app.add_subcommand("solve", "Solve one parameter point");
    add_single(solve_cmd, solve_args);
    add_output(solve_cmd, out);

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "Solve a (theta_eps, Gamma) grid at fixed theta1");
    add_sweep_grid(sweep_cmd, sweep_args);
    add_output(sweep_cmd, out);

    SweepArgs bnd_args;
    auto* bnd_cmd = app.add_subcommand("boundaries", "Role boundaries Gamma_under, Gamma_over and theta_bar(Gamma)");
    add_sweep_grid(bnd_cmd, bnd_args);
    add_output(bnd_cmd, out);

    SweepArgs thr_args;
    double thr_gamma = 0.3;
    auto* thr_cmd = app.add_subcommand("thresholds", "Benefit and profit-monotonicity thresholds at one Gamma");
    add_sweep_grid(thr_cmd, thr_args);
    thr_cmd->add_option("--gamma", thr_gamma, "Gamma at which to locate the thresholds");
    add_output(thr_cmd, out);

    auto* limits_cmd = app.add_subcommand("limits", "Limit regimes");
    limits_cmd->require_subcommand(1);
    SingleArgs t0_args;
    t0_args.theta_eps = 0.0;
    t0_args.Gamma = 0.0;
    bool t0_zeta = false;
    auto* t0_cmd = limits_cmd->add_subcommand("theta1-zero", "theta1 -> 0");
    add_single(t0_cmd, t0_args, false);
    t0_cmd->add_flag("--zeta", t0_zeta, "also estimate lim beta1/theta1");
    add_output(t0_cmd, out);

    SingleArgs gi_args;
    gi_args.theta_eps = 0.0;
    bool gi_thresholds = false;
    auto* gi_cmd = limits_cmd->add_subcommand("gamma-inf", "Gamma -> infinity");
    add_single(gi_cmd, gi_args, true, true, false);
    gi_cmd->add_flag("--thresholds", gi_thresholds, "print theta_tilde and theta_hat instead");
    add_output(gi_cmd, out);

    SingleArgs du_args;
    du_args.theta1 = 0.1;
    du_args.Gamma = 0.0;
    auto* du_cmd = limits_cmd->add_subcommand("duopoly", "Zero signal noise below the existence boundary");
    add_single(du_cmd, du_args, true, false, true);
    add_output(du_cmd, out);

    SingleArgs gt_args;
    gt_args.theta1 = 0.1;
    auto* gt_cmd = limits_cmd->add_subcommand("gamma-tilde", "Existence boundary at zero signal noise");
    add_single(gt_cmd, gt_args, true, false, false);
    add_output(gt_cmd, out);

    VerifyArgs ver_args;
    auto* ver_cmd = app.add_subcommand("verify", "Monte Carlo check of moments and best responses");
    add_single(ver_cmd, ver_args.single);
    ver_cmd->add_option("--equilibrium", ver_args.equilibrium_file, "JSON record from `solve --format json`");
    ver_cmd->add_option("-n,--paths", ver_args.paths, "number of paths (>= 10000)");
    ver_cmd->add_flag("--no-antithetic", ver_args.no_antithetic, "plain sampling");
    ver_cmd->add_option("--max-z", ver_args.n_se, "moment tolerance in standard errors");
    add_output(ver_cmd, out);

    auto* multi_cmd = app.add_subcommand("multi", "Two-asset model over a gamma1 grid");
    multi_cmd->require_subcommand(1);
    MultiArgs multi_args;
    MultiConfig mcfg;
    CLI::App* multi_sub[2];
    const MultiVariant variants[2] = {MultiVariant::Full, MultiVariant::Spillover};
    for (int k = 0; k < 2; ++k) {
        multi_sub[k] = multi_cmd->add_subcommand(std::string(to_string(variants[k])),
                                                 k == 0 ? "IT trades both assets" : "IT trades asset 1 only");
        multi_sub[k]->add_option("--params", multi_args.params_file, "JSON parameters (defaults: baseline calibration)");
        multi_sub[k]->add_option("--gamma-grid", multi_args.gamma_list, "comma-separated gamma1 values");
        multi_sub[k]->add_option("--rho", multi_args.rho, "value correlation");
        multi_sub[k]->add_option("--damping", mcfg.damping, "fixed-point damping in (0, 1]");
        add_output(multi_sub[k], out);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }

    try {
        if (*solve_cmd) return cmd_solve(solve_args, out, cfg);
        if (*sweep_cmd) return cmd_sweep(sweep_args, jobs, out, cfg);
        if (*bnd_cmd) return cmd_boundaries(bnd_args, jobs, out, cfg);
        if (*thr_cmd) return cmd_thresholds(thr_args, thr_gamma, out, cfg);
        if (*t0_cmd) {
            const auto& a = t0_args;
            const auto lim = t0_zeta ? solve_theta1_zero_with_zeta(a.theta_eps, a.Gamma, a.sigma_v, a.sigma_2)
                                     : solve_theta1_zero(a.theta_eps, a.Gamma, a.sigma_v, a.sigma_2);
            out.emit({io::theta1_zero_record(a.theta_eps, a.Gamma, lim)}, "theta1_zero");
            return kOk;
        }
        if (*gi_cmd) {
            const auto& a = gi_args;
            if (gi_thresholds) {
                out.emit({io::thresholds_record(a.theta1, gamma_inf_thresholds_raw(a.theta1),
                                                gamma_inf_thresholds(a.theta1))},
                         "gamma_inf_thresholds");
            } else {
                out.emit({io::gamma_inf_record(a.theta1, a.theta_eps,
                                               solve_gamma_inf(a.theta1, a.theta_eps, a.sigma_v, a.sigma_2))},
                         "gamma_inf");
            }
            return kOk;
        }
        if (*du_cmd) {
            ModelParams p = du_args.params();
            p.theta_eps = 0.0;
            const DuopolyReport rep = solve_duopoly_all(p.theta1, p.Gamma, cfg);
            if (rep.status != SolveStatus::Found) {
                std::cerr << "no duopoly equilibrium at " << describe(p) << " (" << to_string(rep.status) << ")\n";
                return kNoEquilibrium;
            }
            std::vector<io::Record> rows;
            for (const auto& d : rep.roots)
                rows.push_back(io::row_record(make_row(p, RowStatus::Duopoly, d.as_signal_form())));
            out.emit(rows, "duopoly");
            return kOk;
        }
        if (*gt_cmd) {
            const auto b = find_gamma_tilde_bracket(gt_args.theta1, cfg);
            out.emit({io::gamma_tilde_record(gt_args.theta1, b)}, "gamma_tilde");
            return kOk;
        }
        if (*ver_cmd) return cmd_verify(ver_args, seed, jobs, out, cfg);
        for (int k = 0; k < 2; ++k)
            if (*multi_sub[k]) return cmd_multi(variants[k], multi_args, out, mcfg);
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        switch (e.kind()) {
        case ErrorKind::InvalidParameter: return kInvalid;
        case ErrorKind::NotBestResponse: return kVerifyFailed;
        default: return kNoEquilibrium;
        }
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kInvalid;
    }
    return kInvalid;
}
