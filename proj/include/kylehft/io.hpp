#pragma once

#include "kylehft/asymptotics.hpp"
#include "kylehft/error.hpp"
#include "kylehft/limits.hpp"
#include "kylehft/model.hpp"
#include "kylehft/monte_carlo.hpp"
#include "kylehft/multi_asset.hpp"
#include "kylehft/sweeps.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace kylehft::io {

using Value = std::variant<double, std::string, bool, long long>;

/// Ordered key/value record; one CSV row or one JSON object.
struct Record {
    std::vector<std::pair<std::string, Value>> fields;

    Record& add(std::string key, Value v) {
        fields.emplace_back(std::move(key), std::move(v));
        return *this;
    }
    const Value* find(const std::string& key) const {
        for (const auto& [k, v] : fields)
            if (k == key) return &v;
        return nullptr;
    }
};

inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string to_text(const Value& v) {
    struct {
        std::string operator()(double x) const { return format_double(x); }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(long long n) const { return std::to_string(n); }
    } vis;
    return std::visit(vis, v);
}

inline void write_csv(std::ostream& os, const std::vector<Record>& rows) {
    if (rows.empty()) return;
    for (std::size_t k = 0; k < rows.front().fields.size(); ++k)
        os << (k ? "," : "") << rows.front().fields[k].first;
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t k = 0; k < r.fields.size(); ++k) os << (k ? "," : "") << to_text(r.fields[k].second);
        os << '\n';
    }
}

inline nlohmann::ordered_json to_json(const Record& r) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.fields) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, double>) {
                    // JSON has no nan/inf; keep them as strings so nothing is lost.
                    if (std::isfinite(x)) j[k] = x;
                    else j[k] = format_double(x);
                } else {
                    j[k] = x;
                }
            },
            v);
    }
    return j;
}

inline void write_json(std::ostream& os, const std::vector<Record>& rows) {
    nlohmann::ordered_json j;
    if (rows.size() == 1) {
        j = to_json(rows.front());
    } else {
        j = nlohmann::ordered_json::array();
        for (const auto& r : rows) j.push_back(to_json(r));
    }
    os << j.dump(2) << '\n';
}

enum class Format { Csv, Json };

inline void write(std::ostream& os, const std::vector<Record>& rows, Format f) {
    if (f == Format::Csv) write_csv(os, rows);
    else write_json(os, rows);
}

// ---------------------------------------------------------------------------
// Single-asset schema.

inline const std::vector<std::string>& row_columns() {
    static const std::vector<std::string> cols{
        "theta1",  "theta_eps", "Gamma",  "status",         "Lambda1",       "Lambda21", "Lambda22",
        "A",       "beta1",     "beta21", "beta22",         "beta23",        "role",     "pi_IT",
        "pi_HFT",  "pi_HFT_holding", "pi_HFT_impact", "penalty", "err_p1", "err_p2", "loss_NT1",
        "loss_NT2", "soc1",     "soc2",   "soc3",           "residual"};
    return cols;
}

inline Record row_record(const SweepRow& row) {
    const bool ok = row.solved();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto num = [&](double x) { return Value(ok ? x : nan); };
    const auto& e = row.eq;
    const auto& o = row.out;
    Record r;
    r.add("theta1", row.params.theta1).add("theta_eps", row.params.theta_eps).add("Gamma", row.params.Gamma);
    r.add("status", std::string(to_string(row.status)));
    r.add("Lambda1", num(e.Lambda1)).add("Lambda21", num(e.Lambda21)).add("Lambda22", num(e.Lambda22));
    r.add("A", num(e.A)).add("beta1", num(e.beta1)).add("beta21", num(e.beta21));
    r.add("beta22", num(e.beta22)).add("beta23", num(e.beta23));
    r.add("role", ok ? std::string(to_string(row.role.variant)) : std::string());
    r.add("pi_IT", num(o.pi_IT)).add("pi_HFT", num(o.pi_HFT)).add("pi_HFT_holding", num(o.pi_HFT_holding));
    r.add("pi_HFT_impact", num(o.pi_HFT_impact)).add("penalty", num(o.penalty));
    r.add("err_p1", num(o.err_p1)).add("err_p2", num(o.err_p2));
    r.add("loss_NT1", num(o.loss_NT1)).add("loss_NT2", num(o.loss_NT2));
    r.add("soc1", ok && e.soc_ok.soc1).add("soc2", ok && e.soc_ok.soc2).add("soc3", ok && e.soc_ok.soc3);
    r.add("residual", num(e.residual_norm));
    return r;
}

inline std::vector<Record> row_records(const std::vector<SweepRow>& rows) {
    std::vector<Record> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(row_record(r));
    return out;
}

/// Reads a record written by `row_record` (JSON object) back into parameters
/// and coefficients. Unknown keys are ignored.
inline std::pair<ModelParams, Equilibrium> read_equilibrium_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidParameter, "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorKind::InvalidParameter, std::string("malformed equilibrium file: ") + ex.what());
    }
    if (j.is_array()) {
        if (j.empty()) throw Error(ErrorKind::InvalidParameter, "empty equilibrium file");
        j = j.front();
    }
    auto get = [&](const char* k) {
        if (!j.contains(k) || !j[k].is_number()) throw Error(ErrorKind::InvalidParameter, std::string("missing field ") + k);
        return j[k].get<double>();
    };
    ModelParams p;
    p.theta1 = get("theta1");
    p.theta_eps = get("theta_eps");
    p.Gamma = get("Gamma");
    if (j.contains("sigma_v")) p.sigma_v = get("sigma_v");
    if (j.contains("sigma_2")) p.sigma_2 = get("sigma_2");
    p.validate();
    Equilibrium e;
    e.Lambda1 = get("Lambda1");
    e.Lambda21 = get("Lambda21");
    e.Lambda22 = get("Lambda22");
    e.A = get("A");
    e.beta1 = get("beta1");
    e.beta21 = get("beta21");
    e.beta22 = get("beta22");
    e.beta23 = get("beta23");
    e.soc_ok = check_soc(e, p);
    return {p, e};
}

// ---------------------------------------------------------------------------
// Limit regimes.

inline Record theta1_zero_record(double theta_eps, double Gamma, const Theta1ZeroLimit& l) {
    Record r;
    r.add("theta1", 0.0).add("theta_eps", theta_eps).add("Gamma", Gamma);
    r.add("alpha_norm", l.alpha_norm).add("beta21", l.beta21).add("Lambda22", l.Lambda22);
    r.add("pi_IT", l.pi_IT).add("pi_HFT", l.pi_HFT).add("penalty", l.penalty);
    r.add("zeta", l.zeta ? *l.zeta : std::numeric_limits<double>::quiet_NaN());
    return r;
}

inline Record gamma_inf_record(double theta1, double theta_eps, const GammaInfLimit& g) {
    Record r;
    r.add("theta1", theta1).add("theta_eps", theta_eps).add("Gamma", std::numeric_limits<double>::infinity());
    r.add("Lambda1", g.Lambda1).add("Lambda21", g.Lambda21).add("Lambda22", g.Lambda22).add("A", g.A);
    r.add("beta1", g.beta).add("beta21", 0.0).add("beta22", 0.0).add("beta23", -1.0);
    r.add("role", std::string(to_string(classify_role(g.as_equilibrium()).variant)));
    return r;
}

inline Record thresholds_record(double theta1, const ThresholdPair& raw, const ThresholdPair& clamped) {
    Record r;
    r.add("theta1", theta1).add("theta_tilde", clamped.theta_tilde).add("theta_hat", clamped.theta_hat);
    r.add("theta_tilde_raw", raw.theta_tilde).add("theta_hat_raw", raw.theta_hat);
    return r;
}

inline Record gamma_tilde_record(double theta1, const GammaTildeBracket& b) {
    Record r;
    r.add("theta1", theta1).add("Gamma_tilde", b.hi).add("bracket_lo", b.lo).add("bracket_hi", b.hi);
    return r;
}

// ---------------------------------------------------------------------------
// Verification report.

inline std::vector<Record> verification_records(const SimEstimates& s, const Outcomes& exact) {
    const std::pair<const char*, std::pair<const Estimate*, double>> rows[] = {
        {"pi_IT", {&s.pi_IT, exact.pi_IT}},
        {"pi_HFT", {&s.pi_HFT, exact.pi_HFT}},
        {"pi_HFT_holding", {&s.pi_HFT_holding, exact.pi_HFT_holding}},
        {"pi_HFT_impact", {&s.pi_HFT_impact, exact.pi_HFT_impact}},
        {"penalty", {&s.penalty, exact.penalty}},
        {"err_p1", {&s.err_p1, exact.err_p1}},
        {"err_p2", {&s.err_p2, exact.err_p2}},
        {"loss_NT1", {&s.loss_NT1, exact.loss_NT1}},
        {"loss_NT2", {&s.loss_NT2, exact.loss_NT2}}};
    std::vector<Record> out;
    for (const auto& [name, v] : rows) {
        Record r;
        r.add("quantity", std::string(name)).add("exact", v.second).add("mean", v.first->mean);
        r.add("se", v.first->se).add("z", v.first->z_score(v.second));
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Multi-asset schema: run columns, then every matrix entry with a
// row/column suffix (lambda1_12 is row 1, column 2).

inline Record multi_record(const MultiParams& p, const MultiEquilibrium& e, const std::string& status) {
    Record r;
    r.add("variant", std::string(to_string(e.variant))).add("gamma1", p.gamma1).add("gamma2", p.gamma2);
    r.add("gamma3", p.gamma3).add("rho", p.rho).add("status", status);
    const bool ok = status == "found";
    std::string role1, role2;
    if (ok && e.variant == MultiVariant::Spillover) {
        const auto roles = classify_multi_roles(e, p.rho);
        role1 = to_string(roles.first.variant);
        role2 = to_string(roles.second.variant);
    }
    r.add("role_asset1", role1).add("role_asset2", role2);
    r.add("pd_ok", ok && e.pd_ok.all()).add("block_diagonal", ok && off_diagonal_max(e) == 0.0);
    r.add("iterations", static_cast<long long>(e.iterations));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.add("residual", ok ? multi_residuals(e, p).max() : nan);
    const char* names[] = {"lambda1", "lambda21", "lambda22", "alpha", "beta1", "beta21", "beta22", "beta23"};
    int k = 0;
    e.for_each([&](const Mat2& m) {
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                r.add(std::string(names[k]) + "_" + std::to_string(a + 1) + std::to_string(b + 1), ok ? m(a, b) : nan);
        ++k;
    });
    return r;
}

/// Multi-asset parameters from a JSON object; missing keys keep `base` values.
inline MultiParams read_multi_params(const nlohmann::json& j, MultiParams base) {
    auto num = [&](const char* k, double& out) {
        if (!j.contains(k)) return;
        if (!j[k].is_number()) throw Error(ErrorKind::InvalidParameter, std::string(k) + " must be a number");
        out = j[k].get<double>();
    };
    auto pair = [&](const char* k, Vec2& out) {
        if (!j.contains(k)) return;
        const auto& a = j[k];
        if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
            throw Error(ErrorKind::InvalidParameter, std::string(k) + " must be a pair of numbers");
        out = Vec2(a[0].get<double>(), a[1].get<double>());
    };
    pair("p0", base.p0);
    num("rho", base.rho);
    num("gamma1", base.gamma1);
    num("gamma2", base.gamma2);
    num("gamma3", base.gamma3);
    pair("sigma_v", base.sigma_v);
    pair("sigma_eps", base.sigma_eps);
    pair("sigma_1", base.sigma_1);
    pair("sigma_2", base.sigma_2);
    return base;
}

} // namespace kylehft::io
