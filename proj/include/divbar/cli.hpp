#pragma once

/**
 * @file cli.hpp
 * @brief Command-line front end: config handling, CSV/JSON emission, and
 *        the solve / barrier / capital / sweep / simulate / validate
 *        commands.
 *
 * Configuration is a flat key=value file plus flag overrides, flags
 * winning. Every run is deterministic given (config, seed): output carries
 * no timestamps, all numbers are printed in round-trip decimal form, and
 * randomness flows only through the seeded counter-based generator.
 *
 * Exit codes: 0 success, 2 configuration error, 3 numeric failure,
 * 4 validation failure.
 */

#include "divbar/model.hpp"
#include "divbar/numerics.hpp"
#include "divbar/policy.hpp"
#include "divbar/risk_solver.hpp"
#include "divbar/simulator.hpp"
#include "divbar/survival_pde.hpp"
#include "divbar/value_function.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace divbar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitValidation = 4;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Round-trip decimal formatting for every numeric field we emit.
inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Cell = std::variant<double, std::string, bool>;

inline std::string cell_text(const Cell& c) {
    if (std::holds_alternative<double>(c)) return format_full(std::get<double>(c));
    if (std::holds_alternative<bool>(c)) return std::get<bool>(c) ? "true" : "false";
    return std::get<std::string>(c);
}

inline void cell_json(nlohmann::json& j, const std::string& key, const Cell& c) {
    if (std::holds_alternative<double>(c))
        j[key] = std::get<double>(c);
    else if (std::holds_alternative<bool>(c))
        j[key] = std::get<bool>(c);
    else
        j[key] = std::get<std::string>(c);
}

/// One emission unit: a scalar summary block plus a rectangular record set.
struct Table {
    std::vector<std::pair<std::string, Cell>> summary;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> r) { rows.push_back(std::move(r)); }

    std::string to_csv() const {
        std::ostringstream os;
        for (std::size_t c = 0; c < columns.size(); ++c)
            os << (c ? "," : "") << columns[c];
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                os << (c ? "," : "") << cell_text(row[c]);
            os << '\n';
        }
        return os.str();
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        if (!summary.empty()) {
            nlohmann::json s;
            for (const auto& [k, v] : summary) cell_json(s, k, v);
            j["summary"] = std::move(s);
        }
        j["columns"] = columns;
        nlohmann::json recs = nlohmann::json::array();
        for (const auto& row : rows) {
            nlohmann::json r;
            for (std::size_t c = 0; c < row.size() && c < columns.size(); ++c)
                cell_json(r, columns[c], row[c]);
            recs.push_back(std::move(r));
        }
        j["records"] = std::move(recs);
        return j;
    }
};

struct RunConfig {
    double mu = 2.0;
    double sigma2 = 50.0;
    double delta = 0.2;
    double c = 0.05;
    double alpha = 0.5;
    double beta = 8.0;
    double T = 10.0;
    std::optional<double> epsilon;
    std::optional<double> x;
    std::optional<double> b;
    double x_min = 0.0;
    std::optional<double> x_max;
    int n_points = 501;
    int nx = 2000;
    int nt = 4000;
    double dt = 1e-3;
    long long n_paths = 100000;
    unsigned long long seed = 0;
    bool antithetic = false;
    bool per_path = false;
    std::string sweep_var;
    std::optional<double> sweep_min;
    std::optional<double> sweep_max;
    int sweep_steps = 0;
    std::string out;
    std::string format = "csv";

    ModelParams params() const {
        if (!(sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
        ModelParams p{mu, std::sqrt(sigma2), delta, c, alpha, beta};
        p.validate();
        return p;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError("config key '" + key + "': trailing characters in '" + v + "'");
    return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
    const double d = parse_double(key, v);
    const long long i = static_cast<long long>(d);
    if (static_cast<double>(i) != d)
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    return i;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

}  // namespace detail

/// Applies one key=value setting; rejects unknown keys.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_int;
    if (key == "mu") cfg.mu = parse_double(key, value);
    else if (key == "sigma2") cfg.sigma2 = parse_double(key, value);
    else if (key == "delta") cfg.delta = parse_double(key, value);
    else if (key == "c") cfg.c = parse_double(key, value);
    else if (key == "alpha") cfg.alpha = parse_double(key, value);
    else if (key == "beta") cfg.beta = parse_double(key, value);
    else if (key == "T") cfg.T = parse_double(key, value);
    else if (key == "epsilon") cfg.epsilon = parse_double(key, value);
    else if (key == "x") cfg.x = parse_double(key, value);
    else if (key == "b") cfg.b = parse_double(key, value);
    else if (key == "x_min") cfg.x_min = parse_double(key, value);
    else if (key == "x_max") cfg.x_max = parse_double(key, value);
    else if (key == "n_points") cfg.n_points = static_cast<int>(parse_int(key, value));
    else if (key == "nx") cfg.nx = static_cast<int>(parse_int(key, value));
    else if (key == "nt") cfg.nt = static_cast<int>(parse_int(key, value));
    else if (key == "dt") cfg.dt = parse_double(key, value);
    else if (key == "n_paths") cfg.n_paths = parse_int(key, value);
    else if (key == "seed") cfg.seed = static_cast<unsigned long long>(parse_int(key, value));
    else if (key == "antithetic") cfg.antithetic = parse_bool(key, value);
    else if (key == "per_path") cfg.per_path = parse_bool(key, value);
    else if (key == "sweep_var") cfg.sweep_var = value;
    else if (key == "sweep_min") cfg.sweep_min = parse_double(key, value);
    else if (key == "sweep_max") cfg.sweep_max = parse_double(key, value);
    else if (key == "sweep_steps") cfg.sweep_steps = static_cast<int>(parse_int(key, value));
    else if (key == "out") cfg.out = value;
    else if (key == "format") cfg.format = value;
    else throw ConfigError("unknown config key: '" + key + "'");
}

/// Flat key=value file; '#' starts a comment, blank lines are skipped.
inline void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config file " + path + ":" + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config file " + path + ":" + std::to_string(lineno) +
                              ": empty key or value");
        apply_setting(cfg, key, value);
    }
}

namespace detail {

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v;
    if (n == 1) {
        v.push_back(lo);
        return v;
    }
    v.reserve(n);
    for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
    return v;
}

/// Emits the table per the run configuration. The summary always goes to
/// `info` as '# key = value' lines except for JSON-to-stdout runs, where
/// the document alone is printed so stdout stays parseable.
inline void emit(const Table& t, const RunConfig& cfg, std::ostream& info) {
    if (cfg.format != "csv" && cfg.format != "json")
        throw ConfigError("format must be csv or json, got '" + cfg.format + "'");
    const bool to_file = !cfg.out.empty();
    const bool json = cfg.format == "json";
    if (to_file || !json)
        for (const auto& [k, v] : t.summary)
            info << "# " << k << " = " << cell_text(v) << "\n";
    const std::string payload = json ? t.to_json().dump(2) + "\n" : t.to_csv();
    if (to_file) {
        std::ofstream f(cfg.out, std::ios::binary);
        if (!f) throw ConfigError("cannot open output file: " + cfg.out);
        f << payload;
        if (!f) throw ConfigError("failed writing output file: " + cfg.out);
        info << "# wrote " << cfg.out << "\n";
    } else {
        info << payload;
    }
}

}  // namespace detail

/// solve: closed-form curves (x, f(x), g(x,b), a*(x)) plus the scheme
/// constants in the summary block.
inline int cmd_solve(const RunConfig& cfg, std::ostream& info) {
    const ModelParams p = cfg.params();
    const ValueFunctionSolution base = solve(p);
    const double bq = cfg.b.value_or(base.b0);
    const ValueFunctionSolution at_b = (bq == base.b0) ? base : solve(p, bq);
    const FeedbackPolicy pol(p);

    if (cfg.n_points < 1) throw ConfigError("n_points must be >= 1");
    const double x_hi = cfg.x_max.value_or(at_b.b + 10.0);
    if (cfg.n_points > 1 && !(x_hi > cfg.x_min))
        throw ConfigError("empty x range: x_max must exceed x_min");

    Table t;
    t.summary = {{"case", to_string(classify_case(p))},
                 {"x_alpha", base.x_alpha},
                 {"x_beta", base.x_beta},
                 {"b0", base.b0},
                 {"b", at_b.b},
                 {"k1", at_b.k1},
                 {"k2", at_b.k2},
                 {"k3", at_b.k3},
                 {"k4", at_b.k4}};
    t.columns = {"x", "f", "g", "a_star"};
    for (double xv : detail::linspace(cfg.x_min, x_hi, cfg.n_points))
        t.add_row({xv, base.value(xv), at_b.value(xv), pol(xv)});
    detail::emit(t, cfg, info);
    return kExitOk;
}

/// barrier: constrained optimum for the configured (T, epsilon).
inline int cmd_barrier(const RunConfig& cfg, std::ostream& info) {
    const ModelParams p = cfg.params();
    if (!cfg.epsilon) throw ConfigError("barrier requires epsilon");
    const double b0 = solve_b0(p);
    const double xq = cfg.x.value_or(b0);
    auto [co, value] = optimal_value(xq, p, cfg.T, *cfg.epsilon);

    Table t;
    t.columns = {"b_star", "constrained", "psi_b_star", "epsilon0",
                 "cost_of_safety", "b0", "x", "value"};
    t.add_row({co.b_star, co.constrained, co.psi_b_star, co.epsilon0, co.cost_of_safety,
               co.value_fn.b0, xq, value});
    detail::emit(t, cfg, info);
    return kExitOk;
}

/// capital: smallest reserve meeting the ruin constraint under barrier b.
inline int cmd_capital(const RunConfig& cfg, std::ostream& info) {
    const ModelParams p = cfg.params();
    if (!cfg.epsilon) throw ConfigError("capital requires epsilon");
    const double bq = cfg.b.value_or(solve_b0(p));
    const double xc = risk_capital(bq, p, cfg.T, *cfg.epsilon);

    Table t;
    t.columns = {"b", "T", "epsilon", "risk_capital"};
    t.add_row({bq, cfg.T, *cfg.epsilon, xc});
    detail::emit(t, cfg, info);
    return kExitOk;
}

/// sweep: one row per sweep value; the column set depends on the variable.
inline int cmd_sweep(const RunConfig& cfg, std::ostream& info) {
    if (cfg.sweep_var.empty()) throw ConfigError("sweep requires sweep_var");
    if (!cfg.sweep_min || !cfg.sweep_max) throw ConfigError("sweep requires sweep_min and sweep_max");
    if (cfg.sweep_steps < 1) throw ConfigError("sweep requires sweep_steps >= 1");
    if (cfg.sweep_steps > 1 && !(*cfg.sweep_max > *cfg.sweep_min))
        throw ConfigError("empty sweep range: sweep_max must exceed sweep_min");
    const std::vector<double> values =
        detail::linspace(*cfg.sweep_min, *cfg.sweep_max, cfg.sweep_steps);
    const std::string& var = cfg.sweep_var;

    Table t;
    if (var == "x") {
        const ModelParams p = cfg.params();
        const ValueFunctionSolution base = solve(p);
        const ValueFunctionSolution at_b =
            cfg.b ? solve(p, *cfg.b) : base;
        const FeedbackPolicy pol(p);
        t.columns = {"x", "f", "g", "a_star"};
        for (double xv : values) t.add_row({xv, base.value(xv), at_b.value(xv), pol(xv)});
    } else if (var == "delta" || var == "mu") {
        if (!cfg.x) throw ConfigError("sweep over " + var + " requires a query x");
        t.columns = {var, "x_alpha", "x_beta", "b0", "g", "a_star"};
        for (double v : values) {
            RunConfig c2 = cfg;
            (var == "delta" ? c2.delta : c2.mu) = v;
            const ModelParams p = c2.params();
            const ValueFunctionSolution s = solve(p);
            // report the value at the requested barrier when one is fixed,
            // at the free optimum b0 otherwise
            const ValueFunctionSolution at_b = cfg.b ? solve(p, *cfg.b) : s;
            t.add_row({v, s.x_alpha, s.x_beta, s.b0, at_b.value(*cfg.x), s.activity(*cfg.x)});
        }
    } else if (var == "sigma2") {
        t.columns = {"sigma2", "x_alpha", "x_beta", "b0"};
        if (cfg.epsilon) {
            t.columns.push_back("b_star");
            t.columns.push_back("constrained");
        }
        if (cfg.x) t.columns.push_back("g");
        for (double v : values) {
            RunConfig c2 = cfg;
            c2.sigma2 = v;
            const ModelParams p = c2.params();
            const ValueFunctionSolution s = solve(p);
            std::vector<Cell> row{v, s.x_alpha, s.x_beta, s.b0};
            if (cfg.epsilon) {
                const ConstrainedOptimum co = solve_b_star(p, cfg.T, *cfg.epsilon);
                row.emplace_back(co.b_star);
                row.emplace_back(co.constrained);
            }
            if (cfg.x) {
                const ValueFunctionSolution at_b = cfg.b ? solve(p, *cfg.b) : s;
                row.emplace_back(at_b.value(*cfg.x));
            }
            t.add_row(std::move(row));
        }
    } else if (var == "epsilon") {
        const ModelParams p = cfg.params();
        t.columns = {"epsilon", "b_star", "constrained", "psi_b_star", "risk_capital"};
        for (double v : values) {
            const ConstrainedOptimum co = solve_b_star(p, cfg.T, v);
            const double xc = risk_capital(co.b_star, p, cfg.T, v);
            t.add_row({v, co.b_star, co.constrained, co.psi_b_star, xc});
        }
    } else {
        throw ConfigError("invalid sweep_var '" + var +
                          "': expected one of delta|epsilon|sigma2|mu|x");
    }
    detail::emit(t, cfg, info);
    return kExitOk;
}

/// simulate: reflected-path Monte Carlo; per-path export when requested.
inline int cmd_simulate(const RunConfig& cfg, std::ostream& info) {
    const ModelParams p = cfg.params();
    const double bq = cfg.b.value_or(solve_b0(p));
    const double xq = cfg.x.value_or(0.5 * bq);
    SimConfig sc;
    sc.dt = cfg.dt;
    sc.n_paths = cfg.n_paths;
    sc.seed = cfg.seed;
    sc.antithetic = cfg.antithetic;
    sc.record_paths = cfg.per_path;
    const SimBatch batch = simulate_reflected(xq, bq, p, cfg.T, sc);

    Table t;
    t.summary = {{"x", xq},
                 {"b", bq},
                 {"T", cfg.T},
                 {"dt", cfg.dt},
                 {"n_paths", static_cast<double>(batch.n_paths)},
                 {"seed", static_cast<double>(cfg.seed)},
                 {"ruin_fraction", batch.ruin_fraction},
                 {"ruin_se", batch.ruin_se},
                 {"discounted_dividends", batch.discounted_dividends},
                 {"dividends_se", batch.dividends_se}};
    if (cfg.per_path) {
        t.columns = {"path", "ruin_time", "dividends"};
        for (std::size_t i = 0; i < batch.paths.size(); ++i)
            t.add_row({static_cast<double>(i), batch.paths[i].ruin_time,
                       batch.paths[i].dividends});
    } else {
        t.columns = {"x", "b", "T", "ruin_fraction", "ruin_se", "discounted_dividends",
                     "dividends_se"};
        t.add_row({xq, bq, cfg.T, batch.ruin_fraction, batch.ruin_se,
                   batch.discounted_dividends, batch.dividends_se});
    }
    detail::emit(t, cfg, info);
    return kExitOk;
}

/// validate: the cross-check suite. Machine-readable one row per check;
/// exit code 4 when any check fails.
inline int cmd_validate(const RunConfig& cfg, std::ostream& info) {
    Table t;
    t.columns = {"check", "pass", "measured", "threshold"};
    bool all_pass = true;
    auto report = [&](const std::string& name, bool pass, double measured, double threshold) {
        t.add_row({name, pass, measured, threshold});
        all_pass = all_pass && pass;
    };

    const ModelParams p = cfg.params();
    const CaseLabel label = classify_case(p);
    report("case_is_supported", label == CaseLabel::CaseI,
           static_cast<double>(static_cast<int>(label)), 0.0);
    if (label != CaseLabel::CaseI) {
        detail::emit(t, cfg, info);
        return kExitValidation;
    }

    const ValueFunctionSolution s0 = solve(p);

    report("smooth_fit", smooth_fit_mismatch(s0) <= 1e-8, smooth_fit_mismatch(s0), 1e-8);

    double worst_hjb = 0.0;
    double min_gp = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i) {
        const double xv = s0.b * (i + 0.5) / 1000.0;
        worst_hjb = std::max(worst_hjb, std::abs(hjb_residual(s0, xv)));
        min_gp = std::min(min_gp, s0.derivative(xv));
    }
    report("hjb_residual", worst_hjb <= 1e-6, worst_hjb, 1e-6);
    report("g_prime_floor", min_gp >= 1.0 - 1e-10, min_gp, 1.0 - 1e-10);
    report("b0_first_order", std::abs(s0.derivative(s0.b0) - 1.0) <= 1e-10,
           std::abs(s0.derivative(s0.b0) - 1.0), 1e-10);
    report("b0_second_order", std::abs(s0.second_derivative(s0.b0)) <= 1e-8,
           std::abs(s0.second_derivative(s0.b0)), 1e-8);

    double worst_dgdb = -std::numeric_limits<double>::infinity();
    for (double bf : {1.0, 1.25, 2.0})
        for (double xf : {0.1, 0.5, 1.0})
            worst_dgdb = std::max(worst_dgdb, dg_db(xf * s0.b0, p, bf * s0.b0));
    report("dg_db_nonpositive", worst_dgdb <= 1e-10, worst_dgdb, 1e-10);

    // Probability cross-checks at a reduced, seeded budget.
    const double b_v = std::max(100.0, s0.x_beta + 5.0);
    const double x_v = 0.5 * b_v;
    {
        const double psi_pde = ruin_probability(b_v, x_v, 10.0, p);
        SimConfig sc;
        sc.dt = 1e-3;
        sc.n_paths = 20000;
        sc.seed = cfg.seed;
        const SimBatch mc = simulate_reflected(x_v, b_v, p, 10.0, sc);

        // Grid-time ruin detection plus projection reflection bias the ruin
        // frequency low, never high. The boundary part acts like displacing
        // both ends of the domain outward by 0.5826 * a * sigma * sqrt(dt)
        // and is priced here with one extra PDE solve; the residual Euler
        // weak error from the x-dependent coefficients gets a flat allowance
        // calibrated at the reference parameters.
        const FeedbackPolicy pol(p);
        const double disp = 0.5826 * p.sigma * std::sqrt(sc.dt);
        const double shift_b = disp * pol(b_v);
        const double shift_0 = disp * p.alpha;
        const double psi_disp =
            ruin_probability(b_v + shift_b + shift_0, x_v + shift_0, 10.0, p);
        const double deficit_tol =
            3.0 * mc.ruin_se + (psi_pde - psi_disp) + 0.004;
        const bool ok = mc.ruin_fraction - psi_pde <= 3.0 * mc.ruin_se &&
                        psi_pde - mc.ruin_fraction <= deficit_tol;
        report("psi_pde_vs_mc", ok, psi_pde - mc.ruin_fraction, deficit_tol);
    }
    {
        const double T_long = std::ceil(-std::log(1e-4) / p.c);
        SimConfig sc;
        sc.dt = 2e-3;
        sc.n_paths = 5000;
        sc.seed = cfg.seed + 1;
        const ValueFunctionSolution sb = solve(p, b_v);
        const SimBatch mc = estimate_J(x_v, b_v, p, T_long, sc);
        const double gap = std::abs(mc.discounted_dividends - sb.value(x_v));
        report("value_pde_vs_mc", gap <= 3.0 * mc.dividends_se, gap, 3.0 * mc.dividends_se);
    }
    {
        const double eps0 = lower_bound_epsilon0(s0.b0, p, 300.0);
        const double psi300 = ruin_probability(s0.b0, s0.b0, 300.0, p);
        report("epsilon0_lower_bound", psi300 >= eps0, psi300, eps0);
    }
    {
        const double b1 = s0.x_beta + 5.0;
        const double b2 = b1 + 2.0 * p.sigma * p.beta;
        const double mid = 0.5 * (b1 + b2);
        const double series = bm_band_stay_probability(b1, b2, mid, p, 1.0);
        const MCEstimate mc = mc_band_stay_probability(b1, b2, mid, p, 1.0, 1e-3, 20000,
                                                       cfg.seed + 2);
        const double gap = std::abs(series - mc.value);
        report("band_series_vs_mc", gap <= 3.0 * mc.se, gap, 3.0 * mc.se);
    }
    {
        SimConfig sc;
        sc.dt = 1e-2;
        sc.n_paths = 512;
        sc.seed = cfg.seed + 3;
        const SimBatch a = simulate_reflected(x_v, b_v, p, 1.0, sc);
        const SimBatch b = simulate_reflected(x_v, b_v, p, 1.0, sc);
        const bool same = a.ruin_fraction == b.ruin_fraction &&
                          a.discounted_dividends == b.discounted_dividends;
        report("seeded_determinism", same,
               std::abs(a.discounted_dividends - b.discounted_dividends), 0.0);
    }

    detail::emit(t, cfg, info);
    return all_pass ? kExitOk : kExitValidation;
}

/// Full front end: parses flags, merges the config file (flags win),
/// dispatches the command, and maps failures onto the exit-code contract.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
    CLI::App app{"dividend-barrier policy toolkit"};
    app.name("divbar");
    std::string command;
    app.add_option("command", command, "one of: solve barrier capital sweep simulate validate")
        ->required();
    std::string config_path;
    app.add_option("--config", config_path, "flat key=value configuration file");

    static const std::vector<std::string> kKeys = {
        "mu", "sigma2", "delta", "c", "alpha", "beta", "T", "epsilon",
        "x", "b", "x_min", "x_max", "n_points", "nx", "nt", "dt",
        "n_paths", "seed", "sweep_var", "sweep_min", "sweep_max", "sweep_steps",
        "out", "format"};
    std::map<std::string, std::string> staged;
    for (const auto& k : kKeys)
        app.add_option("--" + k, staged[k], "override config key '" + k + "'");
    bool flag_antithetic = false, flag_per_path = false;
    app.add_flag("--antithetic", flag_antithetic, "pair each path with its mirrored twin");
    app.add_flag("--per_path", flag_per_path, "emit per-path records from simulate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) load_config_file(cfg, config_path);
        for (const auto& k : kKeys)
            if (app.count("--" + k) > 0) apply_setting(cfg, k, staged[k]);
        if (flag_antithetic) cfg.antithetic = true;
        if (flag_per_path) cfg.per_path = true;

        if (command == "solve") return cmd_solve(cfg, out);
        if (command == "barrier") return cmd_barrier(cfg, out);
        if (command == "capital") return cmd_capital(cfg, out);
        if (command == "sweep") return cmd_sweep(cfg, out);
        if (command == "simulate") return cmd_simulate(cfg, out);
        if (command == "validate") return cmd_validate(cfg, out);
        err << "error: unknown command '" << command
            << "' (expected solve|barrier|capital|sweep|simulate|validate)\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const UnsupportedCaseError& e) {
        err << "unsupported case: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace divbar::cli
