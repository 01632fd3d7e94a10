// twave: command-line driver for the traveling-wave profile solvers.
//
//   twave solve  --n 2 --k 1 --hmax 1e6 --out prof.csv
//   twave series --n 1.5 --k 1 --degree 10 --check-residual
//   twave verify --only dynsys --out report.json

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twave/bvp.hpp"
#include "twave/dynsys.hpp"
#include "twave/io.hpp"
#include "twave/match.hpp"
#include "twave/verify.hpp"

namespace {

using twave::Json;
using twave::num;

/// Every knob of every command. Each subcommand binds the subset it uses and
/// reports that subset as its effective config.
struct RunConfig {
    std::string command;
    double n = 2.0;
    double k = 1.0;
    double lambda = 1.0;
    double V = 1.0 / 3.0;
    double h0 = 1e-4;
    double hmax = 1e6;
    double tol = 1e-12;
    double conv_tol = 1e-5;
    double tol_b = 1e-14;
    int degree = twave::default_series_degree;
    double eps = 1e-3;
    int grid = 8192;
    double bvp_tol = 1e-9;
    int max_iter = 500;
    double fit_tol = 0.05;
    double k_min = 0.5;
    double k_max = 2.0;
    int k_count = 16;
    int threads = 0;
    bool check_residual = false;
    bool cross_check = false;
    std::string only;
    int criterion = 0;
    std::string format = "csv";
    std::string out;
    std::string summary;
    std::string law;
    std::string trajectory;
};

/// key -> option name for config files; also the keys of the effective config.
using Binder = std::vector<std::pair<std::string, std::function<Json(const RunConfig&)>>>;

#define KEY(name, field) {name, [](const RunConfig& c) { return Json(c.field); }}
#define KEY_NUM(name, field) {name, [](const RunConfig& c) { return num(c.field); }}

const std::map<std::string, Binder>& binders() {
    static const std::map<std::string, Binder> m{
        {"solve",
         {KEY_NUM("n", n), KEY_NUM("k", k), KEY_NUM("lambda", lambda), KEY_NUM("V", V), KEY_NUM("h0", h0),
          KEY_NUM("hmax", hmax), KEY_NUM("tol", tol), KEY_NUM("conv-tol", conv_tol), KEY_NUM("tol-b", tol_b),
          KEY("degree", degree), KEY("format", format), KEY("out", out), KEY("summary", summary)}},
        {"series",
         {KEY_NUM("n", n), KEY_NUM("k", k), KEY_NUM("lambda", lambda), KEY_NUM("V", V), KEY("degree", degree),
          KEY("check-residual", check_residual), KEY("format", format), KEY("out", out),
          KEY("summary", summary)}},
        {"bvp",
         {KEY_NUM("n", n), KEY_NUM("k", k), KEY_NUM("lambda", lambda), KEY_NUM("V", V), KEY_NUM("eps", eps),
          KEY("grid", grid), KEY_NUM("bvp-tol", bvp_tol), KEY("max-iter", max_iter),
          KEY("cross-check", cross_check), KEY_NUM("h0", h0), KEY_NUM("hmax", hmax), KEY("format", format),
          KEY("out", out), KEY("summary", summary)}},
        {"match",
         {KEY_NUM("n", n), KEY_NUM("k", k), KEY_NUM("lambda", lambda), KEY_NUM("V", V), KEY_NUM("h0", h0),
          KEY_NUM("hmax", hmax), KEY_NUM("tol", tol), KEY_NUM("conv-tol", conv_tol), KEY_NUM("tol-b", tol_b),
          KEY("degree", degree), KEY_NUM("fit-tol", fit_tol), KEY("format", format), KEY("out", out),
          KEY("summary", summary), KEY("law", law), KEY("trajectory", trajectory)}},
        {"sweep",
         {KEY_NUM("n", n), KEY_NUM("lambda", lambda), KEY_NUM("V", V), KEY_NUM("k-min", k_min),
          KEY_NUM("k-max", k_max), KEY("k-count", k_count), KEY_NUM("h0", h0), KEY_NUM("hmax", hmax),
          KEY_NUM("tol", tol), KEY_NUM("tol-b", tol_b), KEY("degree", degree), KEY_NUM("fit-tol", fit_tol),
          KEY("format", format), KEY("out", out), KEY("summary", summary)}},
        {"verify", {KEY("only", only), KEY("criterion", criterion), KEY("out", out)}},
    };
    return m;
}

#undef KEY
#undef KEY_NUM

Json effective_config(const RunConfig& c) {
    Json j{{"command", c.command}};
    for (const auto& [key, get] : binders().at(c.command)) j[key] = get(c);
    return j;
}

/// Reads a flat key=value or JSON config into "--key value" arguments.
std::vector<std::string> config_args(const std::string& path, const std::string& command) {
    std::ifstream is(path);
    if (!is) throw twave::DomainError("cannot read config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    const std::string text = ss.str();
    std::vector<std::pair<std::string, std::string>> kv;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        Json j;
        try {
            j = Json::parse(text);
        } catch (const Json::parse_error& e) {
            throw twave::DomainError("config " + path + ": " + e.what());
        }
        for (const auto& [key, v] : j.items()) {
            if (v.is_string()) kv.emplace_back(key, v.get<std::string>());
            else if (v.is_boolean()) kv.emplace_back(key, v.get<bool>() ? "true" : "false");
            else if (v.is_number()) kv.emplace_back(key, v.dump());
            else throw twave::DomainError("config key '" + key + "' must be a scalar");
        }
    } else {
        std::string line;
        int lineno = 0;
        std::istringstream ls(text);
        while (std::getline(ls, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto b = line.find_first_not_of(" \t\r");
            if (b == std::string::npos) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw twave::DomainError("config " + path + ":" + std::to_string(lineno) + ": expected key=value");
            auto trim = [](std::string s) {
                const auto l = s.find_first_not_of(" \t\r"), r = s.find_last_not_of(" \t\r");
                return l == std::string::npos ? std::string() : s.substr(l, r - l + 1);
            };
            kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }
    const auto& keys = binders().at(command);
    std::vector<std::string> args;
    for (const auto& [key, value] : kv) {
        if (key == "command") {
            if (value != command)
                throw twave::DomainError("config " + path + " is for '" + value + "', not '" + command + "'");
            continue;
        }
        bool known = false;
        for (const auto& b : keys) known = known || b.first == key;
        if (!known) throw twave::DomainError("config " + path + ": unknown key '" + key + "' for " + command);
        if (key == "check-residual" || key == "cross-check") {
            if (value == "true" || value == "1") args.push_back("--" + key);
            else if (value != "false" && value != "0")
                throw twave::DomainError("config key '" + key + "' must be true or false");
            continue;
        }
        args.push_back("--" + key);
        args.push_back(value);
    }
    return args;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw twave::RangeError(what);
}

twave::Params params_of(const RunConfig& c) { return twave::validate_params(c.n, c.k, c.lambda, c.V); }

twave::ShootOptions shoot_options(const RunConfig& c) {
    require(c.h0 > 0.0 && c.h0 < 1.0, "--h0 must lie in (0, 1)");
    require(c.hmax >= 1e3 && c.hmax <= 1e12, "--hmax must lie in [1e3, 1e12]");
    require(c.tol > 0.0 && c.tol < 1e-3, "--tol must lie in (0, 1e-3)");
    require(c.conv_tol > 0.0, "--conv-tol must be positive");
    require(c.tol_b > 0.0 && c.tol_b < 1.0, "--tol-b must lie in (0, 1)");
    require(c.degree >= 2 && c.degree <= 40, "--degree must lie in [2, 40]");
    twave::ShootOptions o;
    o.H0 = c.h0;
    o.H_max = c.hmax;
    o.tol = c.tol;
    o.conv_tol = c.conv_tol;
    o.tol_b = c.tol_b;
    o.degree = c.degree;
    return o;
}

twave::MatchOptions match_options(const RunConfig& c) {
    require(c.fit_tol > 0.0, "--fit-tol must be positive");
    twave::MatchOptions o;
    o.shoot = shoot_options(c);
    o.fit_tol = c.fit_tol;
    return o;
}

void emit(const RunConfig& c, const std::string& csv, const Json& summary) {
    if (!c.out.empty()) twave::write_atomic(c.out, c.format == "json" ? summary.dump(2) + "\n" : csv);
    if (!c.summary.empty()) twave::write_atomic(c.summary, summary.dump(2) + "\n");
}

Json envelope(const RunConfig& c) { return Json{{"config", effective_config(c)}}; }

int run_solve(const RunConfig& c) {
    const auto p = params_of(c);
    const auto m = twave::match(p, match_options(c));
    Json j = envelope(c);
    j["result"] = twave::to_json(m);
    j["result"].erase("B_estimate");
    Json data = Json::array();
    if (c.format == "json")
        for (const auto& s : m.profile.samples) data.push_back({num(s.H), num(s.psi), num(s.dpsi)});
    if (c.format == "json") j["profile"] = {{"columns", {"H", "psi", "dpsi"}}, {"rows", data}};
    emit(c, twave::profile_csv(m.profile), j);
    std::printf("solve n=%s k=%s: b_CG=%s B_CG=%s (%zu samples, H in [%g, %g])\n", twave::fmt17(p.n).c_str(),
                twave::fmt17(p.k).c_str(), twave::fmt17(m.b_cg).c_str(), twave::fmt17(m.B_cg).c_str(),
                m.profile.samples.size(), m.profile.front().H, m.profile.back().H);
    return 0;
}

int run_series(const RunConfig& c) {
    require(c.degree >= 1 && c.degree <= 40, "--degree must lie in [1, 40]");
    const auto p = params_of(c);
    const auto g = twave::compute_g(p, c.degree);
    const auto w = twave::solve_w(p, c.degree);
    const bool sigma = w.resonance.resonant();
    Json j = envelope(c);
    j["resonance"] = {{"resonant", sigma}, {"m", w.resonance.m}};
    if (w.resonance.warning) j["resonance"]["warning"] = *w.resonance.warning;
    j["g_radius"] = num(g.radius);
    j["w_radius"] = num(w.radius);
    j["w_sweeps"] = w.sweeps;
    j["warnings"] = w.warnings;
    std::optional<twave::SeriesResidual> res;
    if (c.check_residual) {
        res = twave::series_residual(p, c.degree);
        j["residual"] = {{"exact_available", res->exact_available},
                         {"exact_g_zero", res->exact_g_zero},
                         {"exact_w_fixed_point_zero", res->exact_w_zero},
                         {"exact_forward_zero", res->exact_forward_zero},
                         {"float_g_relative", num(res->float_g_rel)},
                         {"float_w_relative", num(res->float_w_rel)},
                         {"float_w_fixed_point_max_abs", num(res->float_w_fixed_max)},
                         {"all_zero", res->all_zero()}};
    }
    if (c.format == "json") {
        Json gj = Json::array(), wj = Json::array();
        for (const auto& [a, v] : g.coeffs.nonzeros()) gj.push_back({a[0], a[1], num(v)});
        for (const auto& [a, v] : w.coeffs.nonzeros()) wj.push_back({a[0], a[1], a[2], num(v)});
        j["g"] = gj;
        j["w"] = wj;
    }
    emit(c, twave::series_csv(w.coeffs, sigma), j);
    std::printf("series n=%s k=%s degree %d: %s, %zu w coefficients\n", twave::fmt17(p.n).c_str(),
                twave::fmt17(p.k).c_str(), c.degree,
                sigma ? ("resonant m=" + std::to_string(w.resonance.m)).c_str() : "non-resonant",
                w.coeffs.nonzeros().size());
    if (res) {
        std::printf("residual: exact %s, float g %.3g, float w %.3g, fixed point %.3g -> %s\n",
                    !res->exact_available ? "unavailable"
                    : (res->exact_g_zero && res->exact_w_zero && res->exact_forward_zero) ? "zero"
                                                                                          : "NONZERO",
                    res->float_g_rel, res->float_w_rel, res->float_w_fixed_max, res->all_zero() ? "all zero" : "FAIL");
        if (!res->all_zero()) return 3;
    }
    return 0;
}

int run_bvp(const RunConfig& c) {
    const auto p = params_of(c);
    require(c.eps > 0.0 && c.eps < 1.0, "--eps must lie in (0, 1)");
    require(c.grid >= 16 && c.grid <= (1 << 22), "--grid must lie in [16, 4194304]");
    require(c.bvp_tol > 0.0, "--bvp-tol must be positive");
    require(c.max_iter >= 1, "--max-iter must be at least 1");
    twave::BvpOptions o;
    o.eps = c.eps;
    o.grid_size = c.grid;
    o.tol = c.bvp_tol;
    o.max_iter = c.max_iter;
    const auto sol = twave::picard_solve(p, o);
    Json j = envelope(c);
    j["result"] = twave::to_json(sol);
    std::optional<twave::CrossValidation> xv;
    if (c.cross_check) {
        const auto shot = twave::shoot_b(p, shoot_options(c));
        xv = twave::cross_validate(sol.psi, shot.profile);
        j["cross_validation"] = twave::to_json(*xv);
    }
    if (c.format == "json") {
        Json rows = Json::array();
        for (std::size_t i = 0; i < sol.psi.nodes.size(); ++i)
            rows.push_back({num(sol.psi.nodes[i]), num(sol.psi.values[i])});
        j["grid"] = {{"columns", {"H", "psi"}}, {"rows", rows}};
    }
    emit(c, twave::grid_csv(sol.psi), j);
    std::printf("bvp n=%s k=%s eps=%g N=%d: %d iterations, psi in [%.6g, %.6g], K_eps=%.6g%s\n",
                twave::fmt17(p.n).c_str(), twave::fmt17(p.k).c_str(), c.eps, c.grid, sol.iterations, sol.min_value,
                sol.max_value, sol.K_eps, sol.relaxed ? " (relaxed)" : "");
    if (xv)
        std::printf("cross-check vs shooting on [%g, %g]: sup rel %.3g -> %s\n", xv->H_lo, xv->H_hi, xv->sup_rel,
                    xv->pass ? "pass" : "fail");
    return 0;
}

int run_match(const RunConfig& c) {
    const auto p = params_of(c);
    const auto w = twave::solve_w(p, c.degree);
    const auto m = twave::match(p, w, match_options(c));
    Json j = envelope(c);
    j["result"] = twave::to_json(m);
    const auto xs = twave::reconstruct_x(m.profile);
    const double Hm = m.profile.back().H;
    const auto lf = twave::cox_voinov_law_fit(xs, {Hm / 100.0, Hm});
    j["law_fit"] = {{"slope", num(lf.slope)},
                    {"intercept", num(lf.intercept)},
                    {"H_window", {num(lf.window[0]), num(lf.window[1])}}};
    if (!c.law.empty()) twave::write_atomic(c.law, twave::law_csv(xs));
    if (!c.trajectory.empty()) {
        const auto dc = twave::decay_exponent_check(w, m.b_cg);
        twave::write_atomic(c.trajectory, twave::trajectory_csv(dc.trajectory));
        j["decay"] = {{"slope_q", num(dc.slope_q)}, {"slope_p", num(dc.slope_p)}, {"expected", num(dc.expected)}};
    }
    if (c.format == "json") {
        Json rows = Json::array();
        for (const auto& s : m.profile.samples) rows.push_back({num(s.H), num(s.psi), num(s.dpsi)});
        j["profile"] = {{"columns", {"H", "psi", "dpsi"}}, {"rows", rows}};
    }
    emit(c, twave::profile_csv(m.profile), j);
    std::printf("match n=%s k=%s: b_CG=%s ln B_CG=%.10g (spread %.3g), law slope %.5f\n",
                twave::fmt17(p.n).c_str(), twave::fmt17(p.k).c_str(), twave::fmt17(m.b_cg).c_str(),
                std::log(m.B_cg), m.B_est.spread_matched, lf.slope);
    if (m.remainder)
        std::printf("remainder exponent %.4f (log-corrected %.4f) on [%g, %g]\n", m.remainder->slope,
                    m.remainder->slope_log_corrected, m.remainder->window[0], m.remainder->window[1]);
    else
        std::printf("remainder: %s\n", m.remainder_note.c_str());
    return 0;
}

int run_sweep(const RunConfig& c) {
    require(c.k_count >= 5, "--k-count must be at least 5");
    require(c.k_min > 0.0 && c.k_max > c.k_min, "--k-min and --k-max must satisfy 0 < k-min < k-max");
    const auto base = twave::validate_params(c.n, c.k_min, c.lambda, c.V);
    std::vector<double> ks;
    for (int i = 0; i < c.k_count; ++i) ks.push_back(c.k_min + (c.k_max - c.k_min) * i / (c.k_count - 1));
    const auto rows = twave::sweep_k(base, ks, match_options(c), c.threads);
    Json j = envelope(c);
    j["rows"] = twave::to_json(rows);
    emit(c, twave::sweep_csv(rows), j);
    int failed = 0;
    for (const auto& r : rows) {
        if (r.ok)
            std::printf("k=%-8.5g b_CG=%-14.9g B_CG=%-14.9g dB/dk=%.6g\n", r.k, r.b_cg, r.B_cg, r.dB_dk);
        else
            std::printf("k=%-8.5g failed: %s\n", r.k, r.error.c_str()), ++failed;
    }
    return failed == 0 ? 0 : 3;
}

int run_verify(const RunConfig& c) {
    twave::VerifyOptions o;
    o.only = c.only;
    o.criterion = c.criterion;
    o.threads = c.threads;
    bool known = c.only.empty();
    for (const auto& ci : twave::criteria())
        for (const auto& m : ci.modules) known = known || m == c.only;
    require(known, "--only must name a module (series, dynsys, shoot, bvp, match, cli)");
    require(c.criterion >= 0 && c.criterion <= 12, "--criterion must lie in [1, 12]");
    const auto reports = twave::run_verify(o);
    const Json j = twave::verify_json(reports, o);
    if (!c.out.empty()) twave::write_atomic(c.out, j.dump(2) + "\n");
    int failed = 0;
    for (const auto& r : reports) {
        std::printf("%s\n", twave::verify_line(r).c_str());
        failed += r.pass ? 0 : 1;
    }
    std::printf("%zu run, %zu passed, %d failed\n", reports.size(), reports.size() - failed, failed);
    return failed == 0 ? 0 : 1;
}

void add_params(CLI::App* s, RunConfig& c, bool with_k = true) {
    s->add_option("--n", c.n, "mobility exponent, 0 < n < 3");
    if (with_k) s->add_option("--k", c.k, "contact angle, k > 0");
    s->add_option("--lambda", c.lambda, "slip length");
    s->add_option("--V", c.V, "wave speed");
}

void add_shoot(CLI::App* s, RunConfig& c) {
    s->add_option("--h0", c.h0, "first height of the shot");
    s->add_option("--hmax", c.hmax, "far end of the shot");
    s->add_option("--tol", c.tol, "integrator relative tolerance");
    s->add_option("--tol-b", c.tol_b, "bisection width for b");
    s->add_option("--degree", c.degree, "series degree");
}

void add_output(CLI::App* s, RunConfig& c) {
    s->add_option("--out", c.out, "data file");
    s->add_option("--summary", c.summary, "JSON summary file");
    s->add_option("--format", c.format, "format of --out")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    std::string config_path;
    CLI::App app{"Traveling-wave profiles of the thin-film equation near a moving contact line"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.add_option("--threads", cfg.threads, "sweep workers (TW_THREADS also caps the pool)");

    auto* solve = app.add_subcommand("solve", "shoot the contact-line profile onto the far field");
    add_params(solve, cfg);
    add_shoot(solve, cfg);
    solve->add_option("--conv-tol", cfg.conv_tol, "far-field flux mismatch for a converged shot");
    add_output(solve, cfg);

    auto* series = app.add_subcommand("series", "contact-line series g and w");
    add_params(series, cfg);
    series->add_option("--degree", cfg.degree, "total degree");
    series->add_flag("--check-residual", cfg.check_residual, "exact and float residual report");
    add_output(series, cfg);

    auto* bvp = app.add_subcommand("bvp", "Picard iteration on [eps, 1/eps]");
    add_params(bvp, cfg);
    bvp->add_option("--eps", cfg.eps, "truncation of the domain");
    bvp->add_option("--grid", cfg.grid, "grid size");
    bvp->add_option("--bvp-tol", cfg.bvp_tol, "sup-norm update tolerance");
    bvp->add_option("--max-iter", cfg.max_iter, "iteration cap");
    bvp->add_flag("--cross-check", cfg.cross_check, "compare with a shooting profile");
    bvp->add_option("--h0", cfg.h0, "shooting start for --cross-check");
    bvp->add_option("--hmax", cfg.hmax, "shooting end for --cross-check");
    add_output(bvp, cfg);

    auto* match = app.add_subcommand("match", "shoot, then extract B and the remainder");
    add_params(match, cfg);
    add_shoot(match, cfg);
    match->add_option("--conv-tol", cfg.conv_tol, "far-field flux mismatch for a converged shot");
    match->add_option("--fit-tol", cfg.fit_tol, "allowed spread of ln B over the far window");
    match->add_option("--law", cfg.law, "x, (dH/dx)^3, ln x CSV");
    match->add_option("--trajectory", cfg.trajectory, "s, r, q, p CSV of the contact-line trajectory");
    add_output(match, cfg);

    auto* sweep = app.add_subcommand("sweep", "b_CG and B_CG over a k grid");
    add_params(sweep, cfg, false);
    sweep->add_option("--k-min", cfg.k_min, "first k");
    sweep->add_option("--k-max", cfg.k_max, "last k");
    sweep->add_option("--k-count", cfg.k_count, "number of k values, at least 5");
    add_shoot(sweep, cfg);
    sweep->add_option("--fit-tol", cfg.fit_tol, "allowed spread of ln B over the far window");
    add_output(sweep, cfg);

    auto* verify = app.add_subcommand("verify", "acceptance battery");
    verify->add_option("--only", cfg.only, "module name");
    verify->add_option("--criterion", cfg.criterion, "single criterion 1..12");
    verify->add_option("--out", cfg.out, "JSON report");

    for (auto* s : app.get_subcommands({})) s->add_option("--config", config_path, "key=value or JSON config");

    // config values go in front of the command-line flags so the flags win
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        for (std::size_t i = 0; i + 1 < args.size(); ++i) {
            if (args[i] != "--config") continue;
            std::string command;
            for (const auto& a : args)
                if (binders().count(a)) {
                    command = a;
                    break;
                }
            if (command.empty()) break;
            auto extra = config_args(args[i + 1], command);
            const auto pos = std::find(args.begin(), args.end(), command) - args.begin() + 1;
            args.insert(args.begin() + pos, extra.begin(), extra.end());
            break;
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const twave::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    cfg.command = chosen->get_name();
    if (cfg.command != "verify" && cfg.command != "sweep" && cfg.threads != 0) {
        std::fprintf(stderr, "error: --threads only applies to sweep and verify\n");
        return 2;
    }
    try {
        if (cfg.command == "solve") return run_solve(cfg);
        if (cfg.command == "series") return run_series(cfg);
        if (cfg.command == "bvp") return run_bvp(cfg);
        if (cfg.command == "match") return run_match(cfg);
        if (cfg.command == "sweep") return run_sweep(cfg);
        return run_verify(cfg);
    } catch (const twave::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const twave::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}
