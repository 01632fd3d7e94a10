#include "twave/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace twave {

std::string fmt17(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw DomainError("cannot open " + tmp.string() + " for writing");
        os << content;
        os.flush();
        if (!os) throw DomainError("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw DomainError("rename to " + path + " failed: " + ec.message());
    }
}

std::string profile_csv(const Profile& p) {
    std::string out = "H,psi,dpsi\n";
    for (const auto& s : p.samples) out += fmt17(s.H) + "," + fmt17(s.psi) + "," + fmt17(s.dpsi) + "\n";
    return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "k,b_cg,B_cg,dB_dk\n";
    for (const auto& r : rows) {
        if (!r.ok) continue;
        out += fmt17(r.k) + "," + fmt17(r.b_cg) + "," + fmt17(r.B_cg) + "," + fmt17(r.dB_dk) + "\n";
    }
    return out;
}

std::string trajectory_csv(const Trajectory& tr) {
    std::string out = "s,r,q,p\n";
    for (const auto& p : tr.points) out += fmt17(p.s) + "," + fmt17(p.r) + "," + fmt17(p.q) + "," + fmt17(p.p) + "\n";
    return out;
}

std::string law_csv(const std::vector<XSample>& xs) {
    std::string out = "x,dHdx_cubed,ln_x\n";
    for (const auto& p : xs)
        out += fmt17(p.x) + "," + fmt17(p.slope * p.slope * p.slope) + "," + fmt17(std::log(p.x)) + "\n";
    return out;
}

std::string grid_csv(const GridFn& f) {
    std::string out = "H,psi\n";
    for (std::size_t i = 0; i < f.nodes.size(); ++i) out += fmt17(f.nodes[i]) + "," + fmt17(f.values[i]) + "\n";
    return out;
}

std::string series_csv(const Series3& s, bool with_sigma) {
    std::string out = with_sigma ? "j,l,p,value\n" : "j,l,value\n";
    for (const auto& [a, c] : s.nonzeros()) {
        out += std::to_string(a[0]) + "," + std::to_string(a[1]) + ",";
        if (with_sigma) out += std::to_string(a[2]) + ",";
        out += fmt17(c) + "\n";
    }
    return out;
}

Json num(double x) {
    if (std::isfinite(x)) return x;
    return fmt17(x);
}

Json to_json(const Params& p) {
    return Json{{"n", num(p.n)}, {"k", num(p.k)}, {"lambda", num(p.lambda)}, {"V", num(p.V)}};
}

Json to_json(const BEstimate& b) {
    Json seq = Json::array();
    for (const auto& s : b.sequence) seq.push_back({num(s[0]), num(s[1]), num(s[2])});
    return Json{{"lnB_matched", num(b.lnB_matched)},
                {"lnB_plain", num(b.lnB_plain)},
                {"spread_matched", num(b.spread_matched)},
                {"spread_plain", num(b.spread_plain)},
                {"window", {num(b.window[0]), num(b.window[1])}},
                {"lnB_sequence_columns", {"H", "plain", "matched"}},
                {"lnB_sequence", seq}};
}

Json to_json(const MatchResult& m) {
    Json j{{"n", num(m.n)}, {"k", num(m.k)}, {"b_cg", num(m.b_cg)}, {"B_cg", num(m.B_cg)}};
    j["B_estimate"] = to_json(m.B_est);
    if (m.remainder) {
        const auto& r = *m.remainder;
        j["R_inf_fit"] = {{"exponent", num(r.slope)},
                          {"amplitude", num(r.amplitude)},
                          {"exponent_log_corrected", num(r.slope_log_corrected)},
                          {"max_abs", num(r.max_abs)},
                          {"window", {num(r.window[0]), num(r.window[1])}}};
    } else {
        j["R_inf_fit"] = {{"note", m.remainder_note}};
    }
    j["profile"] = {{"H0", num(m.profile.front().H)},
                    {"H_max", num(m.profile.back().H)},
                    {"psi_end", num(m.profile.back().psi)},
                    {"dpsi_end", num(m.profile.back().dpsi)},
                    {"classification", to_string(m.profile.classification)},
                    {"bracket_only", m.profile.bracket_only},
                    {"bracket", {num(m.profile.bracket[0]), num(m.profile.bracket[1])}},
                    {"bisections", m.profile.bisections},
                    {"steps", m.profile.stats.steps}};
    return j;
}

Json to_json(const std::vector<SweepRow>& rows) {
    Json a = Json::array();
    for (const auto& r : rows) {
        Json j{{"k", num(r.k)}, {"ok", r.ok}};
        if (r.ok) {
            j["b_cg"] = num(r.b_cg);
            j["B_cg"] = num(r.B_cg);
            j["dB_dk"] = num(r.dB_dk);
            j["db_dk"] = num(r.db_dk);
        } else {
            j["error"] = r.error;
        }
        a.push_back(j);
    }
    return a;
}

Json to_json(const BvpSolution& s) {
    return Json{{"eps", num(s.psi.eps)},
                {"grid_size", s.psi.nodes.size()},
                {"iterations", s.iterations},
                {"bracket_gap", num(s.bracket_gap)},
                {"last_update", num(s.last_update)},
                {"relaxed", s.relaxed},
                {"K_eps", num(s.K_eps)},
                {"min_value", num(s.min_value)},
                {"max_value", num(s.max_value)},
                {"lower_margin", num(s.lower_margin)},
                {"upper_margin", num(s.upper_margin)}};
}

Json to_json(const CrossValidation& c) {
    return Json{{"H_lo", num(c.H_lo)},     {"H_hi", num(c.H_hi)}, {"sup_abs", num(c.sup_abs)},
                {"sup_rel", num(c.sup_rel)}, {"H_at_max", num(c.H_at_max)}, {"pass", c.pass}};
}

}  // namespace twave
