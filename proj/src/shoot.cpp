#include "twave/shoot.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/minima.hpp>

#include "twave/cox_voinov.hpp"
#include "twave/fit.hpp"

namespace twave {

namespace {

/// H^(3-n) / (1 + H^(3-n)) as a function of s = ln H, overflow-free.
double mobility_factor(double s, double n) { return 1.0 / (1.0 + std::exp(-(3.0 - n) * s)); }

std::vector<double> log_grid(double s0, double s1, int per_decade) {
    std::vector<double> ts;
    const double ds = std::log(10.0) / per_decade;
    const int nsteps = static_cast<int>(std::floor((s1 - s0) / ds + 1e-9));
    for (int i = 0; i <= nsteps; ++i) ts.push_back(s0 + ds * i);
    if (ts.back() < s1) ts.push_back(s1);
    return ts;
}

OdeOptions ode_options(const ShootOptions& opt) {
    OdeOptions o;
    o.rtol = opt.tol;
    o.atol = opt.tol * 1e-3;
    o.first_step = 1e-3;
    // s = ln H, so the relative floor 1e-14 H on the H-step becomes absolute in s
    o.step_floor = 1e-14;
    return o;
}

/// (psi, chi = H psi', eta, zeta = H eta') in s = ln H.
struct Augmented {
    const Params& p;
    double forcing_scale;
    void operator()(double s, const std::array<double, 4>& y, std::array<double, 4>& dy) const {
        const double psi = y[0];
        if (!(psi > 0.0)) throw PsiNonpositive("psi <= 0 at H = " + std::to_string(std::exp(s)));
        const double f = mobility_factor(s, p.n), ir = 1.0 / std::sqrt(psi);
        dy[0] = y[1];
        dy[1] = y[1] - forcing_scale * (2.0 / 3.0) * ir * f;
        dy[2] = y[3];
        dy[3] = y[3] + forcing_scale * (1.0 / 3.0) * ir * ir * ir * f * y[2];
    }
};

}  // namespace

const char* to_string(ShotClass c) {
    switch (c) {
        case ShotClass::Undershoot: return "Undershoot";
        case ShotClass::Overshoot: return "Overshoot";
        case ShotClass::Converged: return "Converged";
    }
    return "?";
}

double psi_second_derivative(double H, double psi, const Params& params) {
    return -(2.0 / 3.0) / (H * H + std::pow(H, params.n - 1.0)) / std::sqrt(psi);
}

State init_near_contact(double b, double H0, const Params& params, const WSeries& w) {
    const auto m = eval_mu(w, b, H0);
    const double k2 = params.k * params.k;
    return {H0, k2 * (1.0 + m.mu), k2 * m.dmu_dH};
}

Profile integrate_H(const State& start, double H_end, const Params& params, const ShootOptions& opt) {
    if (!(start.H > 0.0) || !(H_end > start.H)) throw DomainError("integrate_H needs 0 < H_start < H_end");
    if (!(start.psi > 0.0)) throw PsiNonpositive("start psi <= 0");
    const double s0 = std::log(start.H), s1 = std::log(H_end);
    const double fs = opt.forcing_scale;
    auto rhs = [&params, fs](double s, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        if (!(y[0] > 0.0)) throw PsiNonpositive("psi <= 0 at H = " + std::to_string(std::exp(s)));
        dy[0] = y[1];
        dy[1] = y[1] - fs * (2.0 / 3.0) / std::sqrt(y[0]) * mobility_factor(s, params.n);
    };
    auto event = [](double, const std::array<double, 2>& y) { return y[1]; };
    auto grid = log_grid(s0, s1, opt.samples_per_decade);
    auto run = integrate_dense<2>(rhs, {start.psi, start.H * start.dpsi}, s0, s1, grid, event, ode_options(opt));
    Profile prof;
    prof.params = params;
    prof.stats = run.stats;
    for (const auto& smp : run.samples) {
        const double H = std::exp(smp.t);
        prof.samples.push_back({H, smp.y[0], smp.y[1] / H});
    }
    const double He = std::exp(run.end.t);
    if (prof.samples.empty() || prof.samples.back().H < He * (1.0 - 1e-14))
        prof.samples.push_back({He, run.end.y[0], run.end.y[1] / He});
    prof.samples.front().H = start.H;
    prof.H_stop = He;
    if (run.event) {
        prof.classification = ShotClass::Undershoot;
    } else {
        const double d = prof.samples.back().dpsi;
        prof.mismatch = d;
        prof.classification = std::abs(d) <= opt.conv_tol ? ShotClass::Converged : ShotClass::Overshoot;
    }
    return prof;
}

double far_field_flux(double H, double psi, const Params& params) {
    const double u = psi * std::sqrt(psi), f = mobility_factor(std::log(H), params.n);
    const auto& cv = CoxVoinov::standard();
    if (u > cv.u(cv.T_min()) && u < cv.u(cv.T_max())) return cv.dpsi_dT(cv.T_of_u(u)) / H * f;
    return (2.0 / 3.0) / (H * std::sqrt(psi)) * (1.0 - 1.0 / (3.0 * u) + 5.0 / (9.0 * u * u)) * f;
}

Profile shoot_once(double b, const Params& params, const WSeries& w, const ShootOptions& opt) {
    const State start = init_near_contact(b, opt.H0, params, w);
    const auto m = eval_mu(w, b, opt.H0);
    const double k2 = params.k * params.k;
    Profile prof = integrate_H(start, opt.H_max, params, opt);
    prof.b = b;
    prof.eta_start = {k2 * m.dmu_db, k2 * m.d2mu_dbdH};
    if (prof.classification == ShotClass::Undershoot) return prof;
    const auto& e = prof.back();
    const double target = opt.far_field_target ? far_field_flux(e.H, e.psi, params) : 0.0;
    prof.mismatch = e.dpsi - target;
    if (prof.mismatch < 0.0)
        prof.classification = ShotClass::Undershoot;  // psi' falls below the decaying flux: crossing lies beyond H_max
    else
        prof.classification = e.dpsi <= opt.conv_tol ? ShotClass::Converged : ShotClass::Overshoot;
    return prof;
}

ShootResult shoot_b(const Params& params, const WSeries& w, const ShootOptions& opt, std::array<double, 2> bracket) {
    double lo = bracket[0], hi = bracket[1];
    if (!(hi > lo)) {
        lo = -10.0 / params.k;
        hi = 10.0 / params.k;
    }
    // keep b H0 inside the series window; large |b| is where the window binds
    const double H0 = opt.H0, n = params.n;
    const double room = series_window_fraction * w.radius - std::pow(H0, 3.0 - n) - std::abs(H0 * std::log(H0));
    if (!(room > 0.0)) throw ConvergenceWindow("H0 = " + std::to_string(H0) + " is outside the series window");
    const double b_lim = 0.999 * room / H0;
    lo = std::max(lo, -b_lim);
    hi = std::min(hi, b_lim);
    if (!(hi > lo)) throw NoBracket("bracket empty after clipping to the series window");
    auto low_side = [](const Profile& p) { return p.classification == ShotClass::Undershoot; };
    Profile plo = shoot_once(lo, params, w, opt), phi = shoot_once(hi, params, w, opt);
    int expansions = 0;
    while (low_side(plo) == low_side(phi)) {
        if (++expansions > opt.max_bracket_expansions)
            throw NoBracket("both bracket ends classify as " + std::string(to_string(plo.classification)));
        const double width = hi - lo;
        if (low_side(plo)) {
            if (hi >= b_lim) throw NoBracket("upper bracket end reached the series window limit");
            lo = hi;
            plo = phi;
            hi = std::min(hi + 2.0 * width, b_lim);
            phi = shoot_once(hi, params, w, opt);
        } else {
            if (lo <= -b_lim) throw NoBracket("lower bracket end reached the series window limit");
            hi = lo;
            phi = plo;
            lo = std::max(lo - 2.0 * width, -b_lim);
            plo = shoot_once(lo, params, w, opt);
        }
    }
    if (!low_side(plo)) throw NoBracket("classification decreases in b across the bracket");
    int iters = 0;
    while (hi - lo > opt.tol_b) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        Profile pm = shoot_once(mid, params, w, opt);
        if (low_side(pm)) {
            lo = mid;
            plo = std::move(pm);
        } else {
            hi = mid;
            phi = std::move(pm);
        }
        ++iters;
    }
    ShootResult res;
    res.b_cg = 0.5 * (lo + hi);
    Profile pm = shoot_once(res.b_cg, params, w, opt);
    // the midpoint may fall on the crossing side by a rounding hair; keep a full-length profile
    if (pm.H_stop < opt.H_max * (1.0 - 1e-12)) pm = phi;
    const double d_end = pm.back().dpsi;
    pm.bracket_only = !(d_end > 0.0 && d_end <= opt.conv_tol);
    pm.classification = pm.bracket_only ? pm.classification : ShotClass::Converged;
    pm.bracket = {lo, hi};
    pm.bisections = iters;
    res.profile = std::move(pm);
    return res;
}

ShootResult shoot_b(const Params& params, const ShootOptions& opt) {
    const auto w = solve_w(params, opt.degree);
    return shoot_b(params, w, opt);
}

std::vector<EtaSample> linearized_eta(const Profile& profile, const ShootOptions& opt) {
    if (profile.samples.size() < 2) throw DomainError("linearized_eta needs a sampled profile");
    const auto& st = profile.front();
    const double s0 = std::log(st.H), s1 = std::log(profile.back().H);
    Augmented rhs{profile.params, opt.forcing_scale};
    auto grid = log_grid(s0, s1, opt.samples_per_decade);
    std::array<double, 4> y0{st.psi, st.H * st.dpsi, profile.eta_start[0], st.H * profile.eta_start[1]};
    auto run = integrate_dense<4>(rhs, y0, s0, s1, grid, ode_options(opt));
    std::vector<EtaSample> out;
    for (const auto& smp : run.samples) {
        const double H = std::exp(smp.t);
        out.push_back({H, smp.y[2], smp.y[3] / H, smp.y[0]});
    }
    return out;
}

double det2(double a, double da, double b, double db) { return a * db - da * b; }

TransversalityReport transversality_check(const Profile& profile, const ShootOptions& opt, double H_lo, double H_hi,
                                          double det_floor, double eta_inf_scale) {
    const auto& st = profile.front();
    const auto& en = profile.back();
    if (H_lo < st.H || H_hi > en.H) throw InsufficientOverlap("determinant grid outside the profile range");
    Augmented rhs{profile.params, opt.forcing_scale};
    const double sa = std::log(H_lo), sb = std::log(H_hi);
    auto grid = log_grid(sa, sb, 20);
    const double s0 = std::log(st.H), s1 = std::log(en.H);
    auto fwd = integrate_dense<4>(
        rhs, {st.psi, st.H * st.dpsi, profile.eta_start[0], st.H * profile.eta_start[1]}, s0, sb, grid,
        ode_options(opt));
    std::vector<double> back_grid(grid.rbegin(), grid.rend());
    auto bwd = integrate_dense<4>(rhs, {en.psi, en.H * en.dpsi, eta_inf_scale, 0.0}, s1, sa, back_grid,
                                  ode_options(opt));
    TransversalityReport rep;
    if (fwd.samples.size() != grid.size() || bwd.samples.size() != grid.size())
        throw StepFailure("eta integration did not reach every grid point");
    rep.det_min_abs = INFINITY;
    int sgn = 0;
    rep.sign_constant = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& f = fwd.samples[i];
        const auto& b = bwd.samples[grid.size() - 1 - i];
        const double H = std::exp(f.t);
        const double d = det2(f.y[2], f.y[3] / H, b.y[2], b.y[3] / H);
        rep.H.push_back(H);
        rep.det.push_back(d);
        rep.det_min_abs = std::min(rep.det_min_abs, std::abs(d));
        const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
        if (s == 0 || (sgn != 0 && s != sgn)) rep.sign_constant = false;
        if (sgn == 0) sgn = s;
    }
    rep.pass = rep.sign_constant && rep.det_min_abs >= det_floor;
    return rep;
}

BetaFit beta_difference(const Profile& p1, const Profile& p2, double H_hi) {
    const double k2 = p1.params.k * p1.params.k;
    std::vector<double> H, D;
    std::size_t j = 0;
    for (const auto& a : p1.samples) {
        if (a.H > H_hi) break;
        while (j < p2.samples.size() && p2.samples[j].H < a.H * (1.0 - 1e-12)) ++j;
        if (j >= p2.samples.size()) break;
        if (std::abs(p2.samples[j].H - a.H) > 1e-12 * a.H) continue;
        H.push_back(a.H);
        D.push_back((a.psi - p2.samples[j].psi) / k2 / a.H);
    }
    if (H.size() < 8) throw InsufficientOverlap("fewer than 8 common samples below H = " + std::to_string(H_hi));
    BetaFit fit;
    fit.points = static_cast<int>(H.size());
    double dmax = 0.0;
    for (double d : D) dmax = std::max(dmax, std::abs(d));
    if (dmax == 0.0) return fit;
    std::vector<double> ones(H.size(), 1.0);
    auto solve = [&](double g) {
        std::vector<double> col(H.size());
        for (std::size_t i = 0; i < H.size(); ++i) col[i] = std::pow(H[i], g);
        return least_squares({ones, col}, D);
    };
    auto rss = [&](double g) { return solve(g).rss; };
    // scan for the basin, then polish with Brent
    double best = 0.05, best_r = INFINITY;
    for (double g = 0.05; g <= 4.0; g += 0.05) {
        const double r = rss(g);
        if (r < best_r) best_r = r, best = g;
    }
    const auto mn = boost::math::tools::brent_find_minima(rss, std::max(0.01, best - 0.05), best + 0.05, 40);
    const auto ls = solve(mn.first);
    fit.exponent = mn.first;
    fit.beta = ls.beta[0];
    fit.amplitude = ls.beta[1];
    fit.rms = ls.rms;
    return fit;
}

namespace {

std::size_t locate(const Profile& p, double H) {
    const auto& s = p.samples;
    if (s.size() < 2 || H < s.front().H || H > s.back().H)
        throw DomainError("H = " + std::to_string(H) + " outside the profile range");
    auto it = std::upper_bound(s.begin(), s.end(), H, [](double h, const State& st) { return h < st.H; });
    std::size_t i = static_cast<std::size_t>(it - s.begin());
    if (i == 0) i = 1;
    if (i >= s.size()) i = s.size() - 1;
    return i - 1;
}

}  // namespace

double profile_psi(const Profile& profile, double H) {
    const std::size_t i = locate(profile, H);
    const auto& a = profile.samples[i];
    const auto& b = profile.samples[i + 1];
    const double h = b.H - a.H, t = (H - a.H) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * a.psi + h10 * h * a.dpsi + h01 * b.psi + h11 * h * b.dpsi;
}

double profile_dpsi(const Profile& profile, double H) {
    const std::size_t i = locate(profile, H);
    const auto& a = profile.samples[i];
    const auto& b = profile.samples[i + 1];
    const double h = b.H - a.H, t = (H - a.H) / h;
    const double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1;
    const double d01 = -6 * t * t + 6 * t, d11 = 3 * t * t - 2 * t;
    return (d00 * a.psi + d01 * b.psi) / h + d10 * a.dpsi + d11 * b.dpsi;
}

}  // namespace twave
