#include "twave/match.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "twave/fit.hpp"
#include "twave/ode.hpp"

namespace twave {

// ---------------------------------------------------------------- B

namespace {

std::array<double, 2> default_far_window(const Profile& p) {
    const double Hm = p.back().H;
    return {Hm / 100.0, Hm};
}

}  // namespace

BEstimate extract_B(const Profile& profile, std::array<double, 2> window, double fit_tol) {
    if (profile.samples.size() < 2) throw DomainError("extract_B needs a sampled profile");
    if (!(window[1] > window[0])) window = default_far_window(profile);
    if (!(window[0] > std::exp(1.0))) throw DomainError("B window must lie above H = e");
    const auto& cv = CoxVoinov::standard();
    BEstimate est;
    est.window = window;
    std::vector<double> lnH, plain, matched;
    for (const auto& st : profile.samples) {
        if (st.H < window[0] * (1 - 1e-12) || st.H > window[1] * (1 + 1e-12)) continue;
        const double L = std::log(st.H), u = st.psi * std::sqrt(st.psi);
        lnH.push_back(L);
        plain.push_back(u - L + std::log(L) / 3.0);
        matched.push_back(cv.T_of_u(u) - L);
        est.sequence.push_back({st.H, plain.back(), matched.back()});
    }
    if (lnH.size() < 10) throw InsufficientOverlap("fewer than 10 samples in the B window");
    const double mid = 0.5 * (std::log(window[0]) + std::log(window[1]));
    double acc = 0.0;
    int cnt = 0;
    for (std::size_t i = 0; i < lnH.size(); ++i)
        if (lnH[i] >= mid) acc += plain[i], ++cnt;
    est.lnB_plain = acc / cnt;
    const auto [pmin, pmax] = std::minmax_element(plain.begin(), plain.end());
    est.spread_plain = *pmax - *pmin;
    const auto [mmin, mmax] = std::minmax_element(matched.begin(), matched.end());
    est.spread_matched = *mmax - *mmin;
    // matched ln B(H) = ln B + O(H^-(3-n) / ln H); extrapolate that rate away
    const double a = 3.0 - profile.params.n;
    std::vector<double> ones(lnH.size(), 1.0), rate(lnH.size());
    for (std::size_t i = 0; i < lnH.size(); ++i) rate[i] = std::exp(-a * lnH[i]) / lnH[i];
    est.lnB_matched = least_squares({ones, rate}, matched).beta[0];
    // the plain estimator carries an O(ln B / ln H) drift by construction, so noise is judged on the matched one
    if (est.spread_matched > fit_tol)
        throw WindowTooNoisy("matched ln B spreads by " + std::to_string(est.spread_matched) + " > " +
                             std::to_string(fit_tol));
    return est;
}

RemainderFit remainder_fit(const Profile& profile, double lnB, std::array<double, 2> window, double noise_floor) {
    const auto& cv = CoxVoinov::standard();
    RemainderFit fit;
    fit.window = window;
    std::vector<double> x, y, yc, R;
    for (const auto& st : profile.samples) {
        if (st.H < window[0] * (1 - 1e-12) || st.H > window[1] * (1 + 1e-12)) continue;
        const double L = std::log(st.H);
        const double r = st.psi / cv.psi(L + lnB) - 1.0;
        fit.max_abs = std::max(fit.max_abs, std::abs(r));
        R.push_back(r);
        x.push_back(L);
    }
    if (x.size() < 10) throw InsufficientOverlap("fewer than 10 samples in the remainder window");
    if (fit.max_abs < noise_floor)
        throw ResidualBelowNoise("max |R| = " + std::to_string(fit.max_abs) + " is below the noise floor");
    std::vector<double> xs;
    int sign = 0;
    for (std::size_t i = 0; i < R.size(); ++i) {
        if (std::abs(R[i]) < noise_floor) continue;
        const int s = R[i] > 0 ? 1 : -1;
        if (sign != 0 && s != sign) throw ResidualBelowNoise("remainder changes sign inside the window");
        sign = s;
        xs.push_back(x[i]);
        y.push_back(std::log(std::abs(R[i])));
        yc.push_back(y.back() + std::log(x[i]));
    }
    if (xs.size() < 10) throw ResidualBelowNoise("too few samples above the noise floor");
    const auto lf = linear_fit(xs, y);
    fit.slope = lf.slope;
    fit.amplitude = sign * std::exp(lf.intercept);
    fit.slope_log_corrected = linear_fit(xs, yc).slope;
    return fit;
}

// ---------------------------------------------------------------- x(H)

std::vector<XSample> reconstruct_x(const Profile& profile) {
    const auto& s = profile.samples;
    if (s.empty()) return {};
    std::vector<XSample> out;
    out.reserve(s.size());
    double x = s.front().H / profile.params.k;
    // integrand H psi^-1/2 in ln H and its derivative; Hermite-corrected trapezoid
    auto f = [](const State& st) { return st.H / std::sqrt(st.psi); };
    auto df = [](const State& st) {
        return st.H / std::sqrt(st.psi) - 0.5 * st.H * st.H * st.dpsi / (st.psi * std::sqrt(st.psi));
    };
    out.push_back({x, s.front().H, std::sqrt(s.front().psi)});
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double h = std::log(s[i].H / s[i - 1].H);
        x += 0.5 * h * (f(s[i - 1]) + f(s[i])) + h * h / 12.0 * (df(s[i - 1]) - df(s[i]));
        out.push_back({x, s[i].H, std::sqrt(s[i].psi)});
    }
    return out;
}

LawFit cox_voinov_law_fit(const std::vector<XSample>& xs, std::array<double, 2> H_window) {
    std::vector<double> lx, y;
    for (const auto& p : xs) {
        if (p.H < H_window[0] * (1 - 1e-12) || p.H > H_window[1] * (1 + 1e-12)) continue;
        lx.push_back(std::log(p.x));
        y.push_back(p.slope * p.slope * p.slope);
    }
    if (lx.size() < 10) throw InsufficientOverlap("fewer than 10 samples in the law window");
    const auto lf = linear_fit(lx, y);
    return {lf.slope, lf.intercept, H_window};
}

// ---------------------------------------------------------------- near field

PressureReport pressure_expansion_report(const Profile& profile, const WSeries& w, double b) {
    const double n = profile.params.n, k2 = profile.params.k * profile.params.k;
    const double H0 = profile.front().H;
    if (series_window_H(w, b) < H0) throw ConvergenceWindow("H0 is outside the series window for this b");
    PressureReport rep;
    rep.limit_expected = k2 * b;
    std::vector<double> H, d;
    for (const auto& st : profile.samples) {
        if (st.H > 100.0 * H0 * (1 + 1e-12)) break;
        H.push_back(st.H);
        d.push_back(st.dpsi);
        MuEval m;
        try {
            m = eval_mu(w, b, st.H);
        } catch (const ConvergenceWindow&) {
            continue;
        }
        const double pred = k2 * m.dmu_dH;
        rep.max_rel_dev = std::max(rep.max_rel_dev, std::abs(st.dpsi - pred) / std::abs(pred));
    }
    if (H.size() < 10) throw InsufficientOverlap("fewer than 10 samples in [H0, 100 H0]");
    std::vector<double> ones(H.size(), 1.0), lh(H.size()), c1(H.size()), c2(H.size()), c3(H.size()), c4(H.size());
    for (std::size_t i = 0; i < H.size(); ++i) lh[i] = std::log(H[i]);
    if (n < 2.0) {
        for (std::size_t i = 0; i < H.size(); ++i) {
            c1[i] = std::pow(H[i], 2.0 - n);
            c2[i] = H[i];
            c3[i] = std::pow(H[i], 2.0 * (2.0 - n) + 1.0);
        }
        rep.limit_estimate = least_squares({ones, c1, c2, c3}, d).beta[0];
    } else if (w.resonance.resonant() && w.resonance.m == 1) {
        rep.log_slope_expected = k2 * w.coeffs.coeff({0, 0, 1});
        for (std::size_t i = 0; i < H.size(); ++i) {
            c1[i] = H[i];
            c2[i] = H[i] * lh[i];
            c3[i] = H[i] * lh[i] * lh[i];
        }
        rep.log_slope = least_squares({ones, lh, c1, c2, c3}, d).beta[1];
    }
    if (n > 2.0) {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < H.size() && H[i] <= 10.0 * H0 * (1 + 1e-12); ++i) {
            x.push_back(lh[i]);
            y.push_back(std::log(std::abs(d[i])));
        }
        rep.dominant_exponent_fit = linear_fit(x, y).slope;
    }
    return rep;
}

LogTermTest near_field_log_test(const Params& params, const NearFieldOptions& opt) {
    const double n = params.n, k = params.k, k2 = k * k;
    const auto w = solve_w(params, opt.degree);
    const auto m = eval_mu(w, opt.b, opt.H_seed);
    // (psi, psi') in s = ln H keeps the relative accuracy of psi' where H psi' is tiny
    auto rhs = [n](double s, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        if (!(y[0] > 0.0)) throw PsiNonpositive("psi <= 0 in the near-field integration");
        const double H = std::exp(s);
        dy[0] = H * y[1];
        dy[1] = -(2.0 / 3.0) / std::sqrt(y[0]) * std::exp((2.0 - n) * s) / (1.0 + std::exp((3.0 - n) * s));
    };
    const double s0 = std::log(opt.H_seed), sa = std::log(opt.window[0]), sb = std::log(opt.window[1]);
    std::vector<double> grid;
    const double ds = std::log(10.0) / opt.samples_per_decade;
    for (double s = sa; s <= sb + 1e-12; s += ds) grid.push_back(s);
    OdeOptions o;
    o.rtol = opt.tol;
    o.atol = 1e-30;
    o.first_step = 1e-3;
    auto run = integrate_dense<2>(rhs, {k2 * (1.0 + m.mu), k2 * m.dmu_dH}, s0, sb, grid, o);
    std::vector<double> lh, d;
    for (const auto& smp : run.samples) {
        lh.push_back(smp.t);
        d.push_back(smp.y[1]);
    }
    // psi' ~ sum c H^e (ln H)^p with e on the lattice i(3-n) + j - 1, p <= 1; column 1 is ln H
    std::set<double> expo;
    for (int i = 0; i <= 8; ++i)
        for (int j = 0; j <= 4; ++j) {
            if (i + j == 0) continue;
            const double e = i * (3.0 - n) + j - 1.0;
            if (e <= opt.max_exponent + 1e-9) expo.insert(std::round(e * 1e9) / 1e9);
        }
    std::vector<std::vector<double>> cols;
    std::vector<double> ones(d.size(), 1.0);
    cols.push_back(ones);
    cols.push_back(lh);
    LogTermTest out;
    for (double e : expo) {
        for (int p = 0; p <= 1; ++p) {
            if (e == 0.0) continue;
            std::vector<double> c(d.size());
            for (std::size_t i = 0; i < d.size(); ++i) c[i] = std::exp(e * lh[i]) * (p ? lh[i] : 1.0);
            cols.push_back(std::move(c));
        }
        out.exponents.push_back(e);
    }
    const auto ls = least_squares(cols, d);
    double mean = 0.0, var = 0.0;
    for (double v : lh) mean += v;
    mean /= lh.size();
    for (double v : lh) var += (v - mean) * (v - mean);
    out.coefficient = ls.beta[1];
    out.std_error = ls.se[1];
    out.t_stat = out.std_error > 0 ? out.coefficient / out.std_error : INFINITY;
    out.amplitude = std::abs(out.coefficient) * std::sqrt(var / lh.size());
    out.rms = ls.rms;
    out.ratio = out.rms > 0 ? out.amplitude / out.rms : INFINITY;
    out.expected = k2 * w.coeffs.coeff({0, 0, 1});
    out.points = static_cast<int>(d.size());
    return out;
}

// ---------------------------------------------------------------- drivers

MatchResult match(const Params& params, const WSeries& w, const MatchOptions& opt) {
    MatchResult res;
    res.n = params.n;
    res.k = params.k;
    auto shot = shoot_b(params, w, opt.shoot);
    res.b_cg = shot.b_cg;
    res.profile = std::move(shot.profile);
    if (res.profile.bracket_only) throw NoConvergence("profile did not converge at H_max");
    res.B_est = extract_B(res.profile, opt.far_window, opt.fit_tol);
    res.B_cg = std::exp(res.B_est.lnB_matched);
    try {
        auto win = opt.remainder_window;
        win[1] = std::min(win[1], res.profile.back().H / 10.0);
        res.remainder = remainder_fit(res.profile, res.B_est.lnB_matched, win);
    } catch (const ResidualBelowNoise& e) {
        res.remainder_note = e.what();
    }
    return res;
}

MatchResult match(const Params& params, const MatchOptions& opt) {
    return match(params, solve_w(params, opt.shoot.degree), opt);
}

int default_threads() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* v = std::getenv("TW_THREADS")) {
        const int cap = std::atoi(v);
        if (cap > 0) hw = std::min(hw, cap);
    }
    return hw;
}

std::vector<SweepRow> sweep_k(const Params& base, const std::vector<double>& k_list, const MatchOptions& opt,
                              int threads) {
    if (k_list.size() < 5) throw DomainError("sweep_k needs at least 5 k values");
    for (std::size_t i = 1; i < k_list.size(); ++i)
        if (!(k_list[i] > k_list[i - 1])) throw DomainError("k_list must be strictly increasing");
    std::vector<SweepRow> rows(k_list.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            SweepRow& r = rows[i];
            r.k = k_list[i];
            try {
                const Params p = validate_params(base.n, k_list[i], base.lambda, base.V);
                const auto m = match(p, opt);
                r.b_cg = m.b_cg;
                r.B_cg = m.B_cg;
                r.ok = true;
            } catch (const Error& e) {
                r.error = e.what();
            }
        }
    };
    const int nt = std::max(1, std::min<int>(threads > 0 ? threads : default_threads(), static_cast<int>(rows.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].dB_dk = rows[i].db_dk = nan;
        if (i == 0 || i + 1 == rows.size()) continue;
        const auto &a = rows[i - 1], &c = rows[i + 1];
        if (!a.ok || !c.ok) continue;
        rows[i].dB_dk = (c.B_cg - a.B_cg) / (c.k - a.k);
        rows[i].db_dk = (c.b_cg - a.b_cg) / (c.k - a.k);
    }
    return rows;
}

}  // namespace twave
