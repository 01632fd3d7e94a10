#include "twave/bvp.hpp"

#include <algorithm>
#include <cmath>

#include "twave/errors.hpp"

namespace twave {

double K_eps(const Params& params, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw RangeError("eps must lie in (0, 1)");
    const double n = params.n, k = params.k, pre = 2.0 / (3.0 * k);
    if (n < 2.0) return k * k + pre * (1.0 / (2.0 - n) + 1.0 / eps);
    if (n == 2.0) return k * k + pre * (1.0 + 1.0 / eps);
    return k * k + pre * (1.0 / ((3.0 - n) * (n - 2.0)) + 1.0 / eps);
}

std::vector<double> geometric_grid(double eps, int size) {
    if (size < 2) throw RangeError("grid needs >= 2 nodes");
    std::vector<double> h(size);
    const double a = std::log(eps), b = -a;
    for (int i = 0; i < size; ++i) h[i] = std::exp(a + (b - a) * i / (size - 1));
    h.front() = eps;
    h.back() = 1.0 / eps;
    return h;
}

GridFn apply_S(const GridFn& psi, const Params& params) {
    const auto& H = psi.nodes;
    const std::size_t N = H.size();
    if (N < 2 || psi.values.size() != N) throw QuadratureError("grid function needs >= 2 matching nodes");
    const double n = params.n, k2 = params.k * params.k;
    std::vector<double> f(N), inner(N);
    for (std::size_t i = 0; i < N; ++i) {
        if (!(psi.values[i] > 0.0)) throw QuadratureError("psi must be positive on the grid");
        f[i] = 1.0 / ((H[i] * H[i] + std::pow(H[i], n - 1.0)) * std::sqrt(psi.values[i]));
    }
    inner[N - 1] = 0.0;
    for (std::size_t i = N - 1; i-- > 0;) inner[i] = inner[i + 1] + 0.5 * (H[i + 1] - H[i]) * (f[i] + f[i + 1]);
    GridFn out{psi.eps, H, std::vector<double>(N)};
    out.values[0] = k2;
    double acc = 0.0;
    for (std::size_t i = 1; i < N; ++i) {
        acc += 0.5 * (H[i] - H[i - 1]) * (inner[i - 1] + inner[i]);
        out.values[i] = k2 + (2.0 / 3.0) * acc;
    }
    return out;
}

namespace {

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

BvpSolution picard_solve(const Params& params, const BvpOptions& opt) {
    if (!(opt.eps > 0.0 && opt.eps < 1.0)) throw RangeError("eps must lie in (0, 1)");
    if (opt.grid_size < 64) throw RangeError("grid_size must be >= 64");
    const double k2 = params.k * params.k;
    BvpSolution sol;
    sol.K_eps = K_eps(params, opt.eps);
    sol.lower_margin = INFINITY;
    sol.upper_margin = INFINITY;
    GridFn cur{opt.eps, geometric_grid(opt.eps, opt.grid_size), {}};
    cur.values.assign(cur.nodes.size(), k2);
    auto track = [&](const GridFn& g) {
        const auto [mn, mx] = std::minmax_element(g.values.begin(), g.values.end());
        sol.lower_margin = std::min(sol.lower_margin, *mn - k2);
        sol.upper_margin = std::min(sol.upper_margin, sol.K_eps - *mx);
    };
    track(cur);
    // even iterates (from below) and odd iterates (from above)
    GridFn even = cur, odd;
    double prev_gap = INFINITY;
    int stall = 0;
    for (int it = 1; it <= opt.max_iter; ++it) {
        GridFn next = apply_S(cur, params);
        track(next);
        const double upd = sup_diff(next.values, cur.values);
        const double slack = opt.bracket_slack * sol.K_eps;
        if (it % 2 == 1) {
            if (!odd.values.empty())
                for (std::size_t i = 0; i < next.values.size(); ++i)
                    if (next.values[i] > odd.values[i] + slack)
                        throw BracketViolation("odd iterates stopped decreasing at iteration " + std::to_string(it));
            odd = next;
        } else {
            for (std::size_t i = 0; i < next.values.size(); ++i)
                if (next.values[i] < even.values[i] - slack)
                    throw BracketViolation("even iterates stopped increasing at iteration " + std::to_string(it));
            even = next;
        }
        for (std::size_t i = 0; i < next.values.size() && !odd.values.empty(); ++i)
            if (even.values[i] > odd.values[i] + slack)
                throw BracketViolation("even iterate above odd iterate at iteration " + std::to_string(it));
        sol.iterations = it;
        sol.last_update = upd;
        cur = std::move(next);
        if (upd <= opt.tol) {
            sol.bracket_gap = odd.values.empty() ? 0.0 : sup_diff(odd.values, even.values);
            GridFn mid = even;
            for (std::size_t i = 0; i < mid.values.size(); ++i) mid.values[i] = 0.5 * (even.values[i] + odd.values[i]);
            sol.psi = std::move(mid);
            break;
        }
        // the bracket closes geometrically when S is a contraction; detect a stall
        if (it % 2 == 0) {
            const double gap = sup_diff(odd.values, even.values);
            stall = gap > 0.9 * prev_gap ? stall + 1 : 0;
            prev_gap = gap;
            if (stall >= 5 && opt.relaxation > 0.0) {
                sol.bracket_gap = gap;
                sol.relaxed = true;
                cur = even;
                for (std::size_t i = 0; i < cur.values.size(); ++i) cur.values[i] = 0.5 * (even.values[i] + odd.values[i]);
                for (int jt = it + 1; jt <= opt.max_iter; ++jt) {
                    GridFn s = apply_S(cur, params);
                    track(s);
                    double d = 0.0;
                    for (std::size_t i = 0; i < s.values.size(); ++i) {
                        const double v = (1.0 - opt.relaxation) * cur.values[i] + opt.relaxation * s.values[i];
                        d = std::max(d, std::abs(v - cur.values[i]));
                        cur.values[i] = v;
                    }
                    sol.iterations = jt;
                    sol.last_update = d;
                    if (d <= opt.tol * opt.relaxation) {
                        sol.psi = cur;
                        break;
                    }
                }
                if (sol.psi.values.empty())
                    throw NoConvergence("relaxed iteration did not reach tol in max_iter");
                break;
            }
        }
    }
    if (sol.psi.values.empty()) throw NoConvergence("Picard iteration did not reach tol in max_iter");
    const auto [mn, mx] = std::minmax_element(sol.psi.values.begin(), sol.psi.values.end());
    sol.min_value = *mn;
    sol.max_value = *mx;
    return sol;
}

double grid_value(const GridFn& f, double H) {
    const auto& x = f.nodes;
    if (H < x.front() || H > x.back()) throw DomainError("H outside the grid");
    auto it = std::upper_bound(x.begin(), x.end(), H);
    std::size_t i = static_cast<std::size_t>(it - x.begin());
    if (i >= x.size()) i = x.size() - 1;
    if (i == 0) i = 1;
    const double t = (std::log(H) - std::log(x[i - 1])) / (std::log(x[i]) - std::log(x[i - 1]));
    return (1.0 - t) * f.values[i - 1] + t * f.values[i];
}

CrossValidation cross_validate(const GridFn& bvp, const Profile& profile, double xval_tol) {
    CrossValidation cv;
    cv.H_lo = std::max(bvp.nodes.front(), 10.0 * profile.front().H);
    cv.H_hi = std::min(bvp.nodes.back(), profile.back().H / 10.0);
    if (!(cv.H_hi > cv.H_lo)) throw InsufficientOverlap("bvp grid and profile do not overlap");
    for (std::size_t i = 0; i < bvp.nodes.size(); ++i) {
        const double H = bvp.nodes[i];
        if (H < cv.H_lo || H > cv.H_hi) continue;
        const double ref = profile_psi(profile, H);
        const double d = std::abs(bvp.values[i] - ref);
        cv.sup_abs = std::max(cv.sup_abs, d);
        if (d / ref > cv.sup_rel) {
            cv.sup_rel = d / ref;
            cv.H_at_max = H;
        }
    }
    cv.pass = cv.sup_rel <= xval_tol;
    return cv;
}

}  // namespace twave
