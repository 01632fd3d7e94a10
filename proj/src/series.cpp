#include "twave/series.hpp"

#include <cmath>
#include <sstream>

namespace twave {

namespace {

Series3 lift(const Series2& s) {
    Series3 out(s.max_deg());
    for (const auto& [a, c] : s.nonzeros()) out.set({a[0], a[1], 0}, c);
    return out;
}

Series2 drop_sigma(const Series3& s) {
    Series2 out(s.max_deg());
    for (const auto& [a, c] : s.nonzeros()) {
        if (a[2] != 0) throw DegreeMismatch("non-resonant w carries a sigma monomial");
        out.set({a[0], a[1]}, c);
    }
    return out;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

}  // namespace

Series2 rhs_C_coeffs(const Params& params, int max_deg) {
    if (max_deg < 2) throw DegreeMismatch("rhs_C_coeffs needs max_deg >= 2");
    return kernel::rhs_C<double>(params.k, max_deg);
}

GSeries compute_g(const Params& params, int max_deg) {
    if (max_deg < 2) throw DegreeMismatch("compute_g needs max_deg >= 2");
    GSeries g;
    g.coeffs = kernel::compute_g<double>(params.n, params.k, max_deg);
    g.params = params;
    g.radius = radius_estimate(g.coeffs);
    return g;
}

Series2 g_pde_residual(const GSeries& g) {
    return kernel::g_residual<double>(g.coeffs, g.params.n, g.params.k);
}

double p_minus_eval(const GSeries& g, double r, double q) {
    const double rho = r * r * r, mu = r * q;
    if (std::abs(rho) + std::abs(mu) > series_window_fraction * g.radius)
        throw ConvergenceWindow("(r, q) = (" + fmt(r) + ", " + fmt(q) + ") outside the g series window");
    const double n = g.params.n, k = g.params.k;
    // r^-1 g(r^3, r q) term by term; every monomial carries rho, so no 0/0 at r = 0
    double acc = 0.0;
    for (const auto& [a, c] : g.coeffs.nonzeros()) {
        const int e = 3 * a[0] + a[1] - 1;
        acc += c * std::pow(r, e) * std::pow(q, a[1]);
    }
    return acc + q - 2.0 / (3.0 * k * k * k * (3.0 - n)) * r * r;
}

Series2 apply_T_nonresonant(const Series2& phi, const Params& params, double res_guard) {
    return kernel::apply_T_nonresonant<double>(phi, params.n, res_guard);
}

Series3 apply_T_resonant(const Series3& phi, const Params& params) {
    const auto rc = resonance_class(params.n);
    if (!rc.resonant()) throw IndexViolation("apply_T_resonant called for non-resonant n");
    return kernel::apply_T_resonant<double>(phi, rc.m);
}

WSeries solve_w(const Params& params, int max_deg) {
    if (max_deg < 2) throw DegreeMismatch("solve_w needs max_deg >= 2");
    WSeries w;
    w.params = params;
    w.resonance = resonance_class(params.n);
    if (w.resonance.warning) w.warnings.push_back(*w.resonance.warning);
    const int m = w.resonance.resonant() ? w.resonance.m : 0;
    auto sol = kernel::solve_w<double>(params.n, params.k, m, max_deg, default_res_guard);
    w.coeffs = m == 0 ? lift(sol.w2) : sol.w3;
    w.sweeps = sol.sweeps;
    w.projection_applied = sol.projection_applied;
    w.radius = radius_estimate(w.coeffs);
    return w;
}

Series3 w_fixed_point_residual(const WSeries& w) {
    const auto& p = w.params;
    const auto g = kernel::compute_g<double>(p.n, p.k, w.coeffs.max_deg());
    if (!w.resonance.resonant()) {
        const auto w2 = drop_sigma(w.coeffs);
        return lift(w2 - kernel::apply_T_nonresonant<double>(kernel::phi_nonresonant<double>(g, w2, p.n, p.k),
                                                              p.n, default_res_guard));
    }
    const int m = w.resonance.m;
    return w.coeffs - kernel::apply_T_resonant<double>(kernel::phi_resonant<double>(g, w.coeffs, p.n, p.k, m), m);
}

MuEval eval_mu(const WSeries& w, double b, double H) {
    const double n = w.params.n;
    if (H < 0.0) throw DomainError("eval_mu needs H >= 0");
    MuEval out;
    if (H == 0.0) {
        out.d2mu_dbdH = 1.0;
        if (n < 2.0) {
            out.dmu_dH = b;
        } else {
            // H^(2-n) or ln H blows up; report the sign of the leading singular term
            const double lead = w.resonance.resonant() && w.resonance.m == 1 ? -w.coeffs.coeff({0, 0, 1})
                                                                             : w.coeffs.coeff({0, 1, 0});
            out.dmu_dH = std::copysign(INFINITY, lead);
        }
        return out;
    }
    const double xi = b * H, rho = std::pow(H, 3.0 - n), lnH = std::log(H), sigma = H * lnH;
    if (std::abs(xi) + std::abs(rho) + std::abs(sigma) > series_window_fraction * w.radius)
        throw ConvergenceWindow("H = " + fmt(H) + ", b = " + fmt(b) + " outside the w series window (radius " +
                                fmt(w.radius) + ")");
    const std::array<double, 3> x{xi, rho, sigma};
    const auto [wv, gw] = w.coeffs.value_and_gradient(x);
    const auto wxi = w.coeffs.derivative(0);
    const auto [wx, gx] = wxi.value_and_gradient(x);
    const double drho_dH = (3.0 - n) * rho / H, dsigma_dH = 1.0 + lnH;
    out.mu = xi + wv;
    out.dmu_dH = b + b * gw[0] + drho_dH * gw[1] + dsigma_dH * gw[2];
    out.dmu_db = H * (1.0 + wx);
    out.d2mu_dbdH = 1.0 + wx + H * (b * gx[0] + drho_dH * gx[1] + dsigma_dH * gx[2]);
    return out;
}

double series_window_H(const WSeries& w, double b) {
    const double n = w.params.n, lim = series_window_fraction * w.radius;
    auto load = [&](double lh) {
        const double H = std::exp(lh);
        return std::abs(b) * H + std::pow(H, 3.0 - n) + std::abs(H * lh);
    };
    double lo = -700.0, hi = -1.0;  // load is increasing on H < 1/e
    if (load(hi) <= lim) return std::exp(hi);
    if (load(lo) > lim) return 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (load(mid) <= lim ? lo : hi) = mid;
    }
    return std::exp(lo);
}

}  // namespace twave
