#include "twave/dynsys.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include <Eigen/Eigenvalues>

#include "twave/fit.hpp"

namespace twave {

bool dynsys_fault_injected() {
    static const bool on = [] {
        const char* v = std::getenv("TWAVE_FAULT");
        return v != nullptr && std::strcmp(v, "dynsys") == 0;
    }();
    return on;
}

namespace {

double np_sign() { return dynsys_fault_injected() ? -1.0 : 1.0; }

}  // namespace

Vec3 vector_field(const PhasePoint& pt, const Params& params) {
    const double n = params.n, k = params.k, r = pt.r, q = pt.q, p = pt.p;
    const double arg = 1.0 + r * q;
    if (!(arg > 0.0)) throw SqrtDomain("1 + r q = " + std::to_string(arg) + " at s = " + std::to_string(pt.s));
    const double r3 = r * r * r;
    const double forcing = 2.0 / (3.0 * k * k * k) * r * r / (1.0 + r3) / std::sqrt(arg);
    return {(3.0 - n) * r / 3.0, -(3.0 - n) * q / 3.0 + p, np_sign() * n * p / 3.0 - forcing};
}

Mat3 jacobian(const PhasePoint& pt, const Params& params) {
    const double n = params.n, k = params.k, r = pt.r, q = pt.q;
    const double arg = 1.0 + r * q;
    if (!(arg > 0.0)) throw SqrtDomain("1 + r q <= 0 in jacobian");
    const double c = 2.0 / (3.0 * k * k * k), r3 = r * r * r, den = 1.0 + r3;
    const double f = r * r / den;
    const double df_dr = (2.0 * r * den - 3.0 * r3 * r) / (den * den);
    const double s = 1.0 / std::sqrt(arg);
    Mat3 J{};
    J[0] = {(3.0 - n) / 3.0, 0.0, 0.0};
    J[1] = {0.0, -(3.0 - n) / 3.0, 1.0};
    J[2] = {-c * (df_dr * s - 0.5 * f * q * s * s * s), 0.5 * c * f * r * s * s * s, np_sign() * n / 3.0};
    return J;
}

Vec3 origin_eigenvalues_closed_form(double n) { return {(3.0 - n) / 3.0, -(3.0 - n) / 3.0, n / 3.0}; }

JacobianOrigin jacobian_origin(const Params& params) {
    JacobianOrigin out;
    out.matrix = jacobian(PhasePoint{}, params);
    Eigen::Matrix3d M;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) M(i, j) = out.matrix[i][j];
    Eigen::EigenSolver<Eigen::Matrix3d> es(M);
    std::array<int, 3> order{0, 1, 2};
    const auto ev = es.eigenvalues();
    std::sort(order.begin(), order.end(), [&](int a, int b) { return ev(a).real() > ev(b).real(); });
    for (int i = 0; i < 3; ++i) {
        out.eigenvalues[i] = ev(order[i]).real();
        Eigen::Vector3d v = es.eigenvectors().col(order[i]).real();
        v.normalize();
        // fix the sign so the largest component is positive
        Eigen::Index imax;
        v.cwiseAbs().maxCoeff(&imax);
        if (v(imax) < 0) v = -v;
        out.eigenvectors[i] = {v(0), v(1), v(2)};
    }
    return out;
}

Trajectory integrate_s(const PhasePoint& start, double s_end, const Params& params, double tol, double ds) {
    if (!(1.0 + start.r * start.q > 0.0)) throw SqrtDomain("start point violates 1 + r q > 0");
    if (start.r < 0.0) throw DomainError("r must be >= 0");
    auto rhs = [&params](double s, const std::array<double, 3>& y, std::array<double, 3>& dy) {
        dy = vector_field(PhasePoint{y[0], y[1], y[2], s}, params);
    };
    const double dir = s_end >= start.s ? 1.0 : -1.0;
    std::vector<double> times;
    const int nsteps = static_cast<int>(std::floor(std::abs(s_end - start.s) / ds + 1e-9));
    for (int i = 0; i <= nsteps; ++i) times.push_back(start.s + dir * ds * i);
    if (times.back() != s_end) times.push_back(s_end);
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol * 1e-3;
    opt.first_step = std::min(1e-3, ds);
    opt.step_floor = 1e-14;
    auto run = integrate_dense<3>(rhs, {start.r, start.q, start.p}, start.s, s_end, times, opt);
    Trajectory tr;
    tr.stats = run.stats;
    const double a = (3.0 - params.n) / 3.0;
    for (const auto& smp : run.samples) {
        PhasePoint pt{smp.y[0], smp.y[1], smp.y[2], smp.t};
        tr.points.push_back(pt);
        if (start.r > 0.0) {
            const double exact = start.r * std::exp(a * (smp.t - start.s));
            tr.r_drift = std::max(tr.r_drift, std::abs(pt.r - exact) / exact);
        } else {
            tr.r_drift = std::max(tr.r_drift, std::abs(pt.r));
        }
    }
    return tr;
}

PhasePoint phase_point_from_series(const WSeries& w, double b, double s) {
    const double H = std::exp(s), a = (3.0 - w.params.n) / 3.0;
    const auto m = eval_mu(w, b, H);
    const double scale = std::exp(-a * s);
    return {std::exp(a * s), scale * m.mu, scale * H * m.dmu_dH, s};
}

DecayCheck decay_exponent_check(const WSeries& w, double b, std::array<double, 2> s_window, double tol) {
    const double n = w.params.n;
    DecayCheck out;
    out.window = s_window;
    if (n < 2.0) {
        out.expected = n / 3.0;
        out.one_sided = true;
    } else if (w.resonance.resonant() && w.resonance.m == 1) {
        out.expected = 2.0 / 3.0;
        out.log_corrected = true;
    } else {
        out.expected = 2.0 * (3.0 - n) / 3.0;
    }
    // seed a little below the window, where the series is far inside its radius
    const double s_seed = s_window[0] - 1.0;
    const auto seed = phase_point_from_series(w, b, s_seed);
    for (double v : {seed.r, seed.q, seed.p})
        if (!(std::abs(v) > 1e-300) || !std::isfinite(v))
            throw InsufficientDecay("series seed underflows at s = " + std::to_string(s_seed));
    out.trajectory = integrate_s(seed, s_window[1], w.params, tol, 0.05);
    std::vector<double> xs, yq, yp, yq_raw;
    for (const auto& pt : out.trajectory.points) {
        if (pt.s < s_window[0] - 1e-12 || pt.s > s_window[1] + 1e-12) continue;
        double q = std::abs(pt.q), p = std::abs(pt.p);
        if (!(q > 1e-300) || !(p > 1e-300) || !std::isfinite(q) || !std::isfinite(p))
            throw InsufficientDecay("q or p underflows at s = " + std::to_string(pt.s));
        if (out.log_corrected) {
            q /= std::abs(pt.s);
            p /= std::abs(pt.s);
        }
        xs.push_back(pt.s);
        yq.push_back(std::log(q));
        yp.push_back(std::log(p));
        yq_raw.push_back(pt.q * std::exp(-out.expected * pt.s));
    }
    if (xs.size() < 10) throw InsufficientDecay("too few samples in the decay window");
    out.slope_q = linear_fit(xs, yq).slope;
    out.slope_p = linear_fit(xs, yp).slope;
    // amplitude of q e^(-expected s) where the subleading terms are smallest
    const std::size_t navg = std::max<std::size_t>(1, xs.size() / 10);
    double acc = 0.0;
    for (std::size_t i = 0; i < navg; ++i) acc += yq_raw[i];
    out.amplitude_q = acc / static_cast<double>(navg);
    return out;
}

double manifold_deviation(const GSeries& g, const Trajectory& tr) {
    double dev = 0.0;
    for (const auto& pt : tr.points) {
        const double rho = pt.r * pt.r * pt.r, mu = pt.r * pt.q;
        if (std::abs(rho) + std::abs(mu) > series_window_fraction * g.radius) continue;
        dev = std::max(dev, std::abs(pt.p - p_minus_eval(g, pt.r, pt.q)));
    }
    return dev;
}

}  // namespace twave
