#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "twave/errors.hpp"

namespace twave {

struct OdeOptions {
    double rtol = 1e-12;
    double atol = 1e-14;
    double first_step = 1e-4;
    /// absolute floor on |dt|; a smaller accepted step means the tolerance is unreachable
    double step_floor = 1e-14;
    long max_steps = 2'000'000;
};

struct OdeStats {
    long steps = 0;
    double min_step = std::numeric_limits<double>::infinity();
    double max_step = 0.0;
};

template <std::size_t N>
struct OdeSample {
    double t;
    std::array<double, N> y;
};

template <std::size_t N>
struct OdeRun {
    std::vector<OdeSample<N>> samples;  ///< at the requested times reached, plus the end point
    OdeSample<N> end{};
    bool event = false;  ///< stopped because the event function dropped to <= 0
    OdeStats stats;
};

/// Dense-output Dormand-Prince 5(4) between t0 and t1 in either direction.
///
/// `sample_times` must be monotone in the integration direction; the ones
/// reached are interpolated from the dense output. `event(t, y)` is checked at
/// every step end; when it drops to <= 0 the crossing is located by bisection
/// on the interpolant and integration stops there.
template <std::size_t N, class Rhs, class Event>
OdeRun<N> integrate_dense(Rhs rhs, const std::array<double, N>& y0, double t0, double t1,
                          const std::vector<double>& sample_times, Event event, const OdeOptions& opt) {
    namespace odeint = boost::numeric::odeint;
    using state = std::array<double, N>;
    OdeRun<N> run;
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    auto past = [dir](double a, double b) { return dir * (a - b) > 0.0; };  // a beyond b

    auto stepper = odeint::make_dense_output(opt.atol, opt.rtol, odeint::runge_kutta_dopri5<state>());
    auto sys = [&rhs](const state& y, state& dy, double t) { rhs(t, y, dy); };
    stepper.initialize(y0, t0, dir * std::min(opt.first_step, std::abs(t1 - t0)));

    std::size_t next = 0;
    while (next < sample_times.size() && past(t0, sample_times[next])) ++next;
    if (t0 == t1) {
        while (next < sample_times.size() && sample_times[next] == t0) run.samples.push_back({t0, y0}), ++next;
        run.end = {t0, y0};
        return run;
    }
    if (event(t0, y0) <= 0.0) {
        run.event = true;
        run.end = {t0, y0};
        return run;
    }

    state y;
    while (true) {
        std::pair<double, double> span;
        try {
            span = stepper.do_step(sys);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw StepFailure(std::string("step size control failed: ") + e.what());
        }
        const double ta = span.first, tb = span.second, h = std::abs(tb - ta);
        ++run.stats.steps;
        run.stats.max_step = std::max(run.stats.max_step, h);
        const bool last = !past(t1, tb);  // tb at or beyond t1
        if (!last) {
            run.stats.min_step = std::min(run.stats.min_step, h);
            if (h < opt.step_floor)
                throw StepFailure("step " + std::to_string(h) + " below floor at t = " + std::to_string(tb));
        }
        if (run.stats.steps > opt.max_steps) throw StepFailure("step budget exhausted");
        for (double v : stepper.current_state())
            if (!std::isfinite(v)) throw StepFailure("non-finite state at t = " + std::to_string(tb));

        const double t_hi = last ? t1 : tb;
        stepper.calc_state(t_hi, y);
        double stop_t = t_hi;
        if (event(t_hi, y) <= 0.0) {
            double lo = ta, hi = t_hi;
            state ym;
            for (int i = 0; i < 80; ++i) {
                const double mid = 0.5 * (lo + hi);
                stepper.calc_state(mid, ym);
                (event(mid, ym) <= 0.0 ? hi : lo) = mid;
            }
            stop_t = hi;
            run.event = true;
        }
        while (next < sample_times.size() && !past(sample_times[next], stop_t)) {
            state ys;
            stepper.calc_state(sample_times[next], ys);
            run.samples.push_back({sample_times[next], ys});
            ++next;
        }
        if (run.event || last) {
            stepper.calc_state(stop_t, y);
            run.end = {stop_t, y};
            return run;
        }
    }
}

template <std::size_t N, class Rhs>
OdeRun<N> integrate_dense(Rhs rhs, const std::array<double, N>& y0, double t0, double t1,
                          const std::vector<double>& sample_times, const OdeOptions& opt) {
    return integrate_dense<N>(rhs, y0, t0, t1, sample_times, [](double, const std::array<double, N>&) { return 1.0; },
                              opt);
}

/// n+1 points spaced evenly from a to b (inclusive).
inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i) v[i] = a + (b - a) * i / n;
    v[n] = b;
    return v;
}

}  // namespace twave
