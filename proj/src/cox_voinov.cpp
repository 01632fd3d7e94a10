#include "twave/cox_voinov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "twave/errors.hpp"
#include "twave/ode.hpp"

namespace twave {

double CoxVoinov::u_asymptotic(double T) {
    const double L = std::log(T);
    return T - L / 3.0 + (L - 4.0) / (9.0 * T);
}

double CoxVoinov::du_asymptotic(double T) {
    const double L = std::log(T);
    return 1.0 - 1.0 / (3.0 * T) + (5.0 - L) / (9.0 * T * T);
}

CoxVoinov::CoxVoinov(double T_far, double T_min) {
    if (!(T_far > 100.0) || !(T_min > 0.0) || !(T_min < 50.0)) throw DomainError("CoxVoinov needs 0 < T_min < 50, T_far > 100");
    // uniform spacing where u bends, geometric beyond
    std::vector<double> grid;
    for (double T = T_min; T < 100.0; T += 0.01) grid.push_back(T);
    for (double T = 100.0; T < T_far; T *= 1.002) grid.push_back(T);
    grid.push_back(T_far);
    std::vector<double> back(grid.rbegin(), grid.rend());
    // integrate v = u - T + (ln T)/3, which stays small; u itself would carry rtol*T per step into the
    // neutral constant mode
    auto rhs = [](double T, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        const double u = T - std::log(T) / 3.0 + y[0], du = 1.0 - 1.0 / (3.0 * T) + y[1];
        if (!(u > 0.0)) throw PsiNonpositive("reference solution reached u <= 0");
        // -1/(3T) + du^2/(3u) combined to avoid cancelling O(1/T) terms
        const double c = (du * du * T - u) / (3.0 * u * T);
        dy[0] = y[1];
        dy[1] = y[1] + c - 1.0 / (3.0 * T * T);
    };
    OdeOptions o;
    o.rtol = 1e-12;
    o.atol = 1e-20;
    o.first_step = 1e-2;
    o.max_steps = 20'000'000;
    // backwards the e^T mode decays, so the asymptotic start is forgotten except for its O((ln T / T)^2) shift
    const double L = std::log(T_far);
    auto run = integrate_dense<2>(rhs, {u_asymptotic(T_far) - T_far + L / 3.0, du_asymptotic(T_far) - 1.0 + 1.0 / (3.0 * T_far)},
                                  T_far, T_min, back, o);
    if (run.samples.size() != back.size()) throw StepFailure("reference integration stopped early");
    for (auto it = run.samples.rbegin(); it != run.samples.rend(); ++it) {
        const double T = it->t;
        T_.push_back(T);
        u_.push_back(T - std::log(T) / 3.0 + it->y[0]);
        du_.push_back(1.0 - 1.0 / (3.0 * T) + it->y[1]);
    }
    for (std::size_t i = 1; i < u_.size(); ++i)
        if (!(u_[i] > u_[i - 1])) throw NumericalError("reference solution is not increasing");
}

const CoxVoinov& CoxVoinov::standard() {
    static const CoxVoinov cv;
    return cv;
}

std::size_t CoxVoinov::locate(double T) const {
    if (!(T >= T_.front()) || !(T <= T_.back()))
        throw DomainError("T = " + std::to_string(T) + " outside the reference table");
    auto it = std::upper_bound(T_.begin(), T_.end(), T);
    std::size_t i = static_cast<std::size_t>(it - T_.begin());
    if (i == 0) i = 1;
    if (i >= T_.size()) i = T_.size() - 1;
    return i - 1;
}

double CoxVoinov::u(double T) const {
    const std::size_t i = locate(T);
    const double h = T_[i + 1] - T_[i], t = (T - T_[i]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * u_[i] + h10 * h * du_[i] + h01 * u_[i + 1] + h11 * h * du_[i + 1];
}

double CoxVoinov::du(double T) const {
    const std::size_t i = locate(T);
    const double h = T_[i + 1] - T_[i], t = (T - T_[i]) / h;
    const double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1;
    const double d01 = -6 * t * t + 6 * t, d11 = 3 * t * t - 2 * t;
    return (d00 * u_[i] + d01 * u_[i + 1]) / h + d10 * du_[i] + d11 * du_[i + 1];
}

double CoxVoinov::psi(double T) const { return std::cbrt(u(T) * u(T)); }

double CoxVoinov::dpsi_dT(double T) const { return (2.0 / 3.0) * du(T) / std::cbrt(u(T)); }

double CoxVoinov::T_of_u(double uu) const {
    if (!(uu >= u_.front()) || !(uu <= u_.back()))
        throw DomainError("u = " + std::to_string(uu) + " outside the reference table");
    auto it = std::upper_bound(u_.begin(), u_.end(), uu);
    std::size_t i = static_cast<std::size_t>(it - u_.begin());
    if (i == 0) i = 1;
    if (i >= u_.size()) i = u_.size() - 1;
    double lo = T_[i - 1], hi = T_[i];
    double T = lo + (uu - u_[i - 1]) / (u_[i] - u_[i - 1]) * (hi - lo);
    for (int it2 = 0; it2 < 8; ++it2) {
        const double step = (u(T) - uu) / du(T);
        T = std::clamp(T - step, lo, hi);
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(T))) break;
    }
    return T;
}

}  // namespace twave
