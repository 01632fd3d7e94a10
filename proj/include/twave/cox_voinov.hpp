#pragma once

#include <cstddef>
#include <vector>

namespace twave {

/// Decaying solution of u_T - u_TT + u_T^2/(3u) = 1 (u = psi^(3/2), T = ln H)
/// normalized by u = T - (1/3) ln T + o(1); tabulated by backward integration
/// from the asymptotic expansion at T_far.
class CoxVoinov {
public:
    explicit CoxVoinov(double T_far = 1e6, double T_min = 1.0);

    double T_min() const { return T_.front(); }
    double T_max() const { return T_.back(); }
    double u(double T) const;
    double du(double T) const;
    double psi(double T) const;
    double dpsi_dT(double T) const;
    /// Inverse of u on [T_min, T_max].
    double T_of_u(double u) const;

    /// Asymptotic expansion T - ln T / 3 + (ln T - 4)/(9T) and its derivative.
    static double u_asymptotic(double T);
    static double du_asymptotic(double T);

    /// Shared instance with the default range.
    static const CoxVoinov& standard();

private:
    std::vector<double> T_, u_, du_;
    std::size_t locate(double T) const;
};

}  // namespace twave
