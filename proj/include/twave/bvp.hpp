#pragma once

#include <string>
#include <vector>

#include "twave/model.hpp"
#include "twave/shoot.hpp"

namespace twave {

/// psi sampled on a grid of [eps, 1/eps].
struct GridFn {
    double eps = 1e-3;
    std::vector<double> nodes;
    std::vector<double> values;
};

struct BvpOptions {
    double eps = 1e-3;
    int grid_size = 8192;
    double tol = 1e-9;
    int max_iter = 500;
    /// Relative slack allowed in the monotone bracketing checks (rounding only).
    double bracket_slack = 1e-12;
    /// Averaging weight theta in psi <- (1 - theta) psi + theta S[psi] once the
    /// plain even/odd bracket stops shrinking. 0 disables the fallback.
    double relaxation = 0.5;
};

struct BvpSolution {
    GridFn psi;
    int iterations = 0;
    double bracket_gap = 0.0;  ///< sup |odd iterate - even iterate| at the end of the bracketing phase
    double last_update = 0.0;  ///< sup |psi^{m+1} - psi^m| at exit
    bool relaxed = false;      ///< the averaged iteration was needed
    double K_eps = 0.0;
    double min_value = 0.0;
    double max_value = 0.0;
    /// sup over iterates of (min psi^m - k^2) and (K_eps - max psi^m), < 0 if violated
    double lower_margin = 0.0;
    double upper_margin = 0.0;
};

/// Upper bound of S on [eps, 1/eps].
double K_eps(const Params& params, double eps);

/// Geometric grid of `size` nodes on [eps, 1/eps].
std::vector<double> geometric_grid(double eps, int size);

/// k^2 + (2/3) int_eps^H int_H1^(1/eps) (H2^2 + H2^(n-1))^-1 psi^-1/2 dH2 dH1 by the
/// composite trapezoid rule with a cumulative tail sum for the inner integral.
GridFn apply_S(const GridFn& psi, const Params& params);

/// Picard iteration from psi = k^2. Even iterates rise and odd iterates fall;
/// the result is the midpoint of the final pair.
BvpSolution picard_solve(const Params& params, const BvpOptions& opt = {});

/// Linear interpolation in ln H.
double grid_value(const GridFn& f, double H);

struct CrossValidation {
    double H_lo = 0.0;
    double H_hi = 0.0;
    double sup_abs = 0.0;
    double sup_rel = 0.0;
    double H_at_max = 0.0;
    bool pass = false;
};

/// Compares the grid solution with a shooting profile on
/// [max(eps, 10 H0), min(1/eps, H_max/10)].
CrossValidation cross_validate(const GridFn& bvp, const Profile& profile, double xval_tol = 1e-3);

}  // namespace twave
