#pragma once

#include <vector>

namespace twave {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;  ///< standard error of the slope
    double rms = 0.0;       ///< residual root mean square
};

/// Ordinary least squares y ~ intercept + slope x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct LeastSquares {
    std::vector<double> beta;
    std::vector<double> se;  ///< standard errors from sigma^2 (A^T A)^-1
    double rms = 0.0;
    double rss = 0.0;
};

/// Column-pivoted QR least squares for the design matrix given column by column.
LeastSquares least_squares(const std::vector<std::vector<double>>& columns, const std::vector<double>& y);

}  // namespace twave
