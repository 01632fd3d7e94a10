#include "twave/fit.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "twave/errors.hpp"

namespace twave {

LeastSquares least_squares(const std::vector<std::vector<double>>& columns, const std::vector<double>& y) {
    const auto m = static_cast<Eigen::Index>(y.size());
    const auto p = static_cast<Eigen::Index>(columns.size());
    if (p == 0 || m <= p) throw DomainError("least squares needs more rows than columns");
    Eigen::MatrixXd A(m, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        if (static_cast<Eigen::Index>(columns[j].size()) != m) throw DomainError("column length mismatch");
        for (Eigen::Index i = 0; i < m; ++i) A(i, j) = columns[j][i];
    }
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(y.data(), m);
    // equilibrate columns so the covariance is not dominated by scale
    Eigen::VectorXd scale = A.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < p; ++j)
        if (scale(j) == 0.0) scale(j) = 1.0;
    const Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(As);
    const Eigen::VectorXd xs = qr.solve(b);
    const Eigen::VectorXd r = b - As * xs;
    LeastSquares out;
    out.rss = r.squaredNorm();
    out.rms = std::sqrt(out.rss / static_cast<double>(m));
    const double sigma2 = out.rss / static_cast<double>(m - p);
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd cov_perm = Rinv * Rinv.transpose();
    const Eigen::MatrixXd P = qr.colsPermutation();
    const Eigen::MatrixXd cov = P * cov_perm * P.transpose();
    out.beta.resize(p);
    out.se.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        out.beta[j] = xs(j) / scale(j);
        out.se[j] = std::sqrt(sigma2 * cov(j, j)) / scale(j);
    }
    return out;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) throw DomainError("linear fit needs >= 3 paired points");
    std::vector<double> ones(x.size(), 1.0);
    // center x for conditioning
    double xm = 0.0;
    for (double v : x) xm += v;
    xm /= static_cast<double>(x.size());
    std::vector<double> xc(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xc[i] = x[i] - xm;
    const auto ls = least_squares({ones, xc}, y);
    LinearFit f;
    f.slope = ls.beta[1];
    f.intercept = ls.beta[0] - f.slope * xm;
    f.slope_se = ls.se[1];
    f.rms = ls.rms;
    return f;
}

}  // namespace twave
