#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "twave/cox_voinov.hpp"
#include "twave/model.hpp"
#include "twave/series.hpp"
#include "twave/shoot.hpp"

namespace twave {

struct BEstimate {
    double lnB_plain = 0.0;     ///< tail average of psi^(3/2) - ln H + (1/3) ln ln H
    double spread_plain = 0.0;  ///< max - min of that estimator over the window
    double lnB_matched = 0.0;   ///< extrapolated inversion against the reference solution
    double spread_matched = 0.0;
    std::array<double, 2> window{};
    std::vector<std::array<double, 3>> sequence;  ///< (H, plain estimator, matched ln B)
};

/// Estimates ln B on the far window. Throws WindowTooNoisy when the matched
/// estimator spreads by more than fit_tol over the window.
BEstimate extract_B(const Profile& profile, std::array<double, 2> window = {0.0, 0.0}, double fit_tol = 0.05);

struct RemainderFit {
    double slope = 0.0;            ///< d ln|R| / d ln H
    double amplitude = 0.0;        ///< exp(intercept)
    double slope_log_corrected = 0.0;  ///< same fit for |R| ln H
    double max_abs = 0.0;
    std::array<double, 2> window{};
};

/// Fits R = psi / psi_CV(ln(B H)) - 1 on a log window.
RemainderFit remainder_fit(const Profile& profile, double lnB, std::array<double, 2> window = {1e2, 1e5},
                           double noise_floor = 1e-9);

struct XSample {
    double x = 0.0;
    double H = 0.0;
    double slope = 0.0;  ///< dH/dx = sqrt(psi)
};

/// x(H) = H0/k + int_H0^H psi^(-1/2) dH' along the samples.
std::vector<XSample> reconstruct_x(const Profile& profile);

struct LawFit {
    double slope = 0.0;      ///< of (dH/dx)^3 against ln x
    double intercept = 0.0;  ///< compare with ln B
    std::array<double, 2> window{};
};

/// Fits (dH/dx)^3 against ln x over x-samples with H in the window.
LawFit cox_voinov_law_fit(const std::vector<XSample>& xs, std::array<double, 2> H_window);

struct PressureReport {
    double max_rel_dev = 0.0;    ///< series vs numerical dpsi/dH on [H0, 100 H0]
    double limit_estimate = 0.0; ///< n < 2: fitted dpsi/dH at H -> 0
    double limit_expected = 0.0; ///< k^2 b
    double log_slope = 0.0;      ///< n = 2: fitted coefficient of ln H
    double log_slope_expected = 0.0;
    double dominant_exponent_fit = 0.0;  ///< 2 < n < 3: fitted exponent of the H^(2-n) term
};

PressureReport pressure_expansion_report(const Profile& profile, const WSeries& w, double b);

struct NearFieldOptions {
    double H_seed = 1e-14;
    std::array<double, 2> window{1e-12, 1e-7};
    double b = 1.0;
    double tol = 1e-13;
    int samples_per_decade = 100;
    double max_exponent = 1.5;  ///< basis exponents kept in the fit
    int degree = default_series_degree;
};

/// Least-squares fit of psi' near the contact line on H^e (ln H)^p, e on the
/// lattice i(3-n) + j - 1, p in {0, 1}, plus constant and ln H. The ln H
/// coefficient is the H ln H term of psi.
struct LogTermTest {
    double coefficient = 0.0;
    double std_error = 0.0;
    double t_stat = 0.0;
    double amplitude = 0.0;  ///< |coefficient| times the std of ln H over the window
    double rms = 0.0;        ///< fit residual
    double ratio = 0.0;      ///< amplitude / rms
    double expected = 0.0;   ///< k^2 times the sigma coefficient of w
    std::vector<double> exponents;
    int points = 0;
};

LogTermTest near_field_log_test(const Params& params, const NearFieldOptions& opt = {});

struct MatchOptions {
    ShootOptions shoot;
    std::array<double, 2> far_window{0.0, 0.0};  ///< default [H_max/100, H_max]
    std::array<double, 2> remainder_window{1e2, 1e5};  ///< upper end clipped to H_max/10
    double fit_tol = 0.05;
};

struct MatchResult {
    double n = 0.0;
    double k = 0.0;
    double b_cg = 0.0;
    double B_cg = 0.0;
    BEstimate B_est;
    std::optional<RemainderFit> remainder;  ///< absent if below noise
    std::string remainder_note;
    Profile profile;
};

MatchResult match(const Params& params, const MatchOptions& opt = {});
MatchResult match(const Params& params, const WSeries& w, const MatchOptions& opt);

struct SweepRow {
    double k = 0.0;
    double b_cg = 0.0;
    double B_cg = 0.0;
    double dB_dk = 0.0;  ///< centered difference, NaN at the ends
    double db_dk = 0.0;
    bool ok = false;
    std::string error;
};

/// Runs match per k on a worker pool (TW_THREADS caps the pool) and adds
/// centered differences. Rows come back in k order.
std::vector<SweepRow> sweep_k(const Params& base, const std::vector<double>& k_list, const MatchOptions& opt = {},
                              int threads = 0);

/// Worker count from TW_THREADS or hardware concurrency.
int default_threads();

}  // namespace twave
