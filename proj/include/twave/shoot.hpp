#pragma once

#include <array>
#include <string>
#include <vector>

#include "twave/model.hpp"
#include "twave/ode.hpp"
#include "twave/series.hpp"

namespace twave {

/// One sample (H, psi, dpsi/dH).
struct State {
    double H = 0.0;
    double psi = 0.0;
    double dpsi = 0.0;
};

enum class ShotClass { Undershoot, Overshoot, Converged };

const char* to_string(ShotClass c);

struct ShootOptions {
    double H0 = 1e-4;
    double H_max = 1e6;
    double tol = 1e-12;          ///< relative local error of the integrator
    double conv_tol = 1e-5;      ///< |psi'(H_max)| for Converged
    double tol_b = 1e-14;        ///< final bracket width
    int samples_per_decade = 100;
    int degree = default_series_degree;
    /// Compare psi'(H_max) with the far-field Cox-Voinov flux instead of 0
    /// when classifying shots (see far_field_flux).
    bool far_field_target = true;
    /// Test hook: multiplies the forcing term; 0 turns the ODE into psi'' = 0.
    double forcing_scale = 1.0;
    int max_bracket_expansions = 12;
};

struct Profile {
    std::vector<State> samples;
    double b = 0.0;
    Params params;
    OdeStats stats;
    ShotClass classification = ShotClass::Overshoot;
    bool bracket_only = false;   ///< conv_tol unmet at H_max
    double H_stop = 0.0;         ///< last H reached (crossing point for undershoots)
    double mismatch = 0.0;       ///< psi'(H_max) minus the classification target
    /// (eta, eta') at the first sample: the b-derivative of (psi, psi') there
    std::array<double, 2> eta_start{0.0, 0.0};
    std::array<double, 2> bracket{0.0, 0.0};
    int bisections = 0;

    const State& front() const { return samples.front(); }
    const State& back() const { return samples.back(); }
};

/// psi'' from the ODE at (H, psi).
double psi_second_derivative(double H, double psi, const Params& params);

/// State(H0, k^2 (1 + mu_b), k^2 dmu_b/dH) from the contact-line series.
State init_near_contact(double b, double H0, const Params& params, const WSeries& w);

/// Integrates the profile ODE from start to H_end, stopping at the first H
/// where psi' <= 0. Uses s = ln H internally.
Profile integrate_H(const State& start, double H_end, const Params& params, const ShootOptions& opt = {});

/// psi' of the decaying far-field solution through (H, psi): the tabulated
/// Cox-Voinov flux (the expansion (2/3) H^-1 psi^-1/2 (1 - 1/(3u) + 5/(9u^2)),
/// u = psi^(3/2), outside the table) times the mobility factor H^(3-n)/(1 + H^(3-n)).
double far_field_flux(double H, double psi, const Params& params);

/// Integrates from H0 with slope parameter b and classifies the shot.
Profile shoot_once(double b, const Params& params, const WSeries& w, const ShootOptions& opt = {});

struct ShootResult {
    double b_cg = 0.0;
    Profile profile;
};

/// Bisection on b. The default bracket [-10/k, 10/k] is expanded geometrically
/// until its ends classify differently.
ShootResult shoot_b(const Params& params, const WSeries& w, const ShootOptions& opt = {},
                    std::array<double, 2> bracket = {0.0, 0.0});

/// Convenience overload building the series itself.
ShootResult shoot_b(const Params& params, const ShootOptions& opt = {});

struct EtaSample {
    double H = 0.0;
    double eta = 0.0;
    double deta = 0.0;
    double psi = 0.0;
};

/// Solution of eta'' = (1/3)(H^2 + H^(n-1))^-1 psi^-3/2 eta along the profile
/// with eta(H0), eta'(H0) from the b-derivative of the series data.
std::vector<EtaSample> linearized_eta(const Profile& profile, const ShootOptions& opt = {});

struct TransversalityReport {
    std::vector<double> H;
    std::vector<double> det;
    double det_min_abs = 0.0;
    bool sign_constant = false;
    bool pass = false;
};

/// Wronskian-type determinant eta_b eta_inf' - eta_b' eta_inf.
double det2(double a, double da, double b, double db);

/// Builds eta_inf backwards from H_max with (eta, eta') = (1, 0) and reports the
/// determinant against eta_b on a log grid of [H_lo, H_hi].
TransversalityReport transversality_check(const Profile& profile, const ShootOptions& opt = {}, double H_lo = 1.0,
                                          double H_hi = 1e4, double det_floor = 1e-3, double eta_inf_scale = 1.0);

struct BetaFit {
    double beta = 0.0;      ///< limit of (mu1 - mu2)/H as H -> 0
    double exponent = 0.0;  ///< gamma in beta (1 + a H^gamma)
    double amplitude = 0.0;
    double rms = 0.0;
    int points = 0;
};

/// Fits (mu1 - mu2)/H = beta + a H^gamma on the common small-H samples.
BetaFit beta_difference(const Profile& p1, const Profile& p2, double H_hi = 1e-2);

/// psi at H by interpolation on the samples (cubic Hermite in ln H).
double profile_psi(const Profile& profile, double H);
double profile_dpsi(const Profile& profile, double H);

}  // namespace twave
