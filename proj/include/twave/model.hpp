#pragma once

#include <optional>
#include <string>
#include <utility>

namespace twave {

/// Mobility exponent n and contact angle k, plus the physical slip length and
/// wave speed they were normalized from.
struct Params {
    double n = 2.0;
    double k = 1.0;
    double lambda = 1.0;
    double V = 1.0 / 3.0;
    bool normalized = true;
};

/// Factors that undo normalize(): H_phys = h_scale * H, x_phys = x_scale * x,
/// so slopes map as dH_phys/dx_phys = angle_scale * dH/dx.
struct ScaleRecord {
    double h_scale = 1.0;
    double x_scale = 1.0;
    double angle_scale = 1.0;
};

struct ResonanceClass {
    enum class Tag { NonResonant, Resonant };
    Tag tag = Tag::NonResonant;
    int m = 0;  ///< only meaningful when resonant
    /// set when n lies within near_tol of a resonant value without being one
    std::optional<std::string> warning;

    bool resonant() const { return tag == Tag::Resonant; }
};

inline constexpr double default_res_tol = 1e-12;
inline constexpr double near_resonance_tol = 1e-3;

/// Throws RangeError naming the first violated bound.
Params validate_params(double n, double k, double lambda = 1.0, double V = 1.0 / 3.0);

/// Maps physical (lambda, V, k_phys) to the normalized problem lambda = 1, V = 1/3.
std::pair<Params, ScaleRecord> normalize(const Params& params, double k_phys);

/// h^3 + lambda^(3-n) h^n.
double mobility(double h, const Params& params);

ResonanceClass resonance_class(double n, double res_tol = default_res_tol);

/// Distance from n to the nearest value 3 - 1/m, m >= 1.
double resonance_distance(double n);

}  // namespace twave
