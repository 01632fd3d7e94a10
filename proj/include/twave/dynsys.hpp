#pragma once

#include <array>
#include <vector>

#include "twave/model.hpp"
#include "twave/ode.hpp"
#include "twave/series.hpp"

namespace twave {

/// State of the contact-line system. r = H^((3-n)/3), q = H^(-(3-n)/3) mu,
/// p = H^(-(3-n)/3) dmu/ds, s = ln H.
struct PhasePoint {
    double r = 0.0;
    double q = 0.0;
    double p = 0.0;
    double s = 0.0;
};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

Vec3 vector_field(const PhasePoint& pt, const Params& params);

/// Full Jacobian of the vector field at a point.
Mat3 jacobian(const PhasePoint& pt, const Params& params);

struct JacobianOrigin {
    Mat3 matrix{};
    Vec3 eigenvalues{};              ///< numerically computed, descending
    std::array<Vec3, 3> eigenvectors{};  ///< unit vectors matching `eigenvalues`
    Vec3 unstable_r{1.0, 0.0, 0.0};  ///< tangent for (3-n)/3
    Vec3 unstable_qp{0.0, 1.0, 1.0}; ///< tangent for n/3
};

JacobianOrigin jacobian_origin(const Params& params);

/// The eigenvalues {(3-n)/3, -(3-n)/3, n/3} in closed form.
Vec3 origin_eigenvalues_closed_form(double n);

struct Trajectory {
    std::vector<PhasePoint> points;
    OdeStats stats;
    double r_drift = 0.0;  ///< max relative deviation of r from its exact exponential
};

/// Integrates in s from start.s to s_end (either direction), sampling every ds.
Trajectory integrate_s(const PhasePoint& start, double s_end, const Params& params, double tol = 1e-12,
                       double ds = 0.05);

/// Phase point on the contact-line solution with slope parameter b at s = ln H.
PhasePoint phase_point_from_series(const WSeries& w, double b, double s);

struct DecayCheck {
    double slope_q = 0.0;
    double slope_p = 0.0;
    double expected = 0.0;
    bool log_corrected = false;   ///< n = 2: fits ln(|q|/|s|) and ln(|p|/|s|)
    bool one_sided = false;       ///< n < 2: only slope >= expected is asserted
    double amplitude_q = 0.0;     ///< q e^(-expected s) averaged over the lower window end
    std::array<double, 2> window{};
    Trajectory trajectory;
};

/// Least-squares decay slopes of q and p over s_window along the solution with
/// slope parameter b, seeded from the series below the window and integrated
/// forward through it.
DecayCheck decay_exponent_check(const WSeries& w, double b, std::array<double, 2> s_window = {-20.0, -5.0},
                                double tol = 1e-12);

/// Max |p - p_minus(r, q)| over trajectory points inside the g series window.
double manifold_deviation(const GSeries& g, const Trajectory& tr);

/// Fault hook for negative controls: TWAVE_FAULT=dynsys flips the sign of the
/// n p / 3 term in the vector field.
bool dynsys_fault_injected();

}  // namespace twave
