#include <doctest.h>

#include <cmath>

#include "twave/errors.hpp"
#include "twave/shoot.hpp"

using namespace twave;

namespace {

/// Classic RK4 on (psi, psi') in H with a fixed small step.
std::array<double, 2> rk4_reference(double H0, std::array<double, 2> y, double H1, const Params& p, int steps) {
    auto f = [&](double H, const std::array<double, 2>& v) -> std::array<double, 2> {
        return {v[1], -(2.0 / 3.0) / (H * H + std::pow(H, p.n - 1.0)) / std::sqrt(v[0])};
    };
    const double h = (H1 - H0) / steps;
    double H = H0;
    for (int i = 0; i < steps; ++i) {
        const auto k1 = f(H, y);
        const auto k2 = f(H + h / 2, {y[0] + h / 2 * k1[0], y[1] + h / 2 * k1[1]});
        const auto k3 = f(H + h / 2, {y[0] + h / 2 * k2[0], y[1] + h / 2 * k2[1]});
        const auto k4 = f(H + h, {y[0] + h * k3[0], y[1] + h * k3[1]});
        y[0] += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        y[1] += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
        H += h;
    }
    return y;
}

}  // namespace

TEST_SUITE("shoot") {

TEST_CASE("init_near_contact") {
    const Params p = validate_params(1.5, 1.0);
    const auto w = solve_w(p, default_series_degree);
    SUBCASE("psi tends to k^2") {
        const Params pk = validate_params(1.5, 0.8);
        const auto wk = solve_w(pk, default_series_degree);
        for (double H0 : {1e-4, 1e-6, 1e-8})
            CHECK(std::abs(init_near_contact(0.3, H0, pk, wk).psi - 0.64) <= 0.64 * (0.3 + 1e-2) * H0);
    }
    SUBCASE("leading terms at H0 = 1e-4") {
        const double H0 = 1e-4, b = 0.5;
        const auto st = init_near_contact(b, H0, p, w);
        // k^2 (1 + b H + w_rho H^(3-n)) with w_rho = -2/(3 (3-n)(2-n)); the next terms are O(H^2)
        const double w_rho = -2.0 / (3.0 * 1.5 * 0.5);
        CHECK(std::abs(st.psi - (1.0 + b * H0)) <= 1e-6);
        CHECK(std::abs(st.psi - (1.0 + b * H0 + w_rho * std::pow(H0, 1.5))) <= 1e-9);
    }
    SUBCASE("d psi / d b = k^2 H to leading order") {
        const Params pk = validate_params(2.5, 1.3);
        const auto wk = solve_w(pk, default_series_degree);
        const double H0 = 1e-5;
        const double d = (init_near_contact(0.7, H0, pk, wk).psi - init_near_contact(0.2, H0, pk, wk).psi) / 0.5;
        CHECK(d == doctest::Approx(1.69 * H0).epsilon(0.01));
    }
    CHECK_THROWS_AS(init_near_contact(0.5, 0.5, p, w), ConvergenceWindow);
}

TEST_CASE("integrate_H") {
    const Params p = validate_params(2.0, 1.0);
    SUBCASE("zero forcing leaves psi affine") {
        ShootOptions o;
        o.forcing_scale = 0.0;
        const auto prof = integrate_H({1e-3, 1.0, 0.5}, 1e3, p, o);
        REQUIRE(prof.back().H == doctest::Approx(1e3));
        // global error of an adaptive solver with local tolerance 1e-12 over 13.8 units of ln H
        // grows linearly in the step count; 1e-11 leaves room for a few hundred steps
        double worst_psi = 0.0, worst_dpsi = 0.0;
        for (const auto& s : prof.samples) {
            worst_psi = std::max(worst_psi, std::abs(s.psi / (1.0 + 0.5 * (s.H - 1e-3)) - 1.0));
            worst_dpsi = std::max(worst_dpsi, std::abs(s.dpsi / 0.5 - 1.0));
        }
        INFO("worst relative errors " << worst_psi << " " << worst_dpsi);
        CHECK(worst_psi <= 1e-11);
        CHECK(worst_dpsi <= 1e-11);
    }
    SUBCASE("agrees with a fine fixed-step reference") {
        const auto prof = integrate_H({1.0, 1.0, 1.0}, 2.0, p);
        const auto ref = rk4_reference(1.0, {1.0, 1.0}, 2.0, p, 20000);
        CHECK(prof.back().H == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(prof.back().psi == doctest::Approx(ref[0]).epsilon(1e-11));
        CHECK(prof.back().dpsi == doctest::Approx(ref[1]).epsilon(1e-11));
    }
    SUBCASE("concave at every sample and stops when psi' reaches 0") {
        const auto prof = integrate_H({1.0, 1.0, 0.05}, 1e6, p);
        CHECK(prof.classification == ShotClass::Undershoot);
        for (const auto& s : prof.samples) CHECK(psi_second_derivative(s.H, s.psi, p) < 0.0);
        CHECK(prof.back().dpsi == doctest::Approx(0.0).epsilon(1e-8));
        CHECK(prof.H_stop < 1e6);
    }
}

TEST_CASE("shoot_b locates b_CG") {
    const Params p = validate_params(2.0, 1.0);
    const auto w = solve_w(p, default_series_degree);
    ShootOptions o4;
    o4.H_max = 1e4;
    const auto r4 = shoot_b(p, w, o4);
    const auto r6 = shoot_b(p, w);
    CHECK(r6.profile.bracket[1] - r6.profile.bracket[0] <= 1e-10);
    CHECK(std::abs(r6.b_cg - r4.b_cg) < 1e-6);
    CHECK_FALSE(r6.profile.bracket_only);

    CHECK(shoot_once(r6.b_cg - 0.1, p, w).classification == ShotClass::Undershoot);
    CHECK(shoot_once(r6.b_cg + 0.1, p, w).classification == ShotClass::Overshoot);

    SUBCASE("accepted profile is increasing, concave and above k^2") {
        const auto& s = r6.profile.samples;
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(s[i].dpsi > 0.0);
            CHECK(s[i].psi >= 1.0);
            if (i > 0) {
                CHECK(s[i].H > s[i - 1].H);
                CHECK(s[i].psi > s[i - 1].psi);
                CHECK(s[i].dpsi < s[i - 1].dpsi);
            }
        }
    }
    SUBCASE("a different starting bracket finds the same profile") {
        const auto other = shoot_b(p, w, ShootOptions{}, {-1.0, 3.0});
        CHECK(std::abs(other.b_cg - r6.b_cg) <= 1e-12);
        // psi moves by eta(H) db to first order; early local errors grow along eta as well
        REQUIRE(other.profile.samples.size() == r6.profile.samples.size());
        const auto eta = linearized_eta(r6.profile);
        REQUIRE(eta.size() + 1 >= r6.profile.samples.size());
        const double db = std::abs(other.b_cg - r6.b_cg);
        for (std::size_t i = 0; i < std::min(eta.size(), r6.profile.samples.size()); ++i) {
            REQUIRE(eta[i].H == doctest::Approx(r6.profile.samples[i].H).epsilon(1e-12));
            const double d = std::abs(other.profile.samples[i].psi - r6.profile.samples[i].psi);
            CHECK(d <= (2.0 * db + 1e-12) * std::abs(eta[i].eta) + 1e-11 * r6.profile.samples[i].psi);
        }
    }
    SUBCASE("bracket with equal classifications") {
        ShootOptions o;
        o.max_bracket_expansions = 0;
        CHECK_THROWS_AS(shoot_b(p, w, o, {1.0, 2.0}), NoBracket);
        // with expansions allowed the search walks down to the crossing
        CHECK(std::abs(shoot_b(p, w, ShootOptions{}, {1.0, 2.0}).b_cg - r6.b_cg) <= 1e-12);
    }
}

TEST_CASE("linearized eta along the profile") {
    const Params p = validate_params(2.0, 1.0);
    const auto shot = shoot_b(p);
    const auto eta = linearized_eta(shot.profile);
    REQUIRE(eta.size() > 10);
    // eta(H0) / H0 -> k^2
    CHECK(eta.front().eta / eta.front().H == doctest::Approx(1.0).epsilon(1e-3));
    // (eta^2)'' = 2 eta'^2 + 2 eta eta'' >= 0, checked on discrete slopes of eta^2
    for (std::size_t i = 1; i + 1 < eta.size(); ++i) {
        const double s0 = (eta[i].eta * eta[i].eta - eta[i - 1].eta * eta[i - 1].eta) / (eta[i].H - eta[i - 1].H);
        const double s1 = (eta[i + 1].eta * eta[i + 1].eta - eta[i].eta * eta[i].eta) / (eta[i + 1].H - eta[i].H);
        CHECK(s1 >= s0 * (1 - 1e-9));
    }
    // eta' stays away from 0 at the far end
    CHECK(eta.back().deta > 1e-3);
}

TEST_CASE("transversality") {
    const Params p = validate_params(2.0, 1.0);
    const auto shot = shoot_b(p);
    const auto rep = transversality_check(shot.profile);
    CHECK(rep.pass);
    CHECK(rep.sign_constant);
    CHECK(det2(0.3, 1.7, 0.3, 1.7) == 0.0);
    const auto scaled = transversality_check(shot.profile, ShootOptions{}, 1.0, 1e4, 1e-3, 10.0);
    CHECK(scaled.pass == rep.pass);
    REQUIRE(scaled.det.size() == rep.det.size());
    for (std::size_t i = 0; i < rep.det.size(); ++i) CHECK(scaled.det[i] == doctest::Approx(10.0 * rep.det[i]));
}

TEST_CASE("beta difference of two contact-line solutions") {
    // mu = sum c_jl (b H)^j H^((3-n) l) with c_j0 = 0 for j >= 2, so the first
    // b-dependent correction to (mu1 - mu2)/H is b H^(3-n)
    for (auto [n, exponent] : std::vector<std::pair<double, double>>{{1.5, 1.5}, {2.5, 0.5}}) {
        const Params p = validate_params(n, 1.0);
        const auto w = solve_w(p, default_series_degree);
        ShootOptions o;
        o.H0 = 1e-8;
        o.H_max = 1e-1;
        const auto a = integrate_H(init_near_contact(0.5, o.H0, p, w), 1e-1, p, o);
        const auto b = integrate_H(init_near_contact(1.5, o.H0, p, w), 1e-1, p, o);
        const auto fit = beta_difference(a, b, 1e-3);
        CHECK(fit.beta == doctest::Approx(-1.0).epsilon(1e-3));
        INFO("n = " << n << " exponent " << fit.exponent);
        CHECK(fit.exponent == doctest::Approx(exponent).epsilon(0.1));
    }
    const Params p = validate_params(2.0, 1.0);
    const auto shot = shoot_b(p);
    const auto same = beta_difference(shot.profile, shot.profile);
    CHECK(same.beta == 0.0);
}

TEST_CASE("square of the difference of two solutions from psi = k^2 is convex") {
    const Params p = validate_params(1.5, 1.0);
    ShootOptions o;
    const auto a = integrate_H({1e-3, 1.0, 3.0}, 1e2, p, o);
    const auto b = integrate_H({1e-3, 1.0, 2.5}, 1e2, p, o);
    const std::size_t m = std::min(a.samples.size(), b.samples.size());
    REQUIRE(m > 20);
    for (std::size_t i = 1; i + 1 < m; ++i) {
        auto sq = [&](std::size_t j) {
            const double d = a.samples[j].psi - b.samples[j].psi;
            return d * d;
        };
        const double h0 = a.samples[i].H - a.samples[i - 1].H, h1 = a.samples[i + 1].H - a.samples[i].H;
        const double second = ((sq(i + 1) - sq(i)) / h1 - (sq(i) - sq(i - 1)) / h0);
        CHECK(second >= -1e-12 * std::max(1.0, sq(i)));
    }
}

}  // TEST_SUITE
