#include <doctest.h>

#include <cmath>
#include <random>

#include "twave/dynsys.hpp"
#include "twave/errors.hpp"
#include "twave/match.hpp"
#include "twave/shoot.hpp"

using namespace twave;

TEST_SUITE("dynsys") {

TEST_CASE("vector field by direct evaluation") {
    const auto f0 = vector_field({0, 0, 0, 0}, validate_params(2.0, 1.0));
    CHECK(f0 == Vec3{0.0, 0.0, 0.0});
    const auto f1 = vector_field({1, 0, 0, 0}, validate_params(2.0, 1.0));
    CHECK(f1[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(f1[1] == 0.0);
    CHECK(f1[2] == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
    const auto f2 = vector_field({0, 1, 1, 0}, validate_params(1.0, 1.0));
    CHECK(f2[0] == 0.0);
    CHECK(f2[1] == doctest::Approx(-2.0 / 3.0 + 1.0).epsilon(1e-15));
    CHECK(f2[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(vector_field({1, -1, 0, 0}, validate_params(2.0, 1.0)), SqrtDomain);
    CHECK_THROWS_AS(vector_field({2, -3, 0, 0}, validate_params(2.0, 1.0)), SqrtDomain);
}

TEST_CASE("jacobian matches finite differences of the field") {
    const Params p = validate_params(1.7, 0.9);
    const PhasePoint x{0.4, 0.3, -0.2, 0.0};
    const auto J = jacobian(x, p);
    const double h = 1e-6;
    for (int c = 0; c < 3; ++c) {
        PhasePoint a = x, b = x;
        (c == 0 ? a.r : c == 1 ? a.q : a.p) += h;
        (c == 0 ? b.r : c == 1 ? b.q : b.p) -= h;
        const auto fa = vector_field(a, p), fb = vector_field(b, p);
        for (int r = 0; r < 3; ++r) CHECK(J[r][c] == doctest::Approx((fa[r] - fb[r]) / (2 * h)).epsilon(1e-8));
    }
}

TEST_CASE("linearization at the origin") {
    const auto j2 = jacobian_origin(validate_params(2.0, 1.0));
    CHECK(j2.eigenvalues[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(j2.eigenvalues[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(j2.eigenvalues[2] == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
    const auto j1 = jacobian_origin(validate_params(1.0, 1.0));
    CHECK(j1.eigenvalues[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(j1.eigenvalues[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(j1.eigenvalues[2] == doctest::Approx(-2.0 / 3.0).epsilon(1e-14));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.01, 2.99);
    for (int i = 0; i < 20; ++i) {
        const double n = u(rng);
        const auto jo = jacobian_origin(validate_params(n, 1.0));
        int negative = 0;
        for (double e : jo.eigenvalues) negative += e < 0.0;
        CHECK(negative == 1);
        auto exp = origin_eigenvalues_closed_form(n);
        std::sort(exp.begin(), exp.end(), std::greater<>());
        for (int j = 0; j < 3; ++j) CHECK(std::abs(jo.eigenvalues[j] - exp[j]) <= 1e-12);
        // the stated unstable tangents are eigenvectors
        for (const auto& [v, lam] : {std::pair{jo.unstable_r, (3.0 - n) / 3.0}, std::pair{jo.unstable_qp, n / 3.0}})
            for (int r = 0; r < 3; ++r) {
                double Av = 0.0;
                for (int c = 0; c < 3; ++c) Av += jo.matrix[r][c] * v[c];
                CHECK(Av == doctest::Approx(lam * v[r]).epsilon(1e-14));
            }
        // triangular structure: r decouples
        CHECK(jo.matrix[0][1] == 0.0);
        CHECK(jo.matrix[0][2] == 0.0);
    }
}

TEST_CASE("integrate_s") {
    const Params p = validate_params(1.2, 1.0);
    SUBCASE("the origin is fixed") {
        const auto tr = integrate_s({0, 0, 0, 0}, -10.0, p);
        for (const auto& pt : tr.points) {
            CHECK(pt.r == 0.0);
            CHECK(pt.q == 0.0);
            CHECK(pt.p == 0.0);
        }
    }
    SUBCASE("the (0,1,1) direction decays like e^(ns/3) backwards") {
        const double d = 1e-8;
        const auto tr = integrate_s({0, d, d, 0}, -20.0, p, 1e-12, 0.5);
        for (const auto& pt : tr.points) {
            const double exact = d * std::exp(p.n * pt.s / 3.0);
            CHECK(pt.q == doctest::Approx(exact).epsilon(1e-9));
            CHECK(pt.p == doctest::Approx(exact).epsilon(1e-9));
        }
        CHECK(tr.points.back().s == doctest::Approx(-20.0));
    }
    SUBCASE("r integrates exactly") {
        const auto tr = integrate_s({0.2, 0.1, 0.05, -3.0}, -15.0, p);
        CHECK(tr.r_drift <= 1e-9);
        for (const auto& pt : tr.points)
            CHECK(pt.r == doctest::Approx(0.2 * std::exp((3.0 - p.n) * (pt.s + 3.0) / 3.0)).epsilon(1e-9));
    }
    SUBCASE("stops at the square-root boundary") {
        CHECK_THROWS_AS(integrate_s({1.0, -5.0, -5.0, 0.0}, 5.0, validate_params(2.0, 1.0)), NumericalError);
    }
}

TEST_CASE("forward integration from the series reproduces the shooting profile") {
    for (double n : {1.5, 2.0, 2.5}) {
        const Params p = validate_params(n, 1.0);
        const auto w = solve_w(p, default_series_degree);
        const auto shot = shoot_b(p, w);
        const double a = (3.0 - n) / 3.0;
        const double s0 = std::log(1e-4);
        const auto tr = integrate_s(phase_point_from_series(w, shot.b_cg, s0), std::log(1e2), p, 1e-12, 0.1);
        double worst = 0.0;
        for (const auto& pt : tr.points) {
            const double H = std::exp(pt.s);
            const double mu = profile_psi(shot.profile, H) - 1.0;
            const double q_shot = std::exp(-a * pt.s) * mu;
            worst = std::max(worst, std::abs(pt.q - q_shot));
        }
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("contact-line trajectories lie on the unstable manifold") {
    for (double n : {1.5, 2.0, 2.5}) {
        const Params p = validate_params(n, 1.0);
        const auto w = solve_w(p, default_series_degree);
        const auto g = compute_g(p, default_series_degree);
        const double b = match(p, w, MatchOptions{}).b_cg;
        const auto tr = integrate_s(phase_point_from_series(w, b, -25.0), -4.0, p);
        CHECK(manifold_deviation(g, tr) <= 1e-7);
    }
}

TEST_CASE("decay exponents") {
    SUBCASE("n = 1: slope n/3") {
        const Params p = validate_params(1.0, 1.0);
        const auto w = solve_w(p, default_series_degree);
        const auto dc = decay_exponent_check(w, match(p, w, MatchOptions{}).b_cg);
        CHECK(dc.one_sided);
        CHECK(dc.slope_q >= (1.0 / 3.0) * 0.98);
        CHECK(dc.slope_q == doctest::Approx(1.0 / 3.0).epsilon(0.02));
        CHECK(dc.slope_p == doctest::Approx(1.0 / 3.0).epsilon(0.02));
    }
    SUBCASE("n = 2: log-corrected slope 2/3") {
        const Params p = validate_params(2.0, 1.0);
        const auto w = solve_w(p, default_series_degree);
        const auto dc = decay_exponent_check(w, match(p, w, MatchOptions{}).b_cg);
        CHECK(dc.log_corrected);
        CHECK(dc.slope_q == doctest::Approx(2.0 / 3.0).epsilon(0.02));
        CHECK(dc.slope_p == doctest::Approx(2.0 / 3.0).epsilon(0.02));
    }
    SUBCASE("non-resonant 2 < n < 3 reaches (2/3)(3-n) deeper in the window") {
        const Params p = validate_params(2.4, 1.0);
        const auto w = solve_w(p, default_series_degree);
        const auto dc = decay_exponent_check(w, match(p, w, MatchOptions{}).b_cg, {-30.0, -10.0});
        CHECK(dc.slope_q == doctest::Approx(0.4).epsilon(0.02));
        CHECK(dc.amplitude_q == doctest::Approx(2.0 / (3.0 * 0.6 * 0.4)).epsilon(0.05));
    }
    SUBCASE("underflow is reported") {
        const auto w = solve_w(validate_params(1.5, 1.0), default_series_degree);
        CHECK_THROWS_AS(decay_exponent_check(w, 1.0, {-1600.0, -1500.0}), InsufficientDecay);
    }
}

}  // TEST_SUITE
