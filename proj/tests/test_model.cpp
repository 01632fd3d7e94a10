#include <doctest.h>

#include <cmath>
#include <random>

#include "twave/errors.hpp"
#include "twave/model.hpp"

using namespace twave;

TEST_SUITE("model") {

TEST_CASE("validate_params accepts the normalized default and names violated bounds") {
    const Params p = validate_params(2.0, 1.0, 1.0, 1.0 / 3.0);
    CHECK(p.n == 2.0);
    CHECK(p.k == 1.0);
    CHECK(p.normalized);
    CHECK_FALSE(validate_params(2.0, 1.0, 2.0, 1.0).normalized);

    auto message = [](auto f) {
        try {
            f();
        } catch (const RangeError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message([] { validate_params(3.0, 1.0, 1.0, 1.0 / 3.0); }).find("n =") != std::string::npos);
    CHECK(message([] { validate_params(0.0, 1.0); }).find("n =") != std::string::npos);
    CHECK(message([] { validate_params(1.5, 0.0, 1.0, 1.0 / 3.0); }).find("k =") != std::string::npos);
    CHECK(message([] { validate_params(1.5, 1.0, -1.0); }).find("lambda") != std::string::npos);
    CHECK(message([] { validate_params(1.5, 1.0, 1.0, 0.0); }).find("V =") != std::string::npos);
    CHECK_THROWS_AS(validate_params(std::nan(""), 1.0), ValidationError);
}

TEST_CASE("normalize") {
    SUBCASE("already normalized input keeps k and unit scales") {
        const auto [p, rec] = normalize(validate_params(2.0, 1.0), 0.7);
        CHECK(p.k == 0.7);
        CHECK(rec.h_scale == 1.0);
        CHECK(rec.x_scale == 1.0);
        CHECK(rec.angle_scale == 1.0);
    }
    SUBCASE("lambda = 2, V = 9") {
        const auto [p, rec] = normalize(validate_params(2.0, 1.0, 2.0, 9.0), 1.0);
        CHECK(p.k == doctest::Approx(3.0).epsilon(1e-14));
        CHECK(rec.h_scale == 2.0);
        CHECK(rec.x_scale == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
        CHECK(p.lambda == 1.0);
        CHECK(p.V == 1.0 / 3.0);
        CHECK(p.normalized);
    }
    SUBCASE("V = 1/24 halves the angle") {
        const auto [p, rec] = normalize(validate_params(1.0, 1.0, 1.0, 1.0 / 24.0), 2.0);
        CHECK(p.k == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(rec.angle_scale == doctest::Approx(0.5).epsilon(1e-14));
    }
    SUBCASE("idempotent") {
        const auto [p1, r1] = normalize(validate_params(1.3, 1.0, 0.4, 2.5), 0.9);
        const auto [p2, r2] = normalize(p1, p1.k);
        CHECK(p2.k == p1.k);
        CHECK(p2.lambda == p1.lambda);
        CHECK(p2.V == p1.V);
        CHECK(r2.h_scale == 1.0);
        CHECK(r2.x_scale == 1.0);
    }
    SUBCASE("slopes map by h_scale / x_scale") {
        const auto [p, rec] = normalize(validate_params(2.0, 1.0, 0.3, 5.0), 1.0);
        CHECK(rec.h_scale / rec.x_scale == doctest::Approx(rec.angle_scale).epsilon(1e-14));
    }
    CHECK_THROWS_AS(normalize(validate_params(2.0, 1.0), -1.0), RangeError);
}

TEST_CASE("mobility") {
    CHECK(mobility(1.0, validate_params(0.7, 1.0)) == 2.0);
    CHECK(mobility(1.0, validate_params(2.9, 1.0)) == 2.0);
    CHECK(mobility(0.0, validate_params(2.0, 1.0)) == 0.0);
    CHECK(mobility(0.5, validate_params(2.0, 1.0, 2.0)) == doctest::Approx(0.625).epsilon(1e-15));
    CHECK_THROWS_AS(mobility(-1e-3, validate_params(2.0, 1.0)), DomainError);
}

TEST_CASE("mobility is positive, and increasing for n >= 1") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> un(0.05, 2.95), ul(0.1, 5.0);
    for (int i = 0; i < 200; ++i) {
        const Params p = validate_params(un(rng), 1.0, ul(rng));
        double prev = 0.0;
        for (double h = 1e-6; h < 1e3; h *= 1.7) {
            const double m = mobility(h, p);
            CHECK(m > 0.0);
            if (p.n >= 1.0) CHECK(m > prev);
            prev = m;
        }
    }
}

TEST_CASE("resonance classes") {
    const auto r2 = resonance_class(2.0);
    CHECK(r2.resonant());
    CHECK(r2.m == 1);
    CHECK_FALSE(resonance_class(1.5).resonant());
    const auto r83 = resonance_class(8.0 / 3.0);
    CHECK(r83.resonant());
    CHECK(r83.m == 3);
    CHECK(resonance_class(2.5).m == 2);
    CHECK_FALSE(resonance_class(2.4).resonant());
    CHECK_FALSE(resonance_class(2.4).warning.has_value());
    // within res_tol counts as resonant
    CHECK(resonance_class(2.0 + 5e-13).resonant());
    // near but outside: non-resonant with a warning
    const auto near = resonance_class(2.5 + 1e-4);
    CHECK_FALSE(near.resonant());
    CHECK(near.warning.has_value());
    CHECK(resonance_class(2.0 - 1e-4).warning.has_value());
    // every n < 2 is non-resonant
    for (double n = 0.01; n < 1.99; n += 0.01) CHECK_FALSE(resonance_class(n).resonant());
    CHECK(resonance_distance(2.75) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(resonance_distance(1.25) == doctest::Approx(0.75));
}

}  // TEST_SUITE
