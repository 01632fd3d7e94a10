#include <doctest.h>

#include <cmath>

#include "twave/bvp.hpp"
#include "twave/errors.hpp"
#include "twave/shoot.hpp"

using namespace twave;

namespace {

/// S[k^2] for n = 1 in closed form: k^2 + (2/(3k)) int_eps^H (atan(1/eps) - atan(H1)) dH1.
double S_const_n1(double H, double k, double eps) {
    auto F = [](double x) { return x * std::atan(x) - 0.5 * std::log1p(x * x); };
    return k * k + 2.0 / (3.0 * k) * ((H - eps) * std::atan(1.0 / eps) - (F(H) - F(eps)));
}

GridFn constant_grid(double eps, int N, double v) {
    GridFn f;
    f.eps = eps;
    f.nodes = geometric_grid(eps, N);
    f.values.assign(f.nodes.size(), v);
    return f;
}

}  // namespace

TEST_SUITE("bvp") {

TEST_CASE("K_eps closed forms") {
    CHECK(K_eps(validate_params(1.0, 1.0), 0.1) == doctest::Approx(25.0 / 3.0).epsilon(1e-14));
    CHECK(K_eps(validate_params(2.0, 1.0), 0.1) == doctest::Approx(25.0 / 3.0).epsilon(1e-14));
    CHECK(K_eps(validate_params(2.5, 2.0), 0.5) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("geometric grid") {
    const auto g = geometric_grid(1e-3, 101);
    REQUIRE(g.size() == 101);
    CHECK(g.front() == 1e-3);
    CHECK(g.back() == doctest::Approx(1e3).epsilon(1e-14));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}

TEST_CASE("apply_S on a constant against the n = 1 closed form") {
    const double eps = 1e-2, k = 1.0;
    const Params p = validate_params(1.0, k);
    auto worst_error = [&](int N) {
        const auto S = apply_S(constant_grid(eps, N, k * k), p);
        double worst = 0.0;
        for (std::size_t i = 0; i < S.nodes.size(); ++i)
            worst = std::max(worst, std::abs(S.values[i] - S_const_n1(S.nodes[i], k, eps)));
        return worst;
    };
    // second-order quadrature: the error drops by 4 per halving of the log step
    const double e1 = worst_error(1025), e2 = worst_error(2049), e3 = worst_error(4097);
    CHECK(e3 <= 2e-5);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.1));
    const auto S = apply_S(constant_grid(eps, 4096, k * k), p);
    CHECK(S.values.front() == k * k);
    // the slope vanishes at 1/eps
    const std::size_t m = S.nodes.size() - 1;
    const double slope_end = (S.values[m] - S.values[m - 1]) / (S.nodes[m] - S.nodes[m - 1]);
    const double slope_start = (S.values[1] - S.values[0]) / (S.nodes[1] - S.nodes[0]);
    CHECK(std::abs(slope_end) <= 1e-3 * slope_start);
}

TEST_CASE("S is antitone and bounded") {
    const Params p = validate_params(2.0, 1.0);
    const double eps = 1e-2;
    const auto lo = constant_grid(eps, 512, 1.0), hi = constant_grid(eps, 512, 2.0);
    const auto Slo = apply_S(lo, p), Shi = apply_S(hi, p);
    const double K = K_eps(p, eps);
    for (std::size_t i = 0; i < Slo.values.size(); ++i) {
        CHECK(Slo.values[i] >= Shi.values[i]);
        CHECK(Slo.values[i] >= 1.0);
        CHECK(Slo.values[i] <= K);
        if (i > 0) CHECK(Slo.values[i] >= Slo.values[i - 1]);
    }
}

TEST_CASE("Picard iteration") {
    const Params p = validate_params(2.0, 1.0);
    BvpOptions o;
    o.eps = 1e-2;
    o.grid_size = 2048;
    const auto sol = picard_solve(p, o);
    CHECK(sol.iterations <= 60);
    CHECK(sol.bracket_gap <= 1e-8);
    CHECK(sol.lower_margin >= 0.0);
    CHECK(sol.upper_margin >= 0.0);
    CHECK(sol.min_value >= 1.0);
    CHECK(sol.max_value <= K_eps(p, o.eps));
    // the result is a fixed point of S
    const auto S = apply_S(sol.psi, p);
    double res = 0.0;
    for (std::size_t i = 0; i < S.values.size(); ++i) res = std::max(res, std::abs(S.values[i] - sol.psi.values[i]));
    CHECK(res <= 1e-8);
    // first iterate lies above psi^0 = k^2
    const auto first = apply_S(constant_grid(o.eps, o.grid_size, 1.0), p);
    for (double v : first.values) CHECK(v >= 1.0);
}

TEST_CASE("grid refinement converges at second order") {
    const Params p = validate_params(1.5, 1.0);
    std::vector<GridFn> sols;
    for (int N : {257, 513, 1025}) {
        BvpOptions o;
        o.eps = 1e-2;
        o.grid_size = N;
        sols.push_back(picard_solve(p, o).psi);
    }
    // nested grids: node i of N is node 2i of 2N - 1
    auto diff = [](const GridFn& c, const GridFn& f) {
        double m = 0.0;
        for (std::size_t i = 0; i < c.nodes.size(); ++i) m = std::max(m, std::abs(c.values[i] - f.values[2 * i]));
        return m;
    };
    const double ratio = diff(sols[0], sols[1]) / diff(sols[1], sols[2]);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("cross_validate") {
    const Params p = validate_params(2.0, 1.0);
    const auto shot = shoot_b(p);
    SUBCASE("a profile against itself resampled") {
        GridFn self;
        self.eps = 1e-2;
        self.nodes = geometric_grid(1e-2, 400);
        for (double H : self.nodes) self.values.push_back(profile_psi(shot.profile, H));
        const auto cv = cross_validate(self, shot.profile);
        CHECK(cv.sup_rel <= 1e-6);
        CHECK(cv.pass);
    }
    SUBCASE("a wrong-k grid fails") {
        BvpOptions o;
        o.eps = 1e-2;
        o.grid_size = 1024;
        const auto sol = picard_solve(validate_params(2.0, 1.2), o);
        CHECK_FALSE(cross_validate(sol.psi, shot.profile).pass);
    }
    SUBCASE("disjoint ranges") {
        GridFn far;
        far.eps = 1e-2;
        far.nodes = {1e7, 1e8};
        far.values = {3.0, 3.1};
        CHECK_THROWS_AS(cross_validate(far, shot.profile), InsufficientOverlap);
    }
}

TEST_CASE("shrinking eps brings the grid solution towards the shooting profile") {
    const Params p = validate_params(2.0, 1.0);
    const auto shot = shoot_b(p);
    double prev = INFINITY;
    for (double eps : {1e-2, 3e-3, 1e-3}) {
        BvpOptions o;
        o.eps = eps;
        o.grid_size = 4096;
        const auto sol = picard_solve(p, o);
        double sup = 0.0;
        for (std::size_t i = 0; i < sol.psi.nodes.size(); ++i) {
            const double H = sol.psi.nodes[i];
            if (H < 0.1 || H > 10.0) continue;
            sup = std::max(sup, std::abs(sol.psi.values[i] - profile_psi(shot.profile, H)));
        }
        CHECK(sup < prev);
        prev = sup;
    }
}

}  // TEST_SUITE
