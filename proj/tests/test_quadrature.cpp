#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "dislo/quadrature.hpp"

using dislo::integrate;
using dislo::integrate_checked;
using dislo::QuadratureConfig;

TEST_CASE("polynomial integrands are exact", "[quadrature]") {
    auto r = integrate([](double x) { return x * x; }, 0.0, 1.0);
    CHECK(r.converged);
    CHECK(r.value == Catch::Approx(1.0 / 3.0).epsilon(1e-14));

    // Simpson is exact for cubics; the adaptive pass should not degrade that
    auto c = integrate([](double x) { return x * x * x - 2.0 * x; }, -1.0, 2.0);
    CHECK(c.value == Catch::Approx(15.0 / 4.0 - 3.0).margin(1e-13));
}

TEST_CASE("smooth transcendental integrands meet the default tolerance", "[quadrature]") {
    auto s = integrate([](double x) { return std::sin(x); }, 0.0, M_PI);
    CHECK(s.converged);
    CHECK(s.value == Catch::Approx(2.0).epsilon(1e-12));

    auto e = integrate([](double x) { return std::exp(x); }, 0.0, 1.0);
    CHECK(e.value == Catch::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));

    auto o = integrate([](double x) { return std::sin(50.0 * x); }, 0.0, 1.0);
    CHECK(o.value == Catch::Approx((1.0 - std::cos(50.0)) / 50.0).margin(1e-10));
}

TEST_CASE("orientation and degenerate intervals", "[quadrature]") {
    auto fwd = integrate([](double x) { return x; }, 0.0, 2.0);
    auto rev = integrate([](double x) { return x; }, 2.0, 0.0);
    CHECK(rev.value == Catch::Approx(-fwd.value).epsilon(1e-14));
    CHECK(integrate([](double x) { return x; }, 1.0, 1.0).value == 0.0);
}

TEST_CASE("depth exhaustion is reported and integrate_checked throws", "[quadrature]") {
    QuadratureConfig cfg;
    cfg.max_depth = 1;
    cfg.abs_tol = 1e-15;
    cfg.rel_tol = 1e-15;
    auto r = integrate([](double x) { return std::sin(50.0 * x); }, 0.0, 1.0, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.error_bound > 0.0);
    CHECK_THROWS_AS(integrate_checked([](double x) { return std::sin(50.0 * x); }, 0.0, 1.0, cfg),
                    dislo::accuracy_error);
}

TEST_CASE("configuration is validated", "[quadrature]") {
    QuadratureConfig cfg;
    cfg.abs_tol = 0.0;
    CHECK_THROWS_AS(integrate([](double x) { return x; }, 0.0, 1.0, cfg), std::domain_error);
    cfg = {};
    cfg.max_depth = 0;
    CHECK_THROWS_AS(integrate([](double x) { return x; }, 0.0, 1.0, cfg), std::domain_error);
}
