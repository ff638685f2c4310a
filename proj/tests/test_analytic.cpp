#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "dislo/analytic.hpp"
#include "dislo/error_harness.hpp"

using namespace dislo;

namespace {

ConstantModel case_ii() { return {10.0, 2.0, 1.0, 0.0, 0.0, 4.0}; }
ConstantModel case_vii() { return {10.0, 1.0, 0.9, 1.0, 0.0, 9.0}; }

} // namespace

TEST_CASE("closed-form critical times", "[analytic]") {
    CHECK(t_cr_constant({10.0, 1.0, 0.9, 0.0, 0.0, 1.0}) ==
          Catch::Approx(0.10536051565782635).epsilon(1e-13)); // ln(10/9)
    CHECK(t_cr_constant(case_ii()) ==
          Catch::Approx(0.8047189562170501).epsilon(1e-13)); // 0.5 ln 5
    CHECK(t_cr_constant({10.0, 1.0, 0.9, 0.0, 0.0, 9.0}) ==
          Catch::Approx(2.302585092994046).epsilon(1e-13)); // ln 10
    CHECK_THROWS_AS(t_cr_constant({10.0, 2.0, 1.0, 0.0, 0.0, 6.0}), std::domain_error);
}

TEST_CASE("pre-delay solution", "[analytic]") {
    const ConstantModel m = case_ii();
    CHECK(phi0_constant(m, 0.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(phi0_constant(m, 0.5) == Catch::Approx(3.1606027941427883).epsilon(1e-14));
    CHECK(phi0_constant(m, t_cr_constant(m)) == Catch::Approx(m.rho_cr).epsilon(1e-12));
    CHECK_THROWS_AS(phi0_constant(m, -0.1), std::domain_error);
    CHECK_THROWS_AS(phi0_constant(m, 10.0), std::domain_error);
}

TEST_CASE("recursion matches an independent high-order solve, a8 = 0", "[analytic]") {
    // reference values frozen from an adaptive eighth-order integrator run
    // with per-interval restarts and dense delayed-value lookup
    const AnalyticSolution sol(case_ii(), 4);
    const double tcr = sol.t_cr();
    CHECK(sol(1.5 * tcr) == Catch::Approx(4.0705235376918845).epsilon(1e-9));
    CHECK(sol(2.0 * tcr) == Catch::Approx(3.604718956216983).epsilon(1e-9));
    CHECK(sol(2.5 * tcr) == Catch::Approx(3.234115354893736).epsilon(1e-9));
    CHECK(sol(3.5 * tcr) == Catch::Approx(3.2434666913678534).epsilon(1e-9));
}

TEST_CASE("recursion matches an independent high-order solve, a8 = 1", "[analytic]") {
    const AnalyticSolution sol(case_vii(), 2);
    const double tcr = sol.t_cr();
    CHECK(sol(1.5 * tcr) == Catch::Approx(1.5573912928040867).epsilon(1e-9));
    CHECK(sol(2.0 * tcr) == Catch::Approx(1.112968016366687).epsilon(1e-9));
    CHECK(analytic_a8_1(case_vii(), 2, 2.0 * tcr) ==
          Catch::Approx(1.112968016366687).epsilon(1e-9));
}

TEST_CASE("residual of every tabulated interval", "[analytic]") {
    for (const ConstantModel m : {case_ii(), case_vii()}) {
        const int depth = (m.a8 == 1.0) ? 2 : 5;
        const AnalyticSolution sol(m, depth);
        const double tcr = sol.t_cr();
        const double fd = 1e-6 * tcr;
        std::mt19937 rng(42);
        for (int n = 1; n <= depth; ++n) {
            std::uniform_real_distribution<double> pick(n * tcr + 10 * fd,
                                                        (n + 1) * tcr - 10 * fd);
            for (int i = 0; i < 100; ++i) {
                const double t = pick(rng);
                const double deriv = (sol(t + fd) - sol(t - fd)) / (2.0 * fd);
                const double rhs = sol.rhs(t, sol(t), sol.delayed(t));
                CHECK(deriv == Catch::Approx(rhs).epsilon(1e-4).margin(1e-7));
            }
        }
    }
}

TEST_CASE("continuity, boundedness, monotone pre-delay growth", "[analytic]") {
    const AnalyticSolution sol(case_ii(), 6);
    const double tcr = sol.t_cr();
    for (int n = 1; n <= 6; ++n)
        CHECK(std::abs(sol.value(n, n * tcr) - sol.value(n - 1, n * tcr)) < 1e-10);
    const double sat = case_ii().saturation();
    for (double t = 0.0; t <= 7.0 * tcr; t += tcr / 97.0) {
        CHECK(sol(t) >= -1e-12);
        CHECK(sol(t) <= sat * (1.0 + 1e-12));
    }
    for (double t = 0.0; t + tcr / 50.0 <= tcr; t += tcr / 50.0)
        CHECK(sol(t + tcr / 50.0) > sol(t));
    CHECK(sol.achieved_tolerance(6) < 1e-8);
}

TEST_CASE("quadrature self-consistency across node densities", "[analytic]") {
    AnalyticConfig coarse;
    coarse.nodes_per_interval = 512;
    const AnalyticSolution a(case_ii(), 3);
    const AnalyticSolution b(case_ii(), 3, coarse);
    const double tcr = a.t_cr();
    for (double t = 0.0; t <= 4.0 * tcr; t += tcr / 13.0)
        CHECK(a(t) == Catch::Approx(b(t)).margin(1e-9));
}

TEST_CASE("degenerate zero path", "[analytic]") {
    CHECK(bernoulli_degenerate_check(0.0, 0.0)(123.4) == 0.0);
    CHECK_THROWS_AS(bernoulli_degenerate_check(1.0, 0.0), std::domain_error);
}

TEST_CASE("time-dependent recursion reduces to the constant one", "[analytic]") {
    const ConstantModel m = case_ii();
    const auto track = CoefficientTrack::constant(m.A1, m.A2, m.A3, 1.0, m.rho_cr);
    const double tcr = t_cr_constant(m);

    auto detected = t_cr_timedep(track, m.rho0,
                                 [&m](double) { return m.rho_cr; }, 10.0 * tcr);
    REQUIRE(detected.has_value());
    CHECK(*detected == Catch::Approx(tcr).epsilon(1e-9));

    CHECK(phi0_timedep(track, m.rho0, 0.5) == Catch::Approx(phi0_constant(m, 0.5)).margin(1e-10));

    const AnalyticSolution ref(m, 3);
    const TimedepAnalytic td(track, 0, m.rho0, tcr, 3);
    for (double t = 0.0; t <= 4.0 * tcr; t += tcr / 11.0)
        CHECK(td(t) == Catch::Approx(ref(t)).margin(1e-9));
}

TEST_CASE("time-dependent crossing detection handles edge cases", "[analytic]") {
    const ConstantModel m = case_ii();
    const auto track = CoefficientTrack::constant(m.A1, m.A2, m.A3, 1.0, m.rho_cr);
    // already critical at t = 0
    CHECK(t_cr_timedep(track, 5.0, [](double) { return 4.0; }, 1.0).value() == 0.0);
    // threshold above the saturation level is never reached
    CHECK_FALSE(t_cr_timedep(track, 0.0, [](double) { return 6.0; }, 20.0).has_value());
}
