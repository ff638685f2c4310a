#include <cmath>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "dislo/error_harness.hpp"

using namespace dislo;

TEST_CASE("benchmark case catalogue", "[error_harness]") {
    CHECK(benchmark_case("i").model.A3 == 0.9);
    CHECK(benchmark_case("ii").model.A2 == 2.0);
    CHECK(benchmark_case("ii").model.rho_cr == 4.0);
    CHECK(benchmark_case("iii").model.rho_cr == 9.0);
    CHECK_FALSE(benchmark_case("iv").analytic_reference);
    CHECK(benchmark_case("v").model.A3 == 5.0);
    CHECK(benchmark_case("vi").model.a8 == 1.0);
    CHECK(benchmark_case("vii").model.a8 == 1.0);
    CHECK(benchmark_case("vii").horizon_intervals == 2);
    CHECK_THROWS_AS(benchmark_case("viii"), std::invalid_argument);
    CHECK(benchmark_labels().size() == 7);
}

TEST_CASE("worst-case error is a sup norm", "[error_harness]") {
    const TestCase tc = benchmark_case("ii");
    const auto p = make_problem(tc.model, 3.0 * t_cr_constant(tc.model));
    const auto path = explicit_euler(p, 50);
    const EulerOracle same(p, 50);
    CHECK(worst_case_error(path, same) == 0.0);
    CHECK(worst_case_error(path, [&same](double t) { return same(t) + 0.5; }) ==
          Catch::Approx(0.5).epsilon(1e-12));
    CHECK(worst_case_error(path, [&same](double t) { return same(t) - 0.25; }) ==
          Catch::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("empirical orders", "[error_harness]") {
    auto first_order = empirical_orders({{10, 1.0}, {100, 0.1}, {1000, 0.01}});
    REQUIRE(first_order.size() == 2);
    CHECK(*first_order[0] == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(*first_order[1] == Catch::Approx(1.0).epsilon(1e-12));

    auto fourth = empirical_orders({{10, 1.0}, {100, 1e-4}});
    CHECK(*fourth[0] == Catch::Approx(4.0).epsilon(1e-12));

    auto degenerate = empirical_orders({{10, 1.0}, {100, 0.0}});
    CHECK_FALSE(degenerate[0].has_value());

    CHECK_THROWS_AS(empirical_orders({{10, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(empirical_orders({{100, 1.0}, {10, 0.1}}), std::invalid_argument);
    CHECK_THROWS_AS(empirical_orders({{10, -1.0}, {100, 0.1}}), std::domain_error);
}

TEST_CASE("explicit Euler converges at order one on case ii", "[error_harness]") {
    const ErrorReport report =
        run_case(benchmark_case("ii"), {Method::ExplicitEuler}, {10, 100, 1000});
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].error > report.rows[1].error);
    CHECK(report.rows[1].error > report.rows[2].error);
    REQUIRE(report.rows[2].order.has_value());
    CHECK(*report.rows[2].order == Catch::Approx(1.0).margin(0.1));
    CHECK(report.reference_tolerance < 1e-8);
}

TEST_CASE("RK4 converges at order four on case vii's analytic window", "[error_harness]") {
    const ErrorReport report = run_case(benchmark_case("vii"), {Method::RK4}, {10, 100});
    REQUIRE(report.rows.size() == 2);
    REQUIRE(report.rows[1].order.has_value());
    CHECK(*report.rows[1].order == Catch::Approx(4.0).margin(0.5));
}

TEST_CASE("report rendering", "[error_harness]") {
    const ErrorReport report =
        run_case(benchmark_case("ii"), {Method::ExplicitEuler, Method::RK4}, {10, 100});
    std::ostringstream csv;
    report.write_csv(csv);
    std::istringstream is(csv.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "case,method,N,error,order");
    long rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        CHECK(line.rfind("ii,", 0) == 0);
    }
    CHECK(rows == 4);

    std::ostringstream table;
    report.write_table(table);
    CHECK(table.str().find("explicit-euler") != std::string::npos);
    CHECK(table.str().find("rk4") != std::string::npos);

    CHECK_THROWS_AS(run_case(benchmark_case("ii"), {}, {10, 100}), std::invalid_argument);
    CHECK_THROWS_AS(run_case(benchmark_case("ii"), {Method::RK4}, {100, 10}),
                    std::invalid_argument);
}

TEST_CASE("oracle-referenced case uses the high-resolution Euler run", "[error_harness]") {
    // with N_oracle modest this stays fast; errors must still shrink
    const ErrorReport report =
        run_case(benchmark_case("v"), {Method::ExplicitEuler}, {10, 100}, 100000);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[1].error < report.rows[0].error);
}

TEST_CASE("stability scan classifications", "[error_harness]") {
    ConstantModel base{10.0, 1.0, 0.9, 0.0, 0.0, 4.0};
    const auto entries = stability_scan(base, {0.0, 0.5, 0.9, 5.0}, 4000);
    REQUIRE(entries.size() == 4);

    CHECK(entries[0].cls == StabilityClass::MonotoneSaturating);
    CHECK(entries[0].sign_changes == 0);

    CHECK(entries[1].cls != StabilityClass::GrowingOscillatory);
    CHECK(entries[2].cls != StabilityClass::GrowingOscillatory);

    CHECK(entries[3].cls == StabilityClass::GrowingOscillatory);
    CHECK(entries[3].min_value < 0.0);

    CHECK(std::string(stability_name(entries[0].cls)) == "monotone-saturating");
}
