// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in the code below.

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "dislo/dislo.hpp"

using namespace dislo;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    if (!pass)
        ++failures;
}

char buf[512];

// 1. Explicit Euler on case (ii): final-decade error ratio in [8, 12] and
//    empirical order in [0.9, 1.1] over [0, 10 t_cr].
void criterion_1() {
    const ErrorReport r =
        run_case(benchmark_case("ii"), {Method::ExplicitEuler}, {1000, 10000, 100000});
    const double ratio1 = r.rows[0].error / r.rows[1].error;
    const double ratio2 = r.rows[1].error / r.rows[2].error;
    const double order = r.rows[2].order.value_or(0.0);
    const bool pass = ratio1 >= 8.0 && ratio1 <= 12.0 && ratio2 >= 8.0 && ratio2 <= 12.0 &&
                      order >= 0.9 && order <= 1.1;
    std::snprintf(buf, sizeof buf,
                  "explicit Euler case ii: decade ratios %.3f, %.3f; final order %.4f", ratio1,
                  ratio2, order);
    report(1, pass, buf);
}

// 2. RK4 on cases (ii) and (vii): final-decade empirical order in [3.5, 4.5].
void criterion_2() {
    bool pass = true;
    std::string detail = "rk4 orders:";
    for (const char* label : {"ii", "vii"}) {
        const ErrorReport r = run_case(benchmark_case(label), {Method::RK4}, {10, 100});
        const double order = r.rows[1].order.value_or(0.0);
        pass = pass && order >= 3.5 && order <= 4.5;
        std::snprintf(buf, sizeof buf, " case %s %.4f", label, order);
        detail += buf;
    }
    report(2, pass, detail);
}

// 3. Backward vs explicit Euler on case (ii) at equal N: errors within 1.2x.
void criterion_3() {
    const ErrorReport r = run_case(benchmark_case("ii"),
                                   {Method::ExplicitEuler, Method::BackwardEuler}, {10000});
    const double fe = r.rows[0].error;
    const double be = r.rows[1].error;
    const double factor = std::max(fe / be, be / fe);
    std::snprintf(buf, sizeof buf,
                  "case ii N=10000: explicit %.6e vs backward %.6e (factor %.4f)", fe, be,
                  factor);
    report(3, factor <= 1.2, buf);
}

// 4. Numerical t_cr detection matches the closed forms within 1e-8.
void criterion_4() {
    bool pass = true;
    std::string detail = "detected t_cr:";
    for (const char* label : {"i", "ii", "iii"}) {
        const ConstantModel m = benchmark_case(label).model;
        const double closed = t_cr_constant(m);
        const auto track = CoefficientTrack::constant(m.A1, m.A2, m.A3, 1.0, m.rho_cr);
        const auto hit = detect_t_cr(track, m.rho0, 0.0, closed / 10000.0, 10.0 * closed);
        const double err = hit ? std::abs(hit->t_cr - closed) : 1e9;
        pass = pass && err <= 1e-8;
        std::snprintf(buf, sizeof buf, " case %s |err|=%.2e", label, err);
        detail += buf;
    }
    report(4, pass, detail);
}

// 5. Analytic interval solutions satisfy the DDE residual within 1e-4
//    relative at 100 seeded-random points per interval.
void criterion_5() {
    bool pass = true;
    double worst = 0.0;
    for (const char* label : {"i", "ii", "iii", "vi", "vii"}) {
        const TestCase tc = benchmark_case(label);
        const int depth = tc.horizon_intervals;
        const AnalyticSolution sol(tc.model, depth);
        const double tcr = sol.t_cr();
        const double fd = 1e-6 * tcr;
        std::mt19937 rng(7);
        for (int n = 1; n <= depth; ++n) {
            std::uniform_real_distribution<double> pick(n * tcr + 10 * fd,
                                                        (n + 1) * tcr - 10 * fd);
            for (int i = 0; i < 100; ++i) {
                const double t = pick(rng);
                const double deriv = (sol(t + fd) - sol(t - fd)) / (2.0 * fd);
                const double f = sol.rhs(t, sol(t), sol.delayed(t));
                const double rel = std::abs(deriv - f) / std::max(std::abs(f), 1e-3);
                worst = std::max(worst, rel);
                pass = pass && rel <= 1e-4;
            }
        }
    }
    std::snprintf(buf, sizeof buf, "worst relative residual %.3e (limit 1e-4)", worst);
    report(5, pass, buf);
}

// 6. With A3/A2 < 1, every method at N = 1000 stays inside
//    [-10h, (A1/A2)(1 + 10h)].
void criterion_6() {
    bool pass = true;
    std::string detail = "bounds respected for";
    for (const char* label : {"i", "ii", "iii", "vi", "vii"}) {
        const ConstantModel m = benchmark_case(label).model;
        const double tcr = t_cr_constant(m);
        const double h = tcr / 1000.0;
        const double sat = m.saturation();
        bool ok = true;
        for (Method method : {Method::ExplicitEuler, Method::BackwardEuler, Method::RK4}) {
            const auto path = solve(make_problem(m, 10.0 * tcr), method, 1000);
            for (const auto& iv : path.values)
                for (double y : iv)
                    ok = ok && y >= -10.0 * h && y <= sat * (1.0 + 10.0 * h);
        }
        pass = pass && ok;
        detail += std::string(" ") + label + (ok ? "" : "(!)");
    }
    report(6, pass, detail);
}

// 7. A1 = 0, rho0 = 0 gives the identically zero path at machine precision
//    for a8 in {0, 0.45239, 1}.
void criterion_7() {
    bool pass = true;
    for (double a8 : {0.0, 0.45239, 1.0}) {
        DdeProblem p;
        p.rhs = [a8](double, double y, double z) {
            const double sg = (y >= 0.0) ? 1.0 : -1.0;
            return -2.0 * y - 1.0 * sg * std::pow(std::abs(y), a8) * z;
        };
        p.t_cr = 1.0;
        p.eta = 0.0;
        p.horizon = 3.0;
        for (Method method : {Method::ExplicitEuler, Method::BackwardEuler, Method::RK4}) {
            const auto path = solve(p, method, 200);
            for (const auto& iv : path.values)
                for (double y : iv)
                    pass = pass && y == 0.0;
        }
    }
    report(7, pass, "zero field from zero start stays exactly zero for a8 in {0, 0.45239, 1}");
}

// 8. Case (v) is classified growing-oscillatory, yet explicit Euler keeps
//    order ~1 on the fixed horizon (vs the N = 10^6 oracle).
void criterion_8() {
    const ConstantModel m = benchmark_case("v").model;
    const auto scan = stability_scan(m, {m.A3}, 10000);
    const bool growing = scan[0].cls == StabilityClass::GrowingOscillatory;
    const ErrorReport r =
        run_case(benchmark_case("v"), {Method::ExplicitEuler}, {100, 1000, 10000});
    const double order = r.rows[2].order.value_or(0.0);
    const bool pass = growing && order >= 0.9 && order <= 1.1;
    std::snprintf(buf, sizeof buf, "case v: class %s, Euler final order %.4f",
                  stability_name(scan[0].cls), order);
    report(8, pass, buf);
}

// 9. Copper 575 C constant scenario saturates within 1% of A1/A2 before the
//    onset, and matches the constant-coefficient solver within 1e-10 relative.
void criterion_9() {
    const MaterialPreset cu = copper_preset(575);
    const ConstantModel m{cu.composite->A1, cu.composite->A2, cu.composite->A3,
                          cu.a8,            cu.rho0,           *cu.rho_cr};
    const double tcr = t_cr_constant(m);
    const double plateau = m.saturation();
    const ScenarioResult r =
        run_scenario(cu, cu.rho0, Method::ExplicitEuler, 1000, 3.0 * tcr);

    double before_onset = 0.0;
    for (std::size_t i = 0; i < r.t.size(); ++i)
        if (r.t_cr && r.t[i] <= *r.t_cr)
            before_onset = std::max(before_onset, r.rho[i]);
    const bool saturates = before_onset >= 0.99 * plateau && before_onset <= plateau * 1.0001;

    const auto direct = explicit_euler(make_problem(m, 3.0 * tcr), 1000);
    double worst_rel = 0.0;
    for (int j = 0; j < direct.intervals(); ++j)
        for (std::size_t k = 0; k < direct.values[j].size(); ++k)
            worst_rel = std::max(worst_rel,
                                 std::abs(r.path.values[j][k] - direct.values[j][k]) /
                                     std::max(std::abs(direct.values[j][k]), 1.0));
    const bool pass = saturates && worst_rel <= 1e-10;
    std::snprintf(buf, sizeof buf,
                  "pre-onset max %.5e of plateau %.5e (%.4f); reduction rel err %.3e",
                  before_onset, plateau, before_onset / plateau, worst_rel);
    report(9, pass, buf);
}

// 10. Analytic recursion and the N = 10^6 explicit-Euler oracle agree within
//     1e-4 absolute on every analytic validity window.
void criterion_10() {
    bool pass = true;
    double worst = 0.0;
    for (const char* label : {"i", "ii", "iii", "vi", "vii"}) {
        const double d = oracle_cross_check(benchmark_case(label));
        worst = std::max(worst, d);
        pass = pass && d <= 1e-4;
    }
    std::snprintf(buf, sizeof buf, "worst analytic-vs-oracle gap %.3e (limit 1e-4)", worst);
    report(10, pass, buf);
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all 10 criteria passed\n");
    return 0;
}
