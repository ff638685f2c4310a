#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "dislo/analytic.hpp"
#include "dislo/errors.hpp"
#include "dislo/integrators.hpp"

namespace dislo {

/// One labeled benchmark configuration of the constant-coefficient model.
struct TestCase {
    std::string label;
    ConstantModel model;
    int horizon_intervals = 10; // horizon = horizon_intervals * t_cr
    bool analytic_reference = true;
};

/// The labeled parameter sets (i)..(vii). (vi)/(vii) are the a8 = 1 variants;
/// their error study is restricted to [0, 2 t_cr] where the analytic recursion
/// is tabulated. (iv)/(v) break the A3/A2 < 1 assumption, so their reference
/// is a high-resolution explicit-Euler oracle instead of the analytic module.
inline TestCase benchmark_case(std::string_view label) {
    TestCase tc;
    tc.label = std::string(label);
    ConstantModel& m = tc.model;
    m.rho0 = 0.0;
    if (label == "i") {
        m = {10.0, 1.0, 0.9, 0.0, 0.0, 1.0};
    } else if (label == "ii") {
        m = {10.0, 2.0, 1.0, 0.0, 0.0, 4.0};
    } else if (label == "iii") {
        m = {10.0, 1.0, 0.9, 0.0, 0.0, 9.0};
    } else if (label == "iv") {
        m = {10.0, 1.0, 1.5, 0.0, 0.0, 9.0};
        tc.analytic_reference = false;
    } else if (label == "v") {
        m = {10.0, 1.0, 5.0, 0.0, 0.0, 4.0};
        tc.analytic_reference = false;
    } else if (label == "vi") {
        m = {10.0, 2.0, 1.0, 1.0, 0.0, 4.0};
        tc.horizon_intervals = 2;
    } else if (label == "vii") {
        m = {10.0, 1.0, 0.9, 1.0, 0.0, 9.0};
        tc.horizon_intervals = 2;
    } else {
        throw std::invalid_argument("benchmark_case: label must be one of i..vii");
    }
    m.validate();
    return tc;
}

inline const std::vector<std::string>& benchmark_labels() {
    static const std::vector<std::string> ls{"i", "ii", "iii", "iv", "v", "vi", "vii"};
    return ls;
}

/// DdeProblem for a constant-coefficient model over [0, horizon].
inline DdeProblem make_problem(const ConstantModel& m, double horizon) {
    m.validate();
    const double tcr = t_cr_constant(m);
    DdeProblem p;
    p.t_cr = tcr;
    p.eta = m.rho0;
    p.horizon = horizon;
    p.rhs = [m, tcr](double t, double y, double z) {
        double v = m.A1 - m.A2 * y;
        if (t > tcr) {
            const double sg = (y >= 0.0) ? 1.0 : -1.0;
            const double fac = (m.a8 == 0.0) ? 1.0 : sg * std::pow(std::abs(y), m.a8);
            v -= m.A3 * fac * z;
        }
        return v;
    };
    return p;
}

/// Sup over all grid nodes of |y_k^j - reference(t_k^j)|.
template <typename Ref>
double worst_case_error(const SolutionPath& path, Ref&& reference) {
    double worst = 0.0;
    for (int j = 0; j < path.intervals(); ++j)
        for (std::size_t k = 0; k < path.values[j].size(); ++k) {
            const double t = path.node_time(j, static_cast<int>(k));
            const double e = std::abs(path.values[j][k] - reference(t));
            if (!std::isfinite(e))
                throw divergence_error("worst_case_error: reference non-finite at a node", j,
                                       static_cast<int>(k));
            worst = std::max(worst, e);
        }
    return worst;
}

/// Pairwise slopes log(e_i / e_{i+1}) / log(N_{i+1} / N_i); nullopt when a
/// zero error makes the slope undefined.
inline std::vector<std::optional<double>>
empirical_orders(const std::vector<std::pair<long, double>>& errors) {
    if (errors.size() < 2)
        throw std::invalid_argument("empirical_orders: need at least 2 entries");
    std::vector<std::optional<double>> out;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        const auto& [N0, e0] = errors[i];
        const auto& [N1, e1] = errors[i + 1];
        if (!(N1 > N0))
            throw std::invalid_argument("empirical_orders: N must be strictly increasing");
        if (e0 < 0.0 || e1 < 0.0)
            throw std::domain_error("empirical_orders: errors must be nonnegative");
        if (e0 == 0.0 || e1 == 0.0)
            out.push_back(std::nullopt);
        else
            out.push_back(std::log(e0 / e1) /
                          std::log(static_cast<double>(N1) / static_cast<double>(N0)));
    }
    return out;
}

/// Reference evaluator backed by a stored explicit-Euler run on the same
/// delay-aligned grid family; comparison nodes must coincide with oracle nodes
/// (decade ladders do, since each coarse grid divides the fine one).
class EulerOracle {
public:
    EulerOracle(const DdeProblem& p, int N) : path_(explicit_euler(p, N)) {}

    double operator()(double t) const {
        const double h = path_.h();
        int j = static_cast<int>(std::floor(t / path_.grid.t_cr + 1e-12));
        if (j >= path_.intervals())
            j = path_.intervals() - 1;
        const double local = t - j * path_.grid.t_cr;
        auto k = static_cast<long>(std::llround(local / h));
        const auto kmax = static_cast<long>(path_.values[j].size()) - 1;
        if (k > kmax) {
            if (j + 1 < path_.intervals())
                return path_.values[j + 1][0];
            k = kmax;
        }
        if (k < 0)
            k = 0;
        return path_.values[j][k];
    }

    const SolutionPath& path() const { return path_; }

private:
    SolutionPath path_;
};

struct ErrorRow {
    std::string case_label;
    std::string method;
    long N = 0;
    double error = 0.0;
    std::optional<double> order; // vs the previous row of the same method
};

struct ErrorReport {
    std::vector<ErrorRow> rows;
    double reference_tolerance = 0.0; // achieved bound of the analytic reference

    /// CSV `case,method,N,error,order`; undefined orders are left blank.
    void write_csv(std::ostream& os) const {
        os << "case,method,N,error,order\n";
        char buf[128];
        for (const auto& r : rows) {
            if (r.order)
                std::snprintf(buf, sizeof buf, "%s,%s,%ld,%.6e,%.4f\n", r.case_label.c_str(),
                              r.method.c_str(), r.N, r.error, *r.order);
            else
                std::snprintf(buf, sizeof buf, "%s,%s,%ld,%.6e,\n", r.case_label.c_str(),
                              r.method.c_str(), r.N, r.error);
            os << buf;
        }
    }

    /// Aligned-column text table.
    void write_table(std::ostream& os) const {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-6s %-16s %10s %14s %8s\n", "case", "method", "N",
                      "error", "order");
        os << buf;
        os << std::string(58, '-') << '\n';
        for (const auto& r : rows) {
            if (r.order)
                std::snprintf(buf, sizeof buf, "%-6s %-16s %10ld %14.6e %8.4f\n",
                              r.case_label.c_str(), r.method.c_str(), r.N, r.error, *r.order);
            else
                std::snprintf(buf, sizeof buf, "%-6s %-16s %10ld %14.6e %8s\n",
                              r.case_label.c_str(), r.method.c_str(), r.N, r.error, "-");
            os << buf;
        }
    }
};

/// Reference evaluator for a test case: the analytic recursion where it is
/// trusted, the N_oracle explicit-Euler run otherwise.
inline std::function<double(double)> case_reference(const TestCase& tc, int N_oracle = 1000000,
                                                    double* achieved_tol = nullptr) {
    if (tc.analytic_reference) {
        auto sol = std::make_shared<AnalyticSolution>(tc.model, tc.horizon_intervals);
        if (achieved_tol)
            *achieved_tol = sol->achieved_tolerance(tc.horizon_intervals);
        return [sol](double t) { return (*sol)(t); };
    }
    const double tcr = t_cr_constant(tc.model);
    auto oracle = std::make_shared<EulerOracle>(make_problem(tc.model, tc.horizon_intervals * tcr),
                                                N_oracle);
    if (achieved_tol)
        *achieved_tol = tcr / N_oracle; // first-order step size as a crude scale
    return [oracle](double t) { return (*oracle)(t); };
}

/// Worst-case error table for one case over a method set and an N ladder.
/// Independent (method, N) solves run concurrently; assembly is sequential.
inline ErrorReport run_case(const TestCase& tc, const std::vector<Method>& methods,
                            const std::vector<long>& Ns, int N_oracle = 1000000) {
    if (methods.empty())
        throw std::invalid_argument("run_case: method list must not be empty");
    if (Ns.empty())
        throw std::invalid_argument("run_case: N ladder must not be empty");
    for (std::size_t i = 1; i < Ns.size(); ++i)
        if (!(Ns[i] > Ns[i - 1]))
            throw std::invalid_argument("run_case: N ladder must be strictly increasing");

    const double tcr = t_cr_constant(tc.model);
    const DdeProblem p = make_problem(tc.model, tc.horizon_intervals * tcr);
    ErrorReport report;
    auto reference = case_reference(tc, N_oracle, &report.reference_tolerance);

    std::vector<std::future<double>> jobs;
    jobs.reserve(methods.size() * Ns.size());
    for (Method m : methods)
        for (long N : Ns)
            jobs.push_back(std::async(std::launch::async, [&p, &reference, m, N] {
                return worst_case_error(solve(p, m, static_cast<int>(N)), reference);
            }));

    std::size_t idx = 0;
    for (Method m : methods) {
        std::vector<std::pair<long, double>> errs;
        for (long N : Ns)
            errs.emplace_back(N, jobs[idx++].get());
        const auto orders = errs.size() >= 2 ? empirical_orders(errs)
                                             : std::vector<std::optional<double>>{};
        for (std::size_t i = 0; i < errs.size(); ++i) {
            ErrorRow row{tc.label, method_name(m), errs[i].first, errs[i].second, std::nullopt};
            if (i > 0)
                row.order = orders[i - 1];
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

enum class StabilityClass { MonotoneSaturating, DampedOscillatory, GrowingOscillatory };

inline const char* stability_name(StabilityClass c) {
    switch (c) {
    case StabilityClass::MonotoneSaturating:
        return "monotone-saturating";
    case StabilityClass::DampedOscillatory:
        return "damped-oscillatory";
    case StabilityClass::GrowingOscillatory:
        return "growing-oscillatory";
    }
    return "?";
}

namespace detail {

/// Positive steady state of A1 = A2 y + A3 y^(a8+1), bracketed in [0, A1/A2].
inline double steady_state(const ConstantModel& m) {
    auto g = [&m](double y) { return m.A1 - m.A2 * y - m.A3 * std::pow(y, m.a8 + 1.0); };
    double lo = 0.0, hi = m.saturation();
    for (int it = 0; it < 200 && hi - lo > 1e-14 * m.saturation(); ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

struct StabilityEntry {
    double A3 = 0.0;
    StabilityClass cls = StabilityClass::MonotoneSaturating;
    int sign_changes = 0;
    double growth_factor = 0.0; // last-vs-earlier amplitude trend, 0 if too few extrema
    double min_value = 0.0;
};

/// Classify the long-run behavior of the path around the steady state y*.
/// Raw pointwise extrema on a discrete path are noisy, so the path is
/// segmented at sign changes of (y - y*) and one amplitude (max deviation) is
/// taken per segment; the first (approach) and last (truncated) segments are
/// dropped. Growth over the trailing amplitudes above 1.05, or a genuine
/// negative excursion, marks the growing regime.
inline StabilityEntry classify_path(const SolutionPath& path, const ConstantModel& m) {
    const double ystar = detail::steady_state(m);
    StabilityEntry e;
    e.A3 = m.A3;
    e.min_value = m.rho0;

    std::vector<double> amplitudes;
    double seg_amp = 0.0;
    int prev_sign = 0;
    for (int j = 0; j < path.intervals(); ++j)
        for (std::size_t k = (j == 0) ? 0 : 1; k < path.values[j].size(); ++k) {
            const double y = path.values[j][k];
            e.min_value = std::min(e.min_value, y);
            const double dev = y - ystar;
            const int sign = (dev > 0.0) - (dev < 0.0);
            if (sign != 0 && prev_sign != 0 && sign != prev_sign) {
                ++e.sign_changes;
                amplitudes.push_back(seg_amp);
                seg_amp = 0.0;
            }
            if (sign != 0)
                prev_sign = sign;
            seg_amp = std::max(seg_amp, std::abs(dev));
        }
    // the running segment (truncated by the horizon) is intentionally dropped;
    // amplitudes[0] is the initial approach and is dropped below

    const bool negative_excursion = e.min_value < -1e-3 * ystar;
    if (e.sign_changes < 2 && !negative_excursion) {
        e.cls = StabilityClass::MonotoneSaturating;
        return e;
    }
    if (amplitudes.size() > 1)
        amplitudes.erase(amplitudes.begin());
    const std::size_t n = amplitudes.size();
    if (n >= 2) {
        const std::size_t first = (n >= 4) ? n - 4 : 0;
        e.growth_factor = amplitudes[n - 1] / amplitudes[first];
    }
    e.cls = (e.growth_factor > 1.05 || negative_excursion) ? StabilityClass::GrowingOscillatory
                                                           : StabilityClass::DampedOscillatory;
    return e;
}

/// Sweep A3 and classify each resulting path (explicit Euler, N per interval,
/// 10-interval horizon).
inline std::vector<StabilityEntry> stability_scan(const ConstantModel& base,
                                                  const std::vector<double>& A3_values, int N,
                                                  int intervals = 10) {
    std::vector<StabilityEntry> out;
    out.reserve(A3_values.size());
    for (double A3 : A3_values) {
        ConstantModel m = base;
        m.A3 = A3;
        m.validate();
        const SolutionPath path =
            explicit_euler(make_problem(m, intervals * t_cr_constant(m)), N);
        out.push_back(classify_path(path, m));
    }
    return out;
}

/// Max |analytic - oracle| sampled over the analytic validity window.
/// Used to cross-validate the two reference sources against each other.
inline double oracle_cross_check(const TestCase& tc, int N_oracle = 1000000,
                                 int samples = 2000) {
    if (!tc.analytic_reference)
        throw std::invalid_argument("oracle_cross_check: case has no analytic reference");
    const AnalyticSolution sol(tc.model, tc.horizon_intervals);
    const double horizon = tc.horizon_intervals * sol.t_cr();
    const EulerOracle oracle(make_problem(tc.model, horizon), N_oracle);
    double worst = 0.0;
    const long stride = std::max(1L, static_cast<long>(N_oracle) * tc.horizon_intervals / samples);
    for (int j = 0; j < oracle.path().intervals(); ++j)
        for (std::size_t k = 0; k < oracle.path().values[j].size();
             k += static_cast<std::size_t>(stride)) {
            const double t = oracle.path().node_time(j, static_cast<int>(k));
            worst = std::max(worst, std::abs(sol(t) - oracle.path().values[j][k]));
        }
    return worst;
}

} // namespace dislo
