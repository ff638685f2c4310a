#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dislo/coefficients.hpp"
#include "dislo/errors.hpp"

namespace dislo {

/// General delay problem z'(t) = f(t, z(t), z(t - t_cr)) with constant
/// pre-history z(t) = eta on [-t_cr, 0].
struct DdeProblem {
    std::function<double(double t, double y, double z)> rhs;
    double t_cr = 0;
    double eta = 0;
    double horizon = 0; // solve on [0, horizon]

    void validate() const {
        if (!rhs)
            throw std::invalid_argument("DdeProblem: rhs not set");
        if (!(t_cr > 0.0))
            throw std::domain_error("DdeProblem: t_cr must be positive");
        if (!(horizon > 0.0))
            throw std::domain_error("DdeProblem: horizon must be positive");
    }
};

/// Delay-aligned grid t_k^j = j t_cr + k h with h = t_cr / N.
struct DelayGrid {
    int N = 0;
    double t_cr = 0;

    double h() const { return t_cr / N; }
    double node(int j, int k) const { return j * t_cr + k * h(); }
};

enum class Method { ExplicitEuler, BackwardEuler, RK4 };

inline const char* method_name(Method m) {
    switch (m) {
    case Method::ExplicitEuler:
        return "explicit-euler";
    case Method::BackwardEuler:
        return "backward-euler";
    case Method::RK4:
        return "rk4";
    }
    return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
    if (s == "explicit-euler" || s == "euler")
        return Method::ExplicitEuler;
    if (s == "backward-euler" || s == "beuler")
        return Method::BackwardEuler;
    if (s == "rk4")
        return Method::RK4;
    return std::nullopt;
}

/// Numerical solution on the delay-aligned grid. values[j][k] holds y_k^j;
/// derivs[j][k] holds the field evaluated at that node (used for dense
/// output). The last interval may be partial when the horizon is not an
/// integer multiple of t_cr.
struct SolutionPath {
    DelayGrid grid;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> derivs;
    std::string method;
    bool went_negative = false;
    bool exceeded_bound = false;

    int intervals() const { return static_cast<int>(values.size()); }
    double h() const { return grid.h(); }

    double value(int j, int k) const { return values[j][k]; }
    double node_time(int j, int k) const { return grid.node(j, k); }
    double final_time() const {
        const int j = intervals() - 1;
        return grid.node(j, static_cast<int>(values[j].size()) - 1);
    }

    /// Dense evaluation by cubic Hermite on the step containing t.
    double eval(double t) const {
        if (t <= 0.0)
            return values[0][0];
        int j = static_cast<int>(std::floor(t / grid.t_cr));
        if (j >= intervals())
            j = intervals() - 1;
        const double hh = h();
        double local = t - j * grid.t_cr;
        int k = static_cast<int>(std::floor(local / hh));
        const int kmax = static_cast<int>(values[j].size()) - 2;
        if (k > kmax) {
            if (j + 1 < intervals()) { // roundoff pushed us past a joint
                ++j;
                local = t - j * grid.t_cr;
                k = 0;
            } else {
                k = kmax;
            }
        }
        const double u = local / hh - k;
        const double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * values[j][k] + (u3 - 2 * u2 + u) * hh * derivs[j][k] +
               (-2 * u3 + 3 * u2) * values[j][k + 1] + (u3 - u2) * hh * derivs[j][k + 1];
    }

    /// CSV export `j,k,t,y` with 17 significant digits. Joint nodes are not
    /// duplicated: y_0^j (= y_N^{j-1}) is emitted once, with interval j-1.
    void write_csv(std::ostream& os) const {
        os << "j,k,t,y\n";
        char buf[64];
        for (int j = 0; j < intervals(); ++j)
            for (std::size_t k = (j == 0) ? 0 : 1; k < values[j].size(); ++k) {
                std::snprintf(buf, sizeof buf, "%d,%zu,%.17g,%.17g\n", j, k,
                              node_time(j, static_cast<int>(k)), values[j][k]);
                os << buf;
            }
    }
};

namespace detail {

inline std::pair<int, int> interval_layout(const DdeProblem& p, int N, int j) {
    // number of intervals and steps in interval j (last may be truncated)
    const double ratio = p.horizon / p.t_cr;
    const int n_int = static_cast<int>(std::ceil(ratio - 1e-9));
    if (j < 0)
        return {n_int, 0};
    if (j < n_int - 1)
        return {n_int, N};
    const double rem = p.horizon - (n_int - 1) * p.t_cr;
    int k = static_cast<int>(std::floor(rem / (p.t_cr / N) + 1e-9));
    if (k < 1)
        k = 1;
    if (k > N)
        k = N;
    return {n_int, k};
}

inline void check_finite(double y, int j, int k, const char* method) {
    if (!std::isfinite(y))
        throw divergence_error(std::string(method) + " produced a non-finite value at (j=" +
                                   std::to_string(j) + ", k=" + std::to_string(k) + ")",
                               j, k);
}

} // namespace detail

/// Explicit Euler on the delay-aligned grid. Delayed values are read exactly
/// from the stored previous interval; no interpolation is ever performed.
inline SolutionPath explicit_euler(const DdeProblem& p, int N) {
    p.validate();
    if (N < 1)
        throw std::domain_error("explicit_euler: N must be >= 1");
    const auto [n_int, last_k] = detail::interval_layout(p, N, -1);
    SolutionPath path;
    path.grid = {N, p.t_cr};
    path.method = method_name(Method::ExplicitEuler);
    const double h = path.h();
    double y = p.eta;
    for (int j = 0; j < n_int; ++j) {
        const int K = detail::interval_layout(p, N, j).second;
        std::vector<double> vals(K + 1), ders(K + 1);
        vals[0] = y;
        for (int k = 0; k < K; ++k) {
            const double t = path.grid.node(j, k);
            const double z = (j == 0) ? p.eta : path.values[j - 1][k];
            const double f = p.rhs(t, y, z);
            ders[k] = f;
            y += h * f;
            detail::check_finite(y, j, k + 1, "explicit_euler");
            vals[k + 1] = y;
            if (y < 0.0)
                path.went_negative = true;
        }
        const double zK = (j == 0) ? p.eta : path.values[j - 1][K];
        ders[K] = p.rhs(path.grid.node(j, K), y, zK);
        path.values.push_back(std::move(vals));
        path.derivs.push_back(std::move(ders));
    }
    return path;
}

namespace detail {

/// Solve y = y_prev + h f(t, y, z) for y; f monotone nonincreasing in y makes
/// g(y) = y - y_prev - h f(t, y, z) increasing with a unique root. Safeguarded
/// Newton (secant slope) falling back to bisection on an expanded bracket.
inline double implicit_euler_step(const DdeProblem& p, double t, double y_prev, double z,
                                  double h, double tol, int max_iter) {
    auto g = [&](double y) { return y - y_prev - h * p.rhs(t, y, z); };
    const double f0 = p.rhs(t, y_prev, z);
    double radius = h * (std::abs(f0) + 1.0);
    double lo = y_prev - radius;
    double hi = y_prev + radius;
    for (int i = 0; g(lo) > 0.0; ++i) {
        if (i >= 100)
            throw solver_error("backward_euler: failed to bracket the implicit step", g(lo));
        radius *= 2.0;
        lo = y_prev - radius;
    }
    for (int i = 0; g(hi) < 0.0; ++i) {
        if (i >= 100)
            throw solver_error("backward_euler: failed to bracket the implicit step", g(hi));
        radius *= 2.0;
        hi = y_prev + radius;
    }
    double y = y_prev + h * f0; // explicit predictor
    if (y < lo || y > hi)
        y = 0.5 * (lo + hi);
    double gy = g(y);
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(gy) <= tol)
            return y;
        if (gy > 0.0)
            hi = y;
        else
            lo = y;
        const double delta = std::max(1e-8, 1e-8 * std::abs(y));
        const double slope = (g(y + delta) - gy) / delta;
        double y_next = (slope > 0.0) ? y - gy / slope : 0.5 * (lo + hi);
        if (!(y_next > lo && y_next < hi))
            y_next = 0.5 * (lo + hi);
        if (hi - lo <= 1e-16 * (std::abs(lo) + std::abs(hi)))
            return 0.5 * (lo + hi);
        y = y_next;
        gy = g(y);
    }
    if (std::abs(gy) <= tol)
        return y;
    throw solver_error("backward_euler: Newton/bisection did not converge", std::abs(gy));
}

} // namespace detail

/// Backward Euler with delayed values read from the previous interval's grid.
inline SolutionPath backward_euler(const DdeProblem& p, int N, double newton_tol = 1e-12,
                                   int max_iter = 100) {
    p.validate();
    if (N < 1)
        throw std::domain_error("backward_euler: N must be >= 1");
    const auto [n_int, last_k] = detail::interval_layout(p, N, -1);
    SolutionPath path;
    path.grid = {N, p.t_cr};
    path.method = method_name(Method::BackwardEuler);
    const double h = path.h();
    double y = p.eta;
    for (int j = 0; j < n_int; ++j) {
        const int K = detail::interval_layout(p, N, j).second;
        std::vector<double> vals(K + 1), ders(K + 1);
        vals[0] = y;
        ders[0] = p.rhs(path.grid.node(j, 0), y, (j == 0) ? p.eta : path.values[j - 1][0]);
        for (int k = 0; k < K; ++k) {
            const double t1 = path.grid.node(j, k + 1);
            // delayed value at the implicit node t_{k+1} - t_cr = t_{k+1}^{j-1}
            const double z = (j == 0) ? p.eta : path.values[j - 1][k + 1];
            y = detail::implicit_euler_step(p, t1, y, z, h, newton_tol, max_iter);
            detail::check_finite(y, j, k + 1, "backward_euler");
            vals[k + 1] = y;
            ders[k + 1] = p.rhs(t1, y, z);
            if (y < 0.0)
                path.went_negative = true;
        }
        path.values.push_back(std::move(vals));
        path.derivs.push_back(std::move(ders));
    }
    return path;
}

/// Classical RK4; delayed values at stage times come from the previous
/// interval's dense history via cubic Hermite over stored (value, derivative)
/// pairs. At j = 0 the delayed value is the constant eta.
inline SolutionPath rk4(const DdeProblem& p, int N) {
    p.validate();
    if (N < 1)
        throw std::domain_error("rk4: N must be >= 1");
    const auto [n_int, last_k] = detail::interval_layout(p, N, -1);
    SolutionPath path;
    path.grid = {N, p.t_cr};
    path.method = method_name(Method::RK4);
    const double h = path.h();

    auto history = [&](int j, double tau) -> double {
        // value at delayed time tau = t - t_cr, which lies in interval j-1
        if (j == 0)
            return p.eta;
        const auto& vals = path.values[j - 1];
        const auto& ders = path.derivs[j - 1];
        double local = tau - (j - 1) * p.t_cr;
        int k = static_cast<int>(std::floor(local / h + 1e-12));
        if (k < 0)
            k = 0;
        if (k > static_cast<int>(vals.size()) - 2)
            k = static_cast<int>(vals.size()) - 2;
        const double u = local / h - k;
        if (u <= 1e-12)
            return vals[k];
        if (u >= 1.0 - 1e-12)
            return vals[k + 1];
        const double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * vals[k] + (u3 - 2 * u2 + u) * h * ders[k] +
               (-2 * u3 + 3 * u2) * vals[k + 1] + (u3 - u2) * h * ders[k + 1];
    };

    double y = p.eta;
    for (int j = 0; j < n_int; ++j) {
        const int K = detail::interval_layout(p, N, j).second;
        std::vector<double> vals(K + 1), ders(K + 1);
        vals[0] = y;
        ders[0] = p.rhs(path.grid.node(j, 0), y, history(j, path.grid.node(j, 0) - p.t_cr));
        for (int k = 0; k < K; ++k) {
            const double t = path.grid.node(j, k);
            const double z0 = history(j, t - p.t_cr);
            const double zh = history(j, t + 0.5 * h - p.t_cr);
            const double z1 = history(j, t + h - p.t_cr);
            const double k1 = p.rhs(t, y, z0);
            const double k2 = p.rhs(t + 0.5 * h, y + 0.5 * h * k1, zh);
            const double k3 = p.rhs(t + 0.5 * h, y + 0.5 * h * k2, zh);
            const double k4 = p.rhs(t + h, y + h * k3, z1);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            detail::check_finite(y, j, k + 1, "rk4");
            vals[k + 1] = y;
            ders[k + 1] = p.rhs(t + h, y, z1);
            if (y < 0.0)
                path.went_negative = true;
        }
        path.values.push_back(std::move(vals));
        path.derivs.push_back(std::move(ders));
    }
    return path;
}

inline SolutionPath solve(const DdeProblem& p, Method m, int N) {
    switch (m) {
    case Method::ExplicitEuler:
        return explicit_euler(p, N);
    case Method::BackwardEuler:
        return backward_euler(p, N);
    case Method::RK4:
        return rk4(p, N);
    }
    throw std::invalid_argument("unknown method");
}

/// Flag path values outside [-slack, upper * (1 + slack/upper)]-style bounds.
inline void apply_bound_flags(SolutionPath& path, double upper, double slack) {
    for (const auto& iv : path.values)
        for (double y : iv)
            if (y < -slack || y > upper + slack)
                path.exceeded_bound = true;
}

/// Numerical detection of the first crossing rho(t) = rho_cr(t) for the
/// pre-recrystallization ODE rho' = A1 edot - A2 rho edot^(1-a9), by fixed-step
/// RK4 with bisection refinement on the bracketing step.
struct CrossingResult {
    double t_cr = 0;
    double rho = 0;
};

inline std::optional<CrossingResult> detect_t_cr(const CoefficientTrack& track, double rho0,
                                                 double a9, double step_hint, double horizon) {
    if (!(step_hint > 0.0) || !(horizon > 0.0))
        throw std::domain_error("detect_t_cr: step_hint and horizon must be positive");
    auto f = [&](double t, double y) {
        const CoefficientSet c = track.at(t);
        const double ed = c.eps_dot;
        const double pw = (ed == 0.0 && a9 == 1.0) ? 1.0 : std::pow(ed, 1.0 - a9);
        return c.A1 * ed - c.A2 * y * pw;
    };
    auto rk4_to = [&](double t0, double y0, double t1, int steps) {
        const double h = (t1 - t0) / steps;
        double y = y0;
        for (int i = 0; i < steps; ++i) {
            const double t = t0 + i * h;
            const double k1 = f(t, y);
            const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
            const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
            const double k4 = f(t + h, y + h * k3);
            y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        return y;
    };

    if (rho0 >= track.rho_cr(0.0))
        return CrossingResult{0.0, rho0};

    const auto n_steps = static_cast<long>(std::ceil(horizon / step_hint));
    const double h = horizon / static_cast<double>(n_steps);
    double t = 0.0, y = rho0;
    for (long i = 0; i < n_steps; ++i) {
        const double t1 = t + h;
        const double y1 = rk4_to(t, y, t1, 1);
        if (y1 >= track.rho_cr(t1)) {
            // refine the first crossing inside [t, t1]
            double lo = t, hi = t1;
            const double tol = 1e-13 * std::max(t1, 1.0);
            while (hi - lo > tol) {
                const double mid = 0.5 * (lo + hi);
                const double ym = rk4_to(t, y, mid, 4);
                (ym >= track.rho_cr(mid) ? hi : lo) = mid;
            }
            const double tc = 0.5 * (lo + hi);
            return CrossingResult{tc, rk4_to(t, y, tc, 4)};
        }
        t = t1;
        y = y1;
    }
    return std::nullopt;
}

/// Full-model right-hand side A1(t) edot - A2(t) y edot^(1-a9)
///   - A3(t) y^a8 z, with the delay term active strictly after t_cr.
/// a8 = 0 keeps the delay term linear in z; for a8 > 0 the density factor is
/// extended to negative y as sgn(y) |y|^a8 so the field stays defined there.
inline std::function<double(double, double, double)>
full_model_rhs(const CoefficientTrack& track, double a8, double a9, double t_cr) {
    return [track, a8, a9, t_cr](double t, double y, double z) {
        const CoefficientSet c = track.at(t);
        const double ed = c.eps_dot;
        const double pw = (ed == 0.0 && a9 == 1.0) ? 1.0 : std::pow(ed, 1.0 - a9);
        double v = c.A1 * ed - c.A2 * y * pw;
        if (t > t_cr) {
            const double sg = (y >= 0.0) ? 1.0 : -1.0;
            const double fac = (a8 == 0.0) ? 1.0 : sg * std::pow(std::abs(y), a8);
            v -= c.A3 * fac * z;
        }
        return v;
    };
}

struct FullModelResult {
    SolutionPath path;
    std::optional<double> t_cr;
};

/// Detect t_cr (unless supplied), then run the chosen method over the
/// delay-aligned grid up to the horizon.
inline FullModelResult solve_full_model(const CoefficientTrack& track, double a8, double a9,
                                        double rho0, double horizon, Method method,
                                        int N_per_interval,
                                        std::optional<double> t_cr = std::nullopt,
                                        double step_hint = 0.0) {
    if (!(horizon > 0.0))
        throw std::domain_error("solve_full_model: horizon must be positive");
    if (!t_cr) {
        const double hint = (step_hint > 0.0) ? step_hint : horizon / 100000.0;
        if (auto cr = detect_t_cr(track, rho0, a9, hint, horizon))
            t_cr = cr->t_cr;
    }
    FullModelResult out;
    if (t_cr && *t_cr <= 0.0)
        throw std::domain_error("solve_full_model: t_cr must be positive (rho0 >= rho_cr)");
    // Without a crossing the delay never activates; solve the plain ODE on
    // a single pseudo-interval of length horizon.
    const double delay = t_cr ? *t_cr : horizon;
    DdeProblem p;
    p.rhs = full_model_rhs(track, a8, a9, t_cr ? *t_cr : 2.0 * horizon);
    p.t_cr = delay;
    p.eta = rho0;
    p.horizon = horizon;
    out.path = solve(p, method, N_per_interval);
    out.t_cr = t_cr;
    const auto& b = track.bounds();
    const double ed_lo = b.eps_dot_lo, ed_hi = b.eps_dot_hi;
    const double denom = b.A2_lo * ((ed_lo == 0.0 && a9 == 1.0) ? 1.0 : std::pow(ed_lo, 1.0 - a9));
    if (denom > 0.0) {
        const double upper = b.A1_hi * ed_hi / denom;
        apply_bound_flags(out.path, upper, 10.0 * out.path.h() * std::max(1.0, upper));
    }
    return out;
}

} // namespace dislo
