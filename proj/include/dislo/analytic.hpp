#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dislo/coefficients.hpp"
#include "dislo/errors.hpp"
#include "dislo/interp.hpp"
#include "dislo/quadrature.hpp"

namespace dislo {

/// Simplified constant-coefficient model with unit strain rate.
struct ConstantModel {
    double A1 = 0, A2 = 0, A3 = 0;
    double a8 = 0;
    double rho0 = 0;
    double rho_cr = 0;

    double saturation() const { return A1 / A2; }
    double ratio() const { return A3 / A2; } // stability-assumption flag when < 1
    bool stable() const { return ratio() < 1.0; }

    void validate() const {
        if (!(A1 > 0.0) || !(A2 > 0.0) || A3 < 0.0)
            throw std::domain_error("ConstantModel: need A1 > 0, A2 > 0, A3 >= 0");
        if (a8 < 0.0 || a8 > 1.0)
            throw std::domain_error("ConstantModel: a8 must lie in [0, 1]");
        if (!(rho0 >= 0.0 && rho0 < rho_cr && rho_cr < saturation()))
            throw std::domain_error("ConstantModel: need 0 <= rho0 < rho_cr < A1/A2");
    }
};

/// Time to first reach rho_cr: (1/A2) ln((rho0 - A1/A2)/(rho_cr - A1/A2)).
inline double t_cr_constant(const ConstantModel& m) {
    m.validate();
    const double sat = m.saturation();
    return (1.0 / m.A2) * std::log((m.rho0 - sat) / (m.rho_cr - sat));
}

/// Pre-delay linear solution A1/A2 + (rho0 - A1/A2) exp(-A2 t) on [0, t_cr].
inline double phi0_constant(const ConstantModel& m, double t) {
    const double tcr = t_cr_constant(m);
    if (t < -1e-12 * tcr || t > tcr * (1.0 + 1e-12))
        throw std::domain_error("phi0_constant: t outside [0, t_cr]");
    const double sat = m.saturation();
    return sat + (m.rho0 - sat) * std::exp(-m.A2 * t);
}

struct AnalyticConfig {
    QuadratureConfig quad{};
    int nodes_per_interval = 4096;
};

namespace detail {

/// Tabulated solution of the linear ODE y' = -r(t) y + g(t), y(a) = y0, on [a, b].
/// y(t) = exp(-R(t)) (y0 + int_a^t exp(R(s)) g(s) ds), R(t) = int_a^t r.
/// The cumulative integrals are accumulated panel by panel with compensated
/// summation; R is interpolated inside a panel from its endpoint values and
/// the exact slopes r.
inline HermiteTable build_linear_interval(double a, double b, double y0,
                                          const std::function<double(double)>& r,
                                          const std::function<double(double)>& g, int nodes,
                                          const QuadratureConfig& quad, double& err_accum) {
    if (nodes < 2)
        throw std::invalid_argument("build_linear_interval: need >= 2 nodes");
    const int M = nodes - 1;
    const double h = (b - a) / M;
    QuadratureConfig panel = quad;
    panel.abs_tol = quad.abs_tol / M;

    std::vector<double> y(nodes), d(nodes);
    KahanSum R, J;
    double err = 0.0;
    double r_lo = r(a);
    y[0] = y0;
    d[0] = g(a) - r_lo * y0;
    for (int i = 0; i < M; ++i) {
        const double s0 = a + i * h;
        const double s1 = a + (i + 1) * h;
        const double R0 = R.value();
        const double r_hi = r(s1);
        const QuadratureResult dR = integrate(r, s0, s1, panel);
        R.add(dR.value);
        const double R1 = R.value();
        // local cubic Hermite of R inside the panel
        auto R_local = [&](double s) {
            const double u = (s - s0) / h;
            const double u2 = u * u, u3 = u2 * u;
            return (2 * u3 - 3 * u2 + 1) * R0 + (u3 - 2 * u2 + u) * h * r_lo +
                   (-2 * u3 + 3 * u2) * R1 + (u3 - u2) * h * r_hi;
        };
        const QuadratureResult dJ =
            integrate([&](double s) { return std::exp(R_local(s)) * g(s); }, s0, s1, panel);
        J.add(dJ.value);
        err += dJ.error_bound + dR.error_bound * (std::abs(y0) + std::abs(J.value()));
        const double expm = std::exp(-R1);
        y[i + 1] = expm * (y0 + J.value());
        d[i + 1] = g(s1) - r_hi * y[i + 1];
        r_lo = r_hi;
    }
    err_accum += err;
    return HermiteTable(a, b, std::move(y), std::move(d));
}

} // namespace detail

/// Method-of-steps (semi)analytic solution of the constant-coefficient DDE
///   rho' = A1 - A2 rho - A3 rho^a8 1_(t_cr,inf)(t) rho(t - t_cr)
/// for a8 in {0, 1}. Interval 0 uses the closed form; every later interval is
/// a quadrature-backed linear solve against the previous interval's evaluator.
/// Immutable after construction.
class AnalyticSolution {
public:
    AnalyticSolution(ConstantModel m, int intervals, AnalyticConfig cfg = {})
        : model_(m), cfg_(cfg) {
        m.validate();
        if (m.a8 != 0.0 && m.a8 != 1.0)
            throw std::invalid_argument("AnalyticSolution: a8 must be exactly 0 or 1");
        if (intervals < 0)
            throw std::invalid_argument("AnalyticSolution: intervals must be >= 0");
        tcr_ = t_cr_constant(m);
        tol_.push_back(0.0); // interval 0 is closed-form
        for (int n = 1; n <= intervals; ++n) {
            append_interval(n);
            intervals_ = n;
        }
    }

    double t_cr() const { return tcr_; }
    int intervals() const { return intervals_; }
    const ConstantModel& model() const { return model_; }

    /// rho(t) on [0, (intervals+1) t_cr]; joints are left-closed.
    double operator()(double t) const {
        if (t < 0.0)
            return model_.rho0;
        int n = static_cast<int>(std::floor(t / tcr_));
        if (n > intervals_ && t <= (intervals_ + 1) * tcr_ * (1.0 + 1e-12))
            n = intervals_;
        return value(n, t);
    }

    double value(int n, double t) const {
        if (n < 0 || n > intervals_)
            throw std::domain_error("AnalyticSolution: interval index out of range");
        if (n == 0) {
            const double sat = model_.saturation();
            return sat + (model_.rho0 - sat) * std::exp(-model_.A2 * std::min(t, tcr_));
        }
        return tables_[static_cast<std::size_t>(n) - 1](t);
    }

    /// Accumulated quadrature error bound for interval n.
    double achieved_tolerance(int n) const { return tol_.at(static_cast<std::size_t>(n)); }

    /// Delayed value rho(t - t_cr) with constant pre-history rho0.
    double delayed(double t) const {
        const double s = t - tcr_;
        return s < 0.0 ? model_.rho0 : (*this)(s);
    }

    /// The DDE right-hand side with the indicator inactive at t <= t_cr.
    /// a8 = 0 keeps the delay term linear; for a8 > 0 the density factor is
    /// extended to negative y as sgn(y) |y|^a8.
    double rhs(double t, double y, double z) const {
        double v = model_.A1 - model_.A2 * y;
        if (t > tcr_) {
            const double sg = (y >= 0.0) ? 1.0 : -1.0;
            const double fac =
                (model_.a8 == 0.0) ? 1.0 : sg * std::pow(std::abs(y), model_.a8);
            v -= model_.A3 * fac * z;
        }
        return v;
    }

private:
    void append_interval(int n) {
        const double a = n * tcr_;
        const double b = (n + 1) * tcr_;
        const double y0 = value(n - 1, a);
        // prev interval evaluator feeding the delayed argument
        auto prev = [this, n](double s) { return value(n - 1, s); };
        std::function<double(double)> r, g;
        if (model_.a8 == 0.0) {
            r = [this](double) { return model_.A2; };
            g = [this, prev](double s) { return model_.A1 - model_.A3 * prev(s - tcr_); };
        } else {
            r = [this, prev](double s) { return model_.A2 + model_.A3 * prev(s - tcr_); };
            g = [this](double) { return model_.A1; };
        }
        double err = tol_.back();
        tables_.push_back(detail::build_linear_interval(a, b, y0, r, g, cfg_.nodes_per_interval,
                                                        cfg_.quad, err));
        tol_.push_back(err);
    }

    ConstantModel model_;
    AnalyticConfig cfg_;
    double tcr_ = 0.0;
    int intervals_ = 0;
    std::vector<HermiteTable> tables_; // interval n at index n-1
    std::vector<double> tol_;
};

/// rho(t) of the a8 = 0 recursion on interval n.
inline double analytic_a8_0(ConstantModel m, int n, double t, const QuadratureConfig& q = {}) {
    m.a8 = 0.0;
    AnalyticConfig cfg;
    cfg.quad = q;
    return AnalyticSolution(m, n, cfg).value(n, t);
}

/// rho(t) of the a8 = 1 recursion on interval n. The usual working window
/// is [0, 2 t_cr]; deeper n is allowed explicitly.
inline double analytic_a8_1(ConstantModel m, int n, double t, const QuadratureConfig& q = {}) {
    m.a8 = 1.0;
    AnalyticConfig cfg;
    cfg.quad = q;
    return AnalyticSolution(m, n, cfg).value(n, t);
}

/// Identically-zero path of the degenerate Bernoulli case (A1 = 0, rho0 = 0).
struct ZeroPath {
    double operator()(double) const noexcept { return 0.0; }
};

inline ZeroPath bernoulli_degenerate_check(double A1, double rho0) {
    if (A1 != 0.0 || rho0 != 0.0)
        throw std::domain_error("bernoulli_degenerate_check: requires A1 = 0 and rho0 = 0");
    return ZeroPath{};
}

/// Pre-recrystallization solution with time-dependent coefficients:
///   rho(t) = exp(-int_0^t A2) (rho0 + int_0^t exp(int_0^s A2) A1(s) ds).
inline double phi0_timedep(const std::function<double(double)>& A1,
                           const std::function<double(double)>& A2, double rho0, double t,
                           const QuadratureConfig& q = {}, int nodes = 4096) {
    if (t < 0.0)
        throw std::domain_error("phi0_timedep: t must be >= 0");
    if (t == 0.0)
        return rho0;
    double err = 0.0;
    HermiteTable tab = detail::build_linear_interval(0.0, t, rho0, A2, A1, nodes, q, err);
    return tab(t);
}

/// Track overload; eps_dot is folded into the effective coefficients.
inline double phi0_timedep(const CoefficientTrack& track, double rho0, double t,
                           const QuadratureConfig& q = {}, double a9 = 0.0) {
    auto A1 = [&track](double s) { return track.A1(s) * track.eps_dot(s); };
    auto A2 = [&track, a9](double s) {
        const double ed = track.eps_dot(s);
        return track.A2(s) * (ed == 0.0 && a9 == 1.0 ? 1.0 : std::pow(ed, 1.0 - a9));
    };
    return phi0_timedep(A1, A2, rho0, t, q);
}

/// First time phi0 reaches rho_cr_fn, by bracket scan then bisection.
/// Returns nullopt when no crossing occurs within [0, horizon].
inline std::optional<double> t_cr_timedep(const std::function<double(double)>& A1,
                                          const std::function<double(double)>& A2, double rho0,
                                          const std::function<double(double)>& rho_cr_fn,
                                          double horizon, const QuadratureConfig& q = {},
                                          int nodes = 8192) {
    if (!(horizon > 0.0))
        throw std::domain_error("t_cr_timedep: horizon must be positive");
    if (rho0 >= rho_cr_fn(0.0))
        return 0.0;
    double err = 0.0;
    HermiteTable tab = detail::build_linear_interval(0.0, horizon, rho0, A2, A1, nodes, q, err);
    auto gap = [&](double t) { return tab(t) - rho_cr_fn(t); };
    const double h = horizon / nodes;
    double lo = 0.0;
    bool found = false;
    for (int i = 1; i <= nodes; ++i) {
        const double t = i * h;
        if (gap(t) >= 0.0) {
            lo = (i - 1) * h;
            found = true;
            break;
        }
    }
    if (!found)
        return std::nullopt;
    double hi = lo + h;
    const double tol = 1e-12 * horizon;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) >= 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

inline std::optional<double> t_cr_timedep(const CoefficientTrack& track, double rho0,
                                          const std::function<double(double)>& rho_cr_fn,
                                          double horizon, const QuadratureConfig& q = {},
                                          double a9 = 0.0) {
    auto A1 = [&track](double s) { return track.A1(s) * track.eps_dot(s); };
    auto A2 = [&track, a9](double s) {
        const double ed = track.eps_dot(s);
        return track.A2(s) * (ed == 0.0 && a9 == 1.0 ? 1.0 : std::pow(ed, 1.0 - a9));
    };
    return t_cr_timedep(A1, A2, rho0, rho_cr_fn, horizon, q);
}

/// Method-of-steps analytic recursion with time-dependent coefficients,
/// a8 in {0, 1}. The caller supplies t_cr (see t_cr_timedep).
class TimedepAnalytic {
public:
    using Fn = std::function<double(double)>;

    TimedepAnalytic(Fn A1, Fn A2, Fn A3, int a8, double rho0, double t_cr, int intervals,
                    AnalyticConfig cfg = {})
        : A1_(std::move(A1)), A2_(std::move(A2)), A3_(std::move(A3)), a8_(a8), rho0_(rho0),
          tcr_(t_cr), cfg_(cfg) {
        if (a8 != 0 && a8 != 1)
            throw std::invalid_argument("TimedepAnalytic: a8 must be 0 or 1");
        if (!(t_cr > 0.0))
            throw std::domain_error("TimedepAnalytic: t_cr must be positive");
        double err = 0.0;
        tables_.push_back(detail::build_linear_interval(0.0, tcr_, rho0_, A2_, A1_,
                                                        cfg_.nodes_per_interval, cfg_.quad, err));
        tol_.push_back(err);
        for (int n = 1; n <= intervals; ++n) {
            append_interval(n);
            intervals_ = n;
        }
    }

    TimedepAnalytic(const CoefficientTrack& track, int a8, double rho0, double t_cr,
                    int intervals, AnalyticConfig cfg = {}, double a9 = 0.0)
        : TimedepAnalytic(
              [track](double s) { return track.A1(s) * track.eps_dot(s); },
              [track, a9](double s) {
                  const double ed = track.eps_dot(s);
                  return track.A2(s) * (ed == 0.0 && a9 == 1.0 ? 1.0 : std::pow(ed, 1.0 - a9));
              },
              [track](double s) { return track.A3(s); }, a8, rho0, t_cr, intervals, cfg) {}

    double t_cr() const { return tcr_; }
    int intervals() const { return intervals_; }

    double operator()(double t) const {
        if (t < 0.0)
            return rho0_;
        int n = static_cast<int>(std::floor(t / tcr_));
        if (n > intervals_ && t <= (intervals_ + 1) * tcr_ * (1.0 + 1e-12))
            n = intervals_;
        return value(n, t);
    }

    double value(int n, double t) const {
        if (n < 0 || n > intervals_)
            throw std::domain_error("TimedepAnalytic: interval index out of range");
        return tables_[static_cast<std::size_t>(n)](t);
    }

    double achieved_tolerance(int n) const { return tol_.at(static_cast<std::size_t>(n)); }

    double delayed(double t) const {
        const double s = t - tcr_;
        return s < 0.0 ? rho0_ : (*this)(s);
    }

private:
    void append_interval(int n) {
        const double a = n * tcr_;
        const double b = (n + 1) * tcr_;
        const double y0 = value(n - 1, a);
        auto prev = [this, n](double s) { return value(n - 1, s); };
        std::function<double(double)> r, g;
        if (a8_ == 0) {
            r = A2_;
            g = [this, prev](double s) { return A1_(s) - A3_(s) * prev(s - tcr_); };
        } else {
            r = [this, prev](double s) { return A2_(s) + A3_(s) * prev(s - tcr_); };
            g = A1_;
        }
        double err = tol_.back();
        tables_.push_back(detail::build_linear_interval(a, b, y0, r, g, cfg_.nodes_per_interval,
                                                        cfg_.quad, err));
        tol_.push_back(err);
    }

    Fn A1_, A2_, A3_;
    int a8_;
    double rho0_;
    double tcr_;
    AnalyticConfig cfg_;
    int intervals_ = 0;
    std::vector<HermiteTable> tables_; // interval n at index n
    std::vector<double> tol_;
};

/// rho(t) of the time-dependent recursion on interval n, with rho_cr taken
/// from the track and t_cr found numerically.
inline double analytic_timedep(const CoefficientTrack& track, int a8, double rho0, int n,
                               double t, const QuadratureConfig& q = {}) {
    auto rc = [&track](double s) { return track.rho_cr(s); };
    const double horizon = std::isfinite(track.t_max()) ? track.t_max() : (t + 1.0);
    auto tcr = t_cr_timedep(track, rho0, rc, std::max(horizon, t), q);
    if (!tcr || *tcr == 0.0)
        throw std::domain_error("analytic_timedep: no positive t_cr within track horizon");
    AnalyticConfig cfg;
    cfg.quad = q;
    return TimedepAnalytic(track, a8, rho0, *tcr, n, cfg).value(n, t);
}

} // namespace dislo
