#pragma once

#include <cmath>
#include <concepts>
#include <string>

#include "dislo/errors.hpp"

namespace dislo {

struct QuadratureConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_depth = 50;

    void validate() const {
        if (abs_tol <= 0.0 || rel_tol <= 0.0)
            throw std::domain_error("quadrature tolerances must be positive");
        if (max_depth < 1)
            throw std::domain_error("quadrature max_depth must be >= 1");
    }
};

struct QuadratureResult {
    double value = 0.0;
    double error_bound = 0.0; // Richardson-based running estimate
    bool converged = true;    // false if any panel hit max_depth
};

namespace detail {

template <std::invocable<double> F>
void adaptive_simpson(F& f, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth, const QuadratureConfig& cfg,
                      QuadratureResult& out) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    if (lm <= a || rm <= m) { // interval at floating-point resolution
        out.value += whole;
        return;
    }
    const double flm = f(lm);
    const double frm = f(rm);
    const double h6 = (b - a) / 12.0;
    const double left = h6 * (fa + 4.0 * flm + fm);
    const double right = h6 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const double richardson = delta / 15.0;
    if (std::abs(delta) <= 15.0 * tol || depth >= cfg.max_depth) {
        out.value += left + right + richardson;
        out.error_bound += std::abs(richardson);
        if (std::abs(delta) > 15.0 * tol)
            out.converged = false;
        return;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, cfg, out);
    adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, cfg, out);
}

} // namespace detail

/// Adaptive Simpson with recursive bisection and Richardson error estimate.
template <std::invocable<double> F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureConfig& cfg = {}) {
    cfg.validate();
    QuadratureResult out;
    if (a == b)
        return out;
    const double sign = (b >= a) ? 1.0 : -1.0;
    if (sign < 0.0)
        std::swap(a, b);
    const double fa = f(a);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(whole));
    detail::adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 0, cfg, out);
    out.value *= sign;
    return out;
}

/// Like integrate() but throws accuracy_error if the tolerance was not met.
template <std::invocable<double> F>
double integrate_checked(F&& f, double a, double b, const QuadratureConfig& cfg = {}) {
    QuadratureResult r = integrate(std::forward<F>(f), a, b, cfg);
    if (!r.converged)
        throw accuracy_error("adaptive Simpson failed to reach tolerance, achieved bound " +
                                 std::to_string(r.error_bound),
                             r.error_bound);
    return r.value;
}

} // namespace dislo
