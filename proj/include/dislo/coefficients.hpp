#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dislo/errors.hpp"

namespace dislo {

inline constexpr double kGasConstant = 8.314; // J/(mol K)
inline constexpr double kCelsiusOffset = 273.15;

/// Full a1..a13, b, mu, Q, D parameter record for a material.
struct MaterialCoefficients {
    double a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0, a7 = 0;
    double a8 = 0, a9 = 0, a10 = 0, a11 = 0, a12 = 0, a13 = 0;
    double b = 0;  // Burgers vector length [m]
    double mu = 0; // shear modulus [MPa]
    double Q = 0;  // activation energy for deformation [J/mol]
    double D = 0;  // austenite grain size [m]

    void validate() const {
        if (a8 < 0.0 || a8 > 1.0 || a9 < 0.0 || a9 > 1.0)
            throw std::domain_error("a8 and a9 must lie in [0, 1]");
        if (!(b > 0.0) || !(mu > 0.0) || !(D > 0.0))
            throw std::domain_error("b, mu, D must be positive");
    }
};

/// Process variables at one instant.
struct ProcessState {
    double t = 0;       // [s]
    double T = 0;       // absolute temperature [K]
    double eps_dot = 0; // strain rate [1/s]
    double eps = 0;     // accumulated strain [-]
};

/// Z = eps_dot * exp(Q / (R T)).
inline double zener_hollomon(double eps_dot, double T, double Q) {
    if (!(T > 0.0))
        throw std::domain_error("zener_hollomon: temperature must be positive");
    if (eps_dot < 0.0)
        throw std::domain_error("zener_hollomon: strain rate must be nonnegative");
    return eps_dot * std::exp(Q / (kGasConstant * T));
}

/// Average free path for dislocations: a1 * Z^(-a13) when deforming, 0 otherwise.
inline double free_path(double eps_dot, double Z, double a1, double a13) {
    if (eps_dot == 0.0)
        return 0.0;
    if (!(Z > 0.0))
        throw std::domain_error("free_path: Z must be positive when eps_dot > 0");
    return a1 * std::pow(Z, -a13);
}

/// Hardening rate coefficient: 1/(b l) when deforming, 0 otherwise.
inline double coeff_A1(double b, double l, double eps_dot) {
    if (!(b > 0.0))
        throw std::domain_error("coeff_A1: b must be positive");
    if (eps_dot == 0.0)
        return 0.0;
    if (!(l > 0.0))
        throw std::domain_error("coeff_A1: l must be positive when eps_dot > 0");
    return 1.0 / (b * l);
}

/// Self-diffusion coefficient A2 = a2 exp(-a3 / (R T)).
inline double coeff_A2(double a2, double a3, double T) {
    if (!(T > 0.0))
        throw std::domain_error("coeff_A2: temperature must be positive");
    return a2 * std::exp(-a3 / (kGasConstant * T));
}

/// Grain boundary mobility A3 = a4 * mu b^2 / (2 D) * exp(-a5 / (R T)).
inline double coeff_A3(double a4, double a5, double mu, double b, double D, double T) {
    if (!(T > 0.0) || !(D > 0.0))
        throw std::domain_error("coeff_A3: T and D must be positive");
    return a4 * (mu * b * b) / (2.0 * D) * std::exp(-a5 / (kGasConstant * T));
}

/// Critical dislocation density rho_cr = a11 + a12 * Z^a10.
inline double rho_critical(double a10, double a11, double a12, double Z) {
    if (Z < 0.0)
        throw std::domain_error("rho_critical: Z must be nonnegative");
    if (a12 == 0.0)
        return a11;
    return a11 + a12 * std::pow(Z, a10);
}

/// Flow stress sigma_f = a7 + a6 * b * mu * sqrt(rho).
inline double flow_stress(double rho, double a6, double a7, double b, double mu) {
    if (rho < 0.0)
        throw std::domain_error("flow_stress: rho must be nonnegative");
    return a7 + a6 * b * mu * std::sqrt(rho);
}

/// One row of a flow-line track.
struct TrackSample {
    double t = 0;       // [s]
    double T = 0;       // [K]
    double eps_dot = 0; // [1/s]
};

/// Coefficient values at one instant along a track.
struct CoefficientSet {
    double A1 = 0, A2 = 0, A3 = 0;
    double eps_dot = 0;
    double T = 0;
    double rho_cr = 0;
};

/// Recorded [lo, hi] range of a coefficient over a track's domain.
struct CoefficientBounds {
    double A1_lo = 0, A1_hi = 0;
    double A2_lo = 0, A2_hi = 0;
    double A3_lo = 0, A3_hi = 0;
    double eps_dot_lo = 0, eps_dot_hi = 0;
};

/// Time-parametrized (A1, A2, A3, eps_dot, T, rho_cr) evaluator.
/// Immutable after construction; safe to share across concurrent solves.
class CoefficientTrack {
public:
    enum class Provenance { Constant, FormulaFromTrack, Tabulated };

    static CoefficientTrack constant(double A1, double A2, double A3, double eps_dot,
                                     double rho_cr, double T = 0.0) {
        CoefficientTrack tr;
        tr.provenance_ = Provenance::Constant;
        CoefficientSet s{A1, A2, A3, eps_dot, T, rho_cr};
        check_finite_nonnegative(s);
        tr.constant_ = s;
        tr.bounds_ = {A1, A1, A2, A2, A3, A3, eps_dot, eps_dot};
        return tr;
    }

    /// Piecewise-linear interpolation of (T, eps_dot), formulas applied pointwise.
    static CoefficientTrack from_samples(std::vector<TrackSample> samples,
                                         const MaterialCoefficients& mat) {
        if (samples.size() < 2)
            throw format_error("track needs at least 2 samples");
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (!(samples[i].t > samples[i - 1].t))
                throw format_error("track samples must be strictly increasing in t",
                                   static_cast<long>(i));
        mat.validate();
        CoefficientTrack tr;
        tr.provenance_ = Provenance::FormulaFromTrack;
        tr.samples_ = std::move(samples);
        tr.material_ = mat;
        tr.compute_bounds();
        return tr;
    }

    /// Directly tabulated coefficient rows, piecewise-linear in every field.
    static CoefficientTrack tabulated(std::vector<std::pair<double, CoefficientSet>> rows) {
        if (rows.size() < 2)
            throw format_error("tabulated track needs at least 2 rows");
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (!(rows[i].first > rows[i - 1].first))
                throw format_error("tabulated rows must be strictly increasing in t",
                                   static_cast<long>(i));
        CoefficientTrack tr;
        tr.provenance_ = Provenance::Tabulated;
        tr.rows_ = std::move(rows);
        for (const auto& [t, s] : tr.rows_)
            check_finite_nonnegative(s);
        tr.compute_bounds();
        return tr;
    }

    CoefficientSet at(double t) const {
        switch (provenance_) {
        case Provenance::Constant:
            return constant_;
        case Provenance::FormulaFromTrack: {
            const auto [T, ed] = interp_sample(t);
            return evaluate_formulas(T, ed);
        }
        case Provenance::Tabulated:
            return interp_row(t);
        }
        return constant_;
    }

    double A1(double t) const { return at(t).A1; }
    double A2(double t) const { return at(t).A2; }
    double A3(double t) const { return at(t).A3; }
    double eps_dot(double t) const { return at(t).eps_dot; }
    double temperature(double t) const { return at(t).T; }
    double rho_cr(double t) const { return at(t).rho_cr; }

    Provenance provenance() const { return provenance_; }
    const CoefficientBounds& bounds() const { return bounds_; }

    double t_min() const {
        if (provenance_ == Provenance::FormulaFromTrack)
            return samples_.front().t;
        if (provenance_ == Provenance::Tabulated)
            return rows_.front().first;
        return 0.0;
    }
    double t_max() const {
        if (provenance_ == Provenance::FormulaFromTrack)
            return samples_.back().t;
        if (provenance_ == Provenance::Tabulated)
            return rows_.back().first;
        return std::numeric_limits<double>::infinity();
    }

private:
    CoefficientTrack() = default;

    static void check_finite_nonnegative(const CoefficientSet& s) {
        for (double v : {s.A1, s.A2, s.A3, s.eps_dot, s.rho_cr})
            if (!std::isfinite(v) || v < 0.0)
                throw std::domain_error("coefficient track values must be finite and nonnegative");
    }

    // Linear interpolation of (T, eps_dot), clamped to the endpoint samples.
    std::pair<double, double> interp_sample(double t) const {
        if (t <= samples_.front().t)
            return {samples_.front().T, samples_.front().eps_dot};
        if (t >= samples_.back().t)
            return {samples_.back().T, samples_.back().eps_dot};
        auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                   [](double v, const TrackSample& s) { return v < s.t; });
        const TrackSample& hi = *it;
        const TrackSample& lo = *(it - 1);
        const double u = (t - lo.t) / (hi.t - lo.t);
        return {lo.T + u * (hi.T - lo.T), lo.eps_dot + u * (hi.eps_dot - lo.eps_dot)};
    }

    CoefficientSet evaluate_formulas(double T, double eps_dot) const {
        const MaterialCoefficients& m = material_;
        const double Z = zener_hollomon(eps_dot, T, m.Q);
        const double l = free_path(eps_dot, Z, m.a1, m.a13);
        CoefficientSet s;
        s.A1 = coeff_A1(m.b, l, eps_dot);
        s.A2 = coeff_A2(m.a2, m.a3, T);
        s.A3 = coeff_A3(m.a4, m.a5, m.mu, m.b, m.D, T);
        s.eps_dot = eps_dot;
        s.T = T;
        s.rho_cr = rho_critical(m.a10, m.a11, m.a12, Z);
        return s;
    }

    CoefficientSet interp_row(double t) const {
        if (t <= rows_.front().first)
            return rows_.front().second;
        if (t >= rows_.back().first)
            return rows_.back().second;
        auto it = std::upper_bound(
            rows_.begin(), rows_.end(), t,
            [](double v, const std::pair<double, CoefficientSet>& r) { return v < r.first; });
        const auto& [th, sh] = *it;
        const auto& [tl, sl] = *(it - 1);
        const double u = (t - tl) / (th - tl);
        auto lerp = [u](double a, double b) { return a + u * (b - a); };
        return {lerp(sl.A1, sh.A1),           lerp(sl.A2, sh.A2), lerp(sl.A3, sh.A3),
                lerp(sl.eps_dot, sh.eps_dot), lerp(sl.T, sh.T),   lerp(sl.rho_cr, sh.rho_cr)};
    }

    // Dense sampling within each segment; formulas of linearly interpolated
    // inputs are not segment-monotone in general.
    void compute_bounds() {
        auto lo = std::numeric_limits<double>::infinity();
        CoefficientBounds b{lo, -lo, lo, -lo, lo, -lo, lo, -lo};
        auto absorb = [&b](const CoefficientSet& s) {
            b.A1_lo = std::min(b.A1_lo, s.A1);
            b.A1_hi = std::max(b.A1_hi, s.A1);
            b.A2_lo = std::min(b.A2_lo, s.A2);
            b.A2_hi = std::max(b.A2_hi, s.A2);
            b.A3_lo = std::min(b.A3_lo, s.A3);
            b.A3_hi = std::max(b.A3_hi, s.A3);
            b.eps_dot_lo = std::min(b.eps_dot_lo, s.eps_dot);
            b.eps_dot_hi = std::max(b.eps_dot_hi, s.eps_dot);
        };
        const double t0 = t_min();
        const double t1 = (provenance_ == Provenance::FormulaFromTrack) ? samples_.back().t
                                                                        : rows_.back().first;
        constexpr int kScan = 16;
        const std::size_t nseg =
            (provenance_ == Provenance::FormulaFromTrack) ? samples_.size() - 1 : rows_.size() - 1;
        for (std::size_t i = 0; i <= nseg * kScan; ++i) {
            const double t = t0 + (t1 - t0) * static_cast<double>(i) /
                                      static_cast<double>(nseg * kScan);
            absorb(at(t));
        }
        bounds_ = b;
    }

    Provenance provenance_ = Provenance::Constant;
    CoefficientSet constant_{};
    std::vector<TrackSample> samples_;
    std::vector<std::pair<double, CoefficientSet>> rows_;
    MaterialCoefficients material_{};
    CoefficientBounds bounds_{};
};

/// Build a formula-driven track from a sample list (Kelvin temperatures).
inline CoefficientTrack track_from_samples(std::vector<TrackSample> samples,
                                           const MaterialCoefficients& mat) {
    return CoefficientTrack::from_samples(std::move(samples), mat);
}

/// Parse a track CSV with header `t,T_C,eps_dot` (seconds, Celsius, 1/s).
inline std::vector<TrackSample> read_track_csv(std::istream& in) {
    std::vector<TrackSample> out;
    std::string line;
    long row = 0;
    if (!std::getline(in, line))
        throw format_error("empty track file");
    auto strip = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t\r"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
        return s;
    };
    if (strip(line) != "t,T_C,eps_dot")
        throw format_error("track file must start with header 't,T_C,eps_dot'", 0);
    while (std::getline(in, line)) {
        ++row;
        if (strip(line).empty())
            continue;
        std::istringstream ss(line);
        std::string f1, f2, f3;
        if (!std::getline(ss, f1, ',') || !std::getline(ss, f2, ',') || !std::getline(ss, f3))
            throw format_error("track row has fewer than 3 fields", row);
        TrackSample s;
        try {
            s.t = std::stod(f1);
            s.T = std::stod(f2) + kCelsiusOffset;
            s.eps_dot = std::stod(f3);
        } catch (const std::exception&) {
            throw format_error("track row is not numeric", row);
        }
        if (!out.empty() && !(s.t > out.back().t))
            throw format_error("track rows must be strictly increasing in t", row);
        out.push_back(s);
    }
    if (out.size() < 2)
        throw format_error("track needs at least 2 rows");
    return out;
}

} // namespace dislo
