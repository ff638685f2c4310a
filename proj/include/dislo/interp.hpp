#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dislo {

/// Cubic Hermite interpolant on a uniform grid, clamped outside [t0, t1].
class HermiteTable {
public:
    HermiteTable() = default;
    HermiteTable(double t0, double t1, std::vector<double> values, std::vector<double> derivs)
        : t0_(t0), t1_(t1), y_(std::move(values)), d_(std::move(derivs)) {
        if (y_.size() < 2 || y_.size() != d_.size())
            throw std::invalid_argument("HermiteTable needs >= 2 matching value/derivative nodes");
        if (!(t1_ > t0_))
            throw std::invalid_argument("HermiteTable needs t1 > t0");
        h_ = (t1_ - t0_) / static_cast<double>(y_.size() - 1);
    }

    double operator()(double t) const {
        auto [i, u] = locate(t);
        const double u2 = u * u;
        const double u3 = u2 * u;
        return (2.0 * u3 - 3.0 * u2 + 1.0) * y_[i] + (u3 - 2.0 * u2 + u) * h_ * d_[i] +
               (-2.0 * u3 + 3.0 * u2) * y_[i + 1] + (u3 - u2) * h_ * d_[i + 1];
    }

    double derivative(double t) const {
        auto [i, u] = locate(t);
        const double u2 = u * u;
        return ((6.0 * u2 - 6.0 * u) * y_[i] + (3.0 * u2 - 4.0 * u + 1.0) * h_ * d_[i] +
                (-6.0 * u2 + 6.0 * u) * y_[i + 1] + (3.0 * u2 - 2.0 * u) * h_ * d_[i + 1]) /
               h_;
    }

    std::size_t size() const { return y_.size(); }
    double t_begin() const { return t0_; }
    double t_end() const { return t1_; }
    double node_value(std::size_t i) const { return y_[i]; }
    bool empty() const { return y_.empty(); }

private:
    std::pair<std::size_t, double> locate(double t) const {
        if (t <= t0_)
            return {0, 0.0};
        if (t >= t1_)
            return {y_.size() - 2, 1.0};
        double s = (t - t0_) / h_;
        auto i = static_cast<std::size_t>(s);
        if (i > y_.size() - 2)
            i = y_.size() - 2;
        return {i, s - static_cast<double>(i)};
    }

    double t0_ = 0.0, t1_ = 1.0, h_ = 1.0;
    std::vector<double> y_, d_;
};

/// Compensated (Kahan) accumulator for long cumulative sums.
class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

} // namespace dislo
