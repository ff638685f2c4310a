#pragma once

#include <stdexcept>
#include <string>

namespace dislo {

/// Requested tolerance could not be met; carries the achieved bound.
class accuracy_error : public std::runtime_error {
public:
    accuracy_error(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_bound_(achieved) {}
    double achieved_bound() const { return achieved_bound_; }

private:
    double achieved_bound_;
};

/// A numerical method produced a non-finite value.
class divergence_error : public std::runtime_error {
public:
    divergence_error(const std::string& what, int interval, int step)
        : std::runtime_error(what), interval_(interval), step_(step) {}
    int interval() const { return interval_; }
    int step() const { return step_; }

private:
    int interval_;
    int step_;
};

/// A nonlinear solve (implicit step, root find) failed to converge.
class solver_error : public std::runtime_error {
public:
    solver_error(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double last_residual() const { return residual_; }

private:
    double residual_;
};

/// Malformed input file (track CSV, preset file).
class format_error : public std::runtime_error {
public:
    explicit format_error(const std::string& what, long row = -1)
        : std::runtime_error(what), row_(row) {}
    long row() const { return row_; }

private:
    long row_;
};

} // namespace dislo
