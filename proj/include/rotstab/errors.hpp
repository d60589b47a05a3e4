#pragma once

#include <stdexcept>
#include <string>

namespace rotstab {

/// Invalid grid, parameter, or configuration input.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// An operation was called outside its contract (wrong mode content,
/// wrong regime, non-solenoidal input, ...).
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Requested operation needs B_beta in a different sign regime.
class RegimeError : public ContractViolation {
public:
    explicit RegimeError(const std::string& what) : ContractViolation(what) {}
};

/// Quadrature or iteration failed to reach the requested tolerance.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// A time integration produced NaN/Inf; carries the last finite time.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double last_finite_time)
        : std::runtime_error(what), last_finite_time(last_finite_time) {}
    double last_finite_time;
};

/// Step rejected by the CFL bound; carries a usable step size.
class CflError : public std::runtime_error {
public:
    CflError(const std::string& what, double suggested_dt)
        : std::runtime_error(what), suggested_dt(suggested_dt) {}
    double suggested_dt;
};

/// Remap requested at a time that is not an integer xi-grid shift.
class SchedulingError : public std::runtime_error {
public:
    explicit SchedulingError(const std::string& what) : std::runtime_error(what) {}
};

/// Rate fit is impossible (degenerate data, window too short).
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

/// Bisection bracket endpoints classify identically.
class BracketError : public std::runtime_error {
public:
    explicit BracketError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rotstab
