#pragma once

#include <cmath>
#include <string>

#include "rotstab/errors.hpp"

namespace rotstab {

/// Viscosity and rotation rate, with the derived Bradshaw-Richardson number
/// B_beta = beta (beta - 1) that selects the zero-mode regime.
struct PhysicalParams {
    double nu = 1e-3;   // = Re^{-1}; 0 allowed for inviscid control runs
    double beta = 2.0;  // rotation rate

    void validate() const {
        if (nu < 0.0 || nu > 1.0) throw ConfigError("PhysicalParams: nu must lie in [0,1]");
    }

    double B_beta() const { return beta * (beta - 1.0); }

    /// sgn(beta) sqrt(B_beta); the (Q,W) coupling strength. Defined to be 0
    /// in the lift-up regime and rejected in the unstable one.
    double C_beta() const {
        double B = B_beta();
        if (B < 0.0) throw RegimeError("C_beta undefined for B_beta < 0");
        if (B == 0.0) return 0.0;
        return (beta > 0.0 ? 1.0 : -1.0) * std::sqrt(B);
    }

    /// sqrt(beta/(beta-1)), the prefactor of the W unknown. 0 when beta = 0;
    /// singular at beta = 1.
    double w_prefactor() const {
        if (beta == 0.0) return 0.0;
        double r = beta / (beta - 1.0);
        if (r < 0.0) throw RegimeError("W undefined for B_beta < 0");
        if (!std::isfinite(r)) throw RegimeError("W singular at beta = 1");
        return std::sqrt(r);
    }
};

enum class Regime { dispersive, liftup, exponentially_unstable };

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::dispersive: return "dispersive";
        case Regime::liftup: return "liftup";
        default: return "exponentially_unstable";
    }
}

/// Zero-mode regime taxonomy: dispersive for B_beta > 0, lift-up at
/// B_beta = 0, exponentially unstable for B_beta < 0.
struct RegimeReport {
    double B_beta = 0.0;
    Regime classification = Regime::liftup;

    /// Oscillation frequency (dispersive) per mode.
    double oscillation_frequency(double xi, double eta) const {
        double rho = std::hypot(xi, eta);
        return rho == 0.0 ? 0.0 : std::sqrt(B_beta) * std::abs(eta) / rho;
    }
    /// Growth rate (unstable) per mode.
    double growth_rate(double xi, double eta) const {
        double rho = std::hypot(xi, eta);
        return rho == 0.0 ? 0.0 : std::sqrt(-B_beta) * std::abs(eta) / rho;
    }
};

inline RegimeReport classify_regime(double beta) {
    RegimeReport r;
    r.B_beta = beta * (beta - 1.0);
    r.classification = r.B_beta > 0.0   ? Regime::dispersive
                       : r.B_beta < 0.0 ? Regime::exponentially_unstable
                                        : Regime::liftup;
    return r;
}

}  // namespace rotstab
