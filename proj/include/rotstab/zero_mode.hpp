#pragma once

#include <tuple>

#include "rotstab/operators.hpp"
#include "rotstab/regime.hpp"

namespace rotstab {

enum class SemigroupSign { plus, minus };

inline void require_mean_free(const SpectralField& f, const char* who) {
    double scale = std::sqrt(f.coeff_l2_sq());
    for (int c = 0; c < f.n_components(); ++c)
        if (std::abs(f.at(c, 0, 0, 0)) > 1e-12 * std::max(scale, 1e-300))
            throw ContractViolation(std::string(who) + ": field must be mean-free");
}

/// Symmetrized zero-mode semigroup: multiplies each (xi, eta) mode by
/// exp(-+ i sqrt(B_beta) t eta/rho - nu t rho^2). Requires B_beta > 0 and a
/// mean-free k = 0 field.
inline SpectralField zero_mode_semigroup(const SpectralField& w_in, double t,
                                         SemigroupSign sign, const PhysicalParams& params) {
    double B = params.B_beta();
    if (B <= 0.0) throw RegimeError("zero_mode_semigroup: needs B_beta > 0");
    require_zero_mode_only(w_in, "zero_mode_semigroup");
    require_mean_free(w_in, "zero_mode_semigroup");
    double root_b = std::sqrt(B);
    double s = (sign == SemigroupSign::plus) ? -1.0 : 1.0;
    SpectralField out = w_in;
    for (int c = 0; c < out.n_components(); ++c)
        out.for_each_mode(c, [&](int, int, int, const Mode& m, Complex& v) {
            double rho2 = m.xi * m.xi + m.eta * m.eta;
            if (rho2 == 0.0) return;
            double rho = std::sqrt(rho2);
            double phase = s * root_b * t * m.eta / rho;
            v *= std::exp(Complex(-params.nu * t * rho2, phase));
        });
    return out;
}

/// upsilon_0 = (beta-1)/sqrt(B_beta) |grad|^{-1} (dz u0^2 - dy u0^3),
/// evaluated per mode as (beta-1)/sqrt(B_beta) (i eta u2 - i xi u3)/rho.
inline SpectralField upsilon0_from_u0(const SpectralField& u0, const PhysicalParams& params) {
    double B = params.B_beta();
    if (B <= 0.0) throw RegimeError("upsilon0: needs B_beta > 0");
    require_zero_mode_only(u0, "upsilon0");
    double pref = (params.beta - 1.0) / std::sqrt(B);
    SpectralField out(u0.grid(), 1);
    const GridSpec& g = u0.grid();
    for (int j = 0; j < g.ny; ++j)
        for (int l = 0; l < g.nz; ++l) {
            Mode m{0.0, g.ky(j), g.kz(l)};
            double rho = std::hypot(m.xi, m.eta);
            if (rho == 0.0) continue;
            Complex val = Complex(0.0, 1.0) *
                          (m.eta * u0.at(1, 0, j, l) - m.xi * u0.at(2, 0, j, l)) / rho;
            out.at(0, 0, j, l) = pref * val;
        }
    return out;
}

/// W^{+-} = u0^1 +- upsilon_0 as a pair of scalar fields.
inline std::pair<SpectralField, SpectralField> wpm_from_u0(const SpectralField& u0,
                                                           const PhysicalParams& params) {
    SpectralField ups = upsilon0_from_u0(u0, params);
    SpectralField wp(u0.grid(), 1), wm(u0.grid(), 1);
    const GridSpec& g = u0.grid();
    for (int j = 0; j < g.ny; ++j)
        for (int l = 0; l < g.nz; ++l) {
            Complex u1 = u0.at(0, 0, j, l), up = ups.at(0, 0, j, l);
            wp.at(0, 0, j, l) = u1 + up;
            wm.at(0, 0, j, l) = u1 - up;
        }
    return {wp, wm};
}

/// Inverse of wpm_from_u0: u0^1 = (W^+ + W^-)/2, upsilon_0 = (W^+ - W^-)/2,
/// u0^2 = -beta/sqrt(B) R3 upsilon_0, u0^3 = beta/sqrt(B) R2 upsilon_0.
inline SpectralField u0_from_wpm(const SpectralField& wp, const SpectralField& wm,
                                 const PhysicalParams& params) {
    double B = params.B_beta();
    if (B <= 0.0) throw RegimeError("u0_from_wpm: needs B_beta > 0");
    double pref = params.beta / std::sqrt(B);
    SpectralField u0(wp.grid(), 3);
    const GridSpec& g = wp.grid();
    for (int j = 0; j < g.ny; ++j)
        for (int l = 0; l < g.nz; ++l) {
            Mode m{0.0, g.ky(j), g.kz(l)};
            Complex a = wp.at(0, 0, j, l), b = wm.at(0, 0, j, l);
            Complex u1 = 0.5 * (a + b), ups = 0.5 * (a - b);
            u0.at(0, 0, j, l) = u1;
            double rho = std::hypot(m.xi, m.eta);
            if (rho == 0.0) continue;
            u0.at(1, 0, j, l) = -pref * Complex(0.0, m.eta / rho) * ups;
            u0.at(2, 0, j, l) = pref * Complex(0.0, m.xi / rho) * ups;
        }
    return u0;
}

/// Exact per-mode propagator of the linearized zero-mode system for any
/// regime: the reduced unknowns (u1, psi) with (u2, u3) = psi (eta, -xi)/rho
/// evolve by the autonomous 2x2 matrix [[0, -(1-beta) eta/rho],
/// [-beta eta/rho, 0]] minus nu rho^2, integrated by its closed-form
/// exponential (trigonometric, hyperbolic, or nilpotent by the sign of
/// B_beta).
inline void zero_mode_mode_solution(Complex u1_0, Complex psi_0, double eta_over_rho,
                                    double rho2, const PhysicalParams& params, double t,
                                    Complex& u1, Complex& psi) {
    double beta = params.beta;
    double mu = beta * (1.0 - beta) * eta_over_rho * eta_over_rho;  // = -B_beta (eta/rho)^2
    double c, s_over;  // cosh-like and sinh(x)/x-like entries of exp(Mt)
    if (mu > 0.0) {
        double lam = std::sqrt(mu);
        c = std::cosh(lam * t);
        s_over = (lam * t == 0.0) ? t : std::sinh(lam * t) / lam;
    } else if (mu < 0.0) {
        double om = std::sqrt(-mu);
        c = std::cos(om * t);
        s_over = (om * t == 0.0) ? t : std::sin(om * t) / om;
    } else {
        c = 1.0;
        s_over = t;
    }
    double m01 = -(1.0 - beta) * eta_over_rho;
    double m10 = -beta * eta_over_rho;
    double heat = std::exp(-params.nu * rho2 * t);
    u1 = heat * (c * u1_0 + s_over * m01 * psi_0);
    psi = heat * (s_over * m10 * u1_0 + c * psi_0);
}

/// Exact linearized zero-mode trajectory at the requested sample times.
/// For B_beta > 0 the solution is reconstructed through the W^{+-} route;
/// otherwise each mode uses the 2x2 exponential above.
inline std::vector<SpectralField> zero_mode_linear_solve(const SpectralField& u0_in,
                                                         const std::vector<double>& t_samples,
                                                         const PhysicalParams& params) {
    require_zero_mode_only(u0_in, "zero_mode_linear_solve");
    if (u0_in.n_components() != 3)
        throw ContractViolation("zero_mode_linear_solve: needs 3 components");
    const GridSpec& g = u0_in.grid();
    // Solenoidal input check: xi u2 + eta u3 = 0.
    double scale = std::sqrt(u0_in.coeff_l2_sq());
    for (int j = 0; j < g.ny; ++j)
        for (int l = 0; l < g.nz; ++l) {
            Mode m{0.0, g.ky(j), g.kz(l)};
            Complex d = m.xi * u0_in.at(1, 0, j, l) + m.eta * u0_in.at(2, 0, j, l);
            if (std::abs(d) > 1e-10 * std::max(scale, 1e-300))
                throw ContractViolation("zero_mode_linear_solve: input not solenoidal");
        }

    std::vector<SpectralField> out;
    out.reserve(t_samples.size());
    bool dispersive = params.B_beta() > 0.0;
    SpectralField wp0(g, 1), wm0(g, 1);
    if (dispersive) std::tie(wp0, wm0) = wpm_from_u0(u0_in, params);
    for (double t : t_samples) {
        if (dispersive) {
            SpectralField wp_t = zero_mode_semigroup(wp0, t, SemigroupSign::plus, params);
            SpectralField wm_t = zero_mode_semigroup(wm0, t, SemigroupSign::minus, params);
            out.push_back(u0_from_wpm(wp_t, wm_t, params));
        } else {
            SpectralField u(g, 3);
            for (int j = 0; j < g.ny; ++j)
                for (int l = 0; l < g.nz; ++l) {
                    Mode m{0.0, g.ky(j), g.kz(l)};
                    double rho2 = m.xi * m.xi + m.eta * m.eta;
                    if (rho2 == 0.0) {
                        for (int c = 0; c < 3; ++c) u.at(c, 0, j, l) = u0_in.at(c, 0, j, l);
                        continue;
                    }
                    double rho = std::sqrt(rho2);
                    Complex u2 = u0_in.at(1, 0, j, l), u3 = u0_in.at(2, 0, j, l);
                    Complex psi0 = (m.eta * u2 - m.xi * u3) / rho;
                    Complex u1, psi;
                    zero_mode_mode_solution(u0_in.at(0, 0, j, l), psi0, m.eta / rho, rho2,
                                            params, t, u1, psi);
                    u.at(0, 0, j, l) = u1;
                    u.at(1, 0, j, l) = psi * (m.eta / rho);
                    u.at(2, 0, j, l) = psi * (-m.xi / rho);
                }
            out.push_back(std::move(u));
        }
    }
    return out;
}

}  // namespace rotstab
