#pragma once

#include "rotstab/field.hpp"

namespace rotstab {

enum class Axis { X, YTilde, Z };
enum class RieszKind { R2, R3, R3Tilde };

/// Sheared-frame derivative: multiplies by ik, i(xi - k t), or i eta.
inline SpectralField tilde_derivative(const SpectralField& f, Axis axis, double t) {
    if (t < 0.0) throw ContractViolation("tilde_derivative: t must be >= 0");
    SpectralField out = f;
    for (int c = 0; c < out.n_components(); ++c)
        out.for_each_mode(c, [&](int, int, int, const Mode& m, Complex& v) {
            double sym = axis == Axis::X   ? m.k
                         : axis == Axis::Z ? m.eta
                                           : shear_tilt(m, t);
            v *= Complex(0.0, sym);
        });
    return out;
}

/// Good derivative (plain gradient in the moving frame): ik, i xi, i eta.
inline SpectralField good_derivative(const SpectralField& f, int axis) {
    SpectralField out = f;
    for (int c = 0; c < out.n_components(); ++c)
        out.for_each_mode(c, [&](int, int, int, const Mode& m, Complex& v) {
            double sym = axis == 0 ? m.k : axis == 1 ? m.xi : m.eta;
            v *= Complex(0.0, sym);
        });
    return out;
}

inline void require_zero_mode_only(const SpectralField& f, const char* who) {
    double scale = std::sqrt(f.coeff_l2_sq());
    if (f.max_nonzero_k_modulus() > 1e-12 * std::max(scale, 1e-300))
        throw ContractViolation(std::string(who) + ": field has nonzero k-content");
}

/// Riesz transforms on zero-in-x fields: i xi / rho, i eta / rho, |eta| / rho
/// with rho = sqrt(xi^2 + eta^2); the (0,0) mode maps to 0 by convention.
inline SpectralField riesz(const SpectralField& f, RieszKind which) {
    require_zero_mode_only(f, "riesz");
    SpectralField out = f;
    for (int c = 0; c < out.n_components(); ++c)
        out.for_each_mode(c, [&](int, int, int, const Mode& m, Complex& v) {
            double rho2 = m.xi * m.xi + m.eta * m.eta;
            if (rho2 == 0.0) {
                v = 0.0;
                return;
            }
            double rho = std::sqrt(rho2);
            switch (which) {
                case RieszKind::R2: v *= Complex(0.0, m.xi / rho); break;
                case RieszKind::R3: v *= Complex(0.0, m.eta / rho); break;
                case RieszKind::R3Tilde: v *= std::abs(m.eta) / rho; break;
            }
        });
    return out;
}

/// Leray projection in the sheared frame: U -> U - ktilde (ktilde.U)/|ktilde|^2
/// mode by mode, so that div_tilde of the output vanishes. The (0,0,0) mode
/// passes through unchanged.
inline SpectralField leray_project_tilde(const SpectralField& u, double t) {
    if (u.n_components() != 3)
        throw ContractViolation("leray_project_tilde: needs a 3-component field");
    SpectralField out = u;
    const GridSpec& g = u.grid();
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) {
                Mode m{g.kx(i), g.ky(j), g.kz(l)};
                double ty = shear_tilt(m, t);
                double p = m.k * m.k + ty * ty + m.eta * m.eta;
                if (p == 0.0) continue;
                Complex dot = m.k * out.at(0, i, j, l) + ty * out.at(1, i, j, l) +
                              m.eta * out.at(2, i, j, l);
                Complex s = dot / p;
                out.at(0, i, j, l) -= m.k * s;
                out.at(1, i, j, l) -= ty * s;
                out.at(2, i, j, l) -= m.eta * s;
            }
    return out;
}

/// Largest |ktilde . U| over modes (divergence residual in the moving frame).
inline double divergence_tilde_residual(const SpectralField& u, double t) {
    const GridSpec& g = u.grid();
    double worst = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) {
                Mode m{g.kx(i), g.ky(j), g.kz(l)};
                double ty = shear_tilt(m, t);
                Complex dot = m.k * u.at(0, i, j, l) + ty * u.at(1, i, j, l) +
                              m.eta * u.at(2, i, j, l);
                worst = std::max(worst, std::abs(dot));
            }
    return worst;
}

/// Zero all modes outside the retained dealiasing shell.
inline void dealias(SpectralField& f) {
    const GridSpec& g = f.grid();
    for (int c = 0; c < f.n_components(); ++c)
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                for (int l = 0; l < g.nz; ++l)
                    if (!g.retained(i, j, l)) f.at(c, i, j, l) = 0.0;
}

/// Restrict to zero modes (k = 0 slice kept, everything else zeroed).
inline SpectralField project_zero_modes(const SpectralField& f) {
    SpectralField out = f;
    const GridSpec& g = f.grid();
    for (int c = 0; c < f.n_components(); ++c)
        for (int i = 1; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                for (int l = 0; l < g.nz; ++l) out.at(c, i, j, l) = 0.0;
    return out;
}

/// Complement of project_zero_modes.
inline SpectralField project_nonzero_modes(const SpectralField& f) {
    SpectralField out = f;
    const GridSpec& g = f.grid();
    for (int c = 0; c < f.n_components(); ++c)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) out.at(c, 0, j, l) = 0.0;
    return out;
}

}  // namespace rotstab
