#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "rotstab/errors.hpp"

namespace rotstab {

inline constexpr double pi = std::numbers::pi;

/// Which product domain the periodic box stands in for.
/// T_R2_surrogate: T x R^2, both y and z unbounded and periodized.
/// T_R_T:          T x R x T, y periodized, z a genuine torus of length 2*pi.
enum class DomainKind { T_R2_surrogate, T_R_T };

inline std::string to_string(DomainKind d) {
    return d == DomainKind::T_R2_surrogate ? "T_R2_surrogate" : "T_R_T";
}

/// Periodic box and mode counts for spectral fields.
///
/// Wavenumbers are k in Z along x (L_x = 2*pi fixed), xi in (2*pi/L_y)*Z
/// along y, and eta in (2*pi/L_z)*Z along z (integers when z is a true
/// torus). N_x = 1 is allowed for fields with no x-dependence (zero modes).
struct GridSpec {
    DomainKind domain_kind = DomainKind::T_R2_surrogate;
    int nx = 64, ny = 64, nz = 32;
    double Lx = 2.0 * pi;
    double Ly = 4.0 * pi;
    double Lz = 4.0 * pi;
    double dealias_fraction = 2.0 / 3.0;

    void validate() const {
        auto even_or_one = [](int n) { return n == 1 || (n > 0 && n % 2 == 0); };
        if (!even_or_one(nx) || !even_or_one(ny) || !even_or_one(nz))
            throw ConfigError("GridSpec: mode counts must be even (or 1 for a dead axis)");
        if (std::abs(Lx - 2.0 * pi) > 1e-12)
            throw ConfigError("GridSpec: L_x must be 2*pi (x is the unit torus)");
        if (dealias_fraction <= 0.0 || dealias_fraction > 1.0)
            throw ConfigError("GridSpec: dealias_fraction must lie in (0,1]");
        if (Ly < 4.0 * pi - 1e-12)
            throw ConfigError("GridSpec: L_y >= 4*pi required to resolve low-frequency Riesz symbols");
        if (domain_kind == DomainKind::T_R2_surrogate) {
            if (Lz < 4.0 * pi - 1e-12)
                throw ConfigError("GridSpec: L_z >= 4*pi required on the T x R^2 surrogate");
        } else {
            if (std::abs(Lz - 2.0 * pi) > 1e-12)
                throw ConfigError("GridSpec: L_z must be 2*pi when z is a torus");
        }
    }

    std::size_t num_modes() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
               static_cast<std::size_t>(nz);
    }
    double volume() const { return Lx * Ly * Lz; }

    double dx() const { return Lx / nx; }
    double dy() const { return Ly / ny; }
    double dz() const { return Lz / nz; }

    /// FFT storage index -> signed integer frequency.
    static int signed_index(int i, int n) { return (i <= n / 2) ? i : i - n; }

    double kx(int i) const { return signed_index(i, nx); }                     // L_x = 2*pi
    double ky(int j) const { return (2.0 * pi / Ly) * signed_index(j, ny); }
    double kz(int l) const { return (2.0 * pi / Lz) * signed_index(l, nz); }

    /// Largest retained |signed index| on an axis. Clamped so that quadratic
    /// products of retained modes alias only onto discarded modes.
    int dealias_cut(int n) const {
        if (n == 1) return 0;
        int cut = static_cast<int>(std::floor(dealias_fraction * (n / 2) + 1e-9));
        if (dealias_fraction <= 2.0 / 3.0 + 1e-12) cut = std::min(cut, (n - 1) / 3);
        return cut;
    }
    bool retained(int i, int j, int l) const {
        return std::abs(signed_index(i, nx)) <= dealias_cut(nx) &&
               std::abs(signed_index(j, ny)) <= dealias_cut(ny) &&
               std::abs(signed_index(l, nz)) <= dealias_cut(nz);
    }

    /// Index of the mirror mode -k (for Hermitian symmetry checks).
    static int mirror(int i, int n) { return (n - i) % n; }

    bool same_shape(const GridSpec& o) const {
        return nx == o.nx && ny == o.ny && nz == o.nz && Lx == o.Lx && Ly == o.Ly &&
               Lz == o.Lz && domain_kind == o.domain_kind;
    }
};

/// Single wavevector (k, xi, eta) in physical units.
struct Mode {
    double k = 0.0, xi = 0.0, eta = 0.0;
};

/// Sheared-frame tilt xi - k*t of a mode at shear age t.
inline double shear_tilt(const Mode& m, double t) { return m.xi - m.k * t; }

/// Symbol p(t) = k^2 + (xi - k t)^2 + eta^2 of -Delta_tilde.
inline double shear_p(const Mode& m, double t) {
    double ty = shear_tilt(m, t);
    return m.k * m.k + ty * ty + m.eta * m.eta;
}

/// d/dt p = -2 k (xi - k t).
inline double shear_dp(const Mode& m, double t) { return -2.0 * m.k * shear_tilt(m, t); }

/// Exact integral of p(s) over [t0, t1] (cubic antiderivative of the tilt).
inline double shear_p_integral(const Mode& m, double t0, double t1) {
    double base = (m.k * m.k + m.eta * m.eta) * (t1 - t0);
    if (m.k == 0.0) return base + m.xi * m.xi * (t1 - t0);
    double a = m.xi - m.k * t0;
    double b = m.xi - m.k * t1;
    return base + (a * a * a - b * b * b) / (3.0 * m.k);
}

/// Per-mode sheared-frame symbols frozen at one time.
struct ShearSymbols {
    double t = 0.0;
    Mode mode;
    double tilt = 0.0;  // xi - k t
    double p = 0.0;     // k^2 + tilt^2 + eta^2

    ShearSymbols(const Mode& m, double time)
        : t(time), mode(m), tilt(shear_tilt(m, time)), p(shear_p(m, time)) {}
};

}  // namespace rotstab
