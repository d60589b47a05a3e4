#pragma once

#include <array>
#include <random>
#include <string>

#include "rotstab/checkpoint.hpp"
#include "rotstab/norms.hpp"

namespace rotstab {

enum class InitialProfile { random_band, localized_bubble, file };

/// Generator specification for the initial perturbation. The field is always
/// real, divergence-free (at t = 0 the tilde frame is the plain one), mean
/// free, dealiased, and normalized to ||u||_{H^5} + ||dz u||_{H^5} = amplitude.
struct InitialData {
    InitialProfile profile = InitialProfile::random_band;
    double amplitude = 1e-3;
    std::uint64_t seed = 1;
    // random_band controls
    double band_lo = 0.5, band_hi = 3.0;  // |wavevector| band, physical units
    double zero_mode_fraction = 0.0;      // share of squared L^2 mass on k = 0
    // localized_bubble controls (fractions of the box)
    double bubble_width_frac = 0.22;
    double bubble_width_y_frac = 0.0;  // 0: use bubble_width_frac
    double bubble_width_z_frac = 0.0;
    double bubble_carrier = 1.5;  // carrier wavenumber of the modulation
    std::array<double, 3> bubble_amplitudes{1.0, 0.7, 0.4};
    std::string file_path;
};

namespace detail {

/// C-infinity compactly supported bump, support (-1, 1), max 1 at 0.
inline double bump(double r) {
    double r2 = r * r;
    return r2 >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - r2));
}

inline SpectralField random_band_field(const GridSpec& g, const InitialData& d) {
    std::mt19937_64 rng(d.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SpectralField u(g, 3);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) {
                Mode m{g.kx(i), g.ky(j), g.kz(l)};
                double mag = std::sqrt(m.k * m.k + m.xi * m.xi + m.eta * m.eta);
                // Draw in fixed traversal order so the seed contract holds.
                std::array<Complex, 3> draw;
                for (auto& c : draw) c = Complex(normal(rng), normal(rng));
                if (!g.retained(i, j, l) || mag < d.band_lo || mag > d.band_hi) continue;
                double scale = (m.k == 0.0) ? std::sqrt(d.zero_mode_fraction)
                                            : std::sqrt(1.0 - d.zero_mode_fraction);
                for (int c = 0; c < 3; ++c) u.at(c, i, j, l) = scale * draw[c];
            }
    u.enforce_hermitian();
    for (int c = 0; c < 3; ++c) u.at(c, 0, 0, 0) = 0.0;
    return leray_project_tilde(u, 0.0);
}

inline SpectralField bubble_field(const GridSpec& g, const InitialData& d) {
    // Velocity as the curl of a compact vector potential: div-free by
    // construction, supported in the middle of the box.
    double w = d.bubble_width_frac;
    double wy = d.bubble_width_y_frac > 0.0 ? d.bubble_width_y_frac : w;
    double wz = d.bubble_width_z_frac > 0.0 ? d.bubble_width_z_frac : w;
    std::array<double, 3> center{0.5 * g.Lx, 0.5 * g.Ly, 0.5 * g.Lz};
    std::array<double, 3> width{w * g.Lx, wy * g.Ly, wz * g.Lz};
    auto psi = [&](int a, double x, double y, double z) {
        double rx = (x - center[0]) / width[0];
        double ry = (y - center[1]) / width[1];
        double rz = (z - center[2]) / width[2];
        if (g.nx == 1) rx = 0.0;  // zero-mode grids carry no x structure
        // The z carrier concentrates the spectrum near (xi, eta) = (0, +-c),
        // the stationary set of the zero-mode dispersive phase, so localized
        // data exhibits the full kernel decay within the box horizon.
        double phase = d.bubble_carrier * (z - center[2]);
        return d.bubble_amplitudes[a] * bump(rx) * bump(ry) * bump(rz) *
               std::cos(phase + 0.3 * a);
    };
    std::vector<std::vector<double>> phys(3);
    for (auto& c : phys) c.resize(g.num_modes());
    std::size_t m = 0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l, ++m)
                for (int a = 0; a < 3; ++a)
                    phys[a][m] = psi(a, i * g.dx(), j * g.dy(), l * g.dz());
    SpectralField pot = forward_transform(g, phys);
    // curl in spectral space (t = 0 frame)
    SpectralField u(g, 3);
    pot.for_each_mode(0, [&](int i, int j, int l, const Mode& mo, Complex&) {
        Complex p1 = pot.at(0, i, j, l), p2 = pot.at(1, i, j, l), p3 = pot.at(2, i, j, l);
        Complex ik(0.0, mo.k), ixi(0.0, mo.xi), ieta(0.0, mo.eta);
        u.at(0, i, j, l) = ixi * p3 - ieta * p2;
        u.at(1, i, j, l) = ieta * p1 - ik * p3;
        u.at(2, i, j, l) = ik * p2 - ixi * p1;
    });
    dealias(u);
    u.enforce_hermitian();
    for (int c = 0; c < 3; ++c) u.at(c, 0, 0, 0) = 0.0;
    return u;
}

}  // namespace detail

/// Build the normalized initial perturbation.
inline SpectralField generate_initial_field(const GridSpec& grid, const InitialData& d) {
    grid.validate();
    if (d.amplitude < 0.0) throw ConfigError("InitialData: amplitude must be >= 0");
    SpectralField u(grid, 3);
    switch (d.profile) {
        case InitialProfile::random_band: u = detail::random_band_field(grid, d); break;
        case InitialProfile::localized_bubble: u = detail::bubble_field(grid, d); break;
        case InitialProfile::file: {
            GridSpec g2;
            u = read_checkpoint_field(d.file_path, &g2, nullptr, nullptr, nullptr);
            if (!g2.same_shape(grid))
                throw ConfigError("initial data file grid does not match the run grid");
            break;
        }
    }
    auto h5 = [](const SpectralField& f) { return sobolev_norm(f, 5, DerivKind::good, 0.0); };
    double norm = one_plus_dz_norm(u, h5);
    if (d.amplitude == 0.0) {
        u.fill_zero();
        return u;
    }
    if (norm <= 0.0)
        throw ConfigError("initial data: generated field is zero, normalization unreachable");
    u *= d.amplitude / norm;
    return u;
}

}  // namespace rotstab
