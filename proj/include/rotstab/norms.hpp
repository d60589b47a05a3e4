#pragma once

#include "rotstab/fft.hpp"
#include "rotstab/operators.hpp"

namespace rotstab {

enum class DerivKind { good, tilde, plain };

namespace detail {

inline double deriv_weight_sq(const Mode& m, DerivKind d, double t) {
    switch (d) {
        case DerivKind::tilde: {
            double ty = shear_tilt(m, t);
            return m.k * m.k + ty * ty + m.eta * m.eta;
        }
        // The good derivative is the plain gradient in the moving frame.
        case DerivKind::good:
        case DerivKind::plain:
        default:
            return m.k * m.k + m.xi * m.xi + m.eta * m.eta;
    }
}

}  // namespace detail

/// Squared Sobolev norm sum_{l<=s} ||D^l f||_{L^2}^2 with the chosen
/// derivative family (spectral Parseval route).
inline double sobolev_norm_sq(const SpectralField& f, int s, DerivKind d, double t) {
    if (s < 0 || s > 8) throw ContractViolation("sobolev_norm: order must lie in [0,8]");
    const GridSpec& g = f.grid();
    double acc = 0.0;
    for (int c = 0; c < f.n_components(); ++c)
        f.for_each_mode(c, [&](int, int, int, const Mode& m, const Complex& v) {
            double w2 = detail::deriv_weight_sq(m, d, t);
            double wsum = 1.0, wl = 1.0;
            for (int l = 1; l <= s; ++l) {
                wl *= w2;
                wsum += wl;
            }
            acc += wsum * std::norm(v);
        });
    return g.volume() * acc;
}

inline double sobolev_norm(const SpectralField& f, int s, DerivKind d, double t) {
    return std::sqrt(sobolev_norm_sq(f, s, d, t));
}

/// z-derivative (symbol i eta).
inline SpectralField dz(const SpectralField& f) { return good_derivative(f, 2); }

/// The anisotropic weight ||(1 + dz) f|| is evaluated as the literal two-term
/// sum ||f|| + ||dz f|| for whatever norm functor is supplied.
template <class NormFn>
double one_plus_dz_norm(const SpectralField& f, NormFn&& norm_fn) {
    return norm_fn(f) + norm_fn(dz(f));
}

/// Sup over the physical grid and components of |f|.
inline double sup_norm(const SpectralField& f) {
    double worst = 0.0;
    for (int c = 0; c < f.n_components(); ++c) {
        auto phys = to_physical(f, c);
        for (const auto& v : phys) worst = std::max(worst, std::abs(v.real()));
    }
    return worst;
}

/// W^{m,1} norm by grid quadrature: sum_{|alpha| tiers l <= m} of the L^1
/// norms of the l-th good-derivative tensor magnitude.
inline double w_m1_norm(const SpectralField& f, int m) {
    const GridSpec& g = f.grid();
    double cell = g.volume() / static_cast<double>(g.num_modes());
    double acc = 0.0;
    std::vector<SpectralField> tier{f};
    for (int l = 0; l <= m; ++l) {
        // |D^l f| on the grid: sqrt of the sum of squares over the tier.
        std::vector<std::vector<Complex>> phys;
        for (const auto& fld : tier)
            for (int c = 0; c < fld.n_components(); ++c) phys.push_back(to_physical(fld, c));
        for (std::size_t idx = 0; idx < phys[0].size(); ++idx) {
            double s = 0.0;
            for (const auto& p : phys) s += std::norm(p[idx]);
            acc += std::sqrt(s) * cell;
        }
        if (l == m) break;
        std::vector<SpectralField> next;
        for (const auto& fld : tier)
            for (int ax = 0; ax < 3; ++ax) next.push_back(good_derivative(fld, ax));
        tier = std::move(next);
    }
    return acc;
}

/// Collapse a 3-D field to its k = 0 slice on an nx = 1 grid.
inline SpectralField collapse_zero_modes(const SpectralField& f) {
    GridSpec g2 = f.grid();
    g2.nx = 1;
    SpectralField out(g2, f.n_components());
    for (int c = 0; c < f.n_components(); ++c)
        for (int j = 0; j < g2.ny; ++j)
            for (int l = 0; l < g2.nz; ++l) out.at(c, 0, j, l) = f.at(c, 0, j, l);
    return out;
}

}  // namespace rotstab
