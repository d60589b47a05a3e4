#pragma once

#include <cstdio>
#include <fstream>

#include "rotstab/multipliers.hpp"
#include "rotstab/solver.hpp"

namespace rotstab {

/// One time sample of the energy functionals and headline diagnostics.
/// CSV column order is fixed and matches energy_csv_header().
struct EnergyRecord {
    double t = 0.0;
    double E0 = 0.0, D0 = 0.0;
    double Enot = 0.0, Dnot = 0.0;
    double u0_sup = 0.0;          // ||u0||_inf
    double good_sup = 0.0;        // ||(u0^3, grad u0^3, dy u0)||_inf
    double damping_ratio = 0.0;   // (1+t) ||u_neq^2||_L2
    double ed_tracker = 0.0;      // ||(u_neq^1, u_neq^3)||_L2
    double total_energy = 0.0;    // ||u||_L2^2
    double div_residual = 0.0;
    double discarded_energy = 0.0;
    double shear_work = 0.0;      // accumulated int -2<u^1,u^2> ds
};

inline const char* energy_csv_header() {
    return "t,E0,D0,Enot,Dnot,u0_sup,good_sup,damping_ratio,ed_tracker,total_energy,"
           "div_residual,discarded_energy,shear_work";
}

inline void append_energy_csv(std::ostream& out, const EnergyRecord& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g\n",
                  r.t, r.E0, r.D0, r.Enot, r.Dnot, r.u0_sup, r.good_sup, r.damping_ratio,
                  r.ed_tracker, r.total_energy, r.div_residual, r.discarded_energy,
                  r.shear_work);
    out << buf;
}

namespace detail {

/// sum_{l<=s} w^{2l}
inline double poly_weight(double w2, int s) {
    double acc = 1.0, wl = 1.0;
    for (int l = 1; l <= s; ++l) {
        wl *= w2;
        acc += wl;
    }
    return acc;
}

/// ||(1+dz) f|| as the literal sum of the two square roots of the
/// accumulated squares (quadratic forms passed per mode).
struct TwoTermNorm {
    double plain_sq = 0.0, dz_sq = 0.0;
    void add(double weight, double eta, double coeff_sq) {
        plain_sq += weight * coeff_sq;
        dz_sq += weight * eta * eta * coeff_sq;
    }
    double value(double volume) const {
        return std::sqrt(volume * plain_sq) + std::sqrt(volume * dz_sq);
    }
};

}  // namespace detail

/// Zero-mode energy/dissipation pair. On the T x R^2 surrogate these are the
/// anisotropic functionals with the m3 weight at the top order; on T x R x T
/// the plain (1+dz)-weighted H^5 pair.
inline void zero_mode_functionals(const SpectralField& u0, double t, double nu,
                                  const MultiplierSet& set, DomainKind domain, double& E0,
                                  double& D0) {
    const GridSpec& g = u0.grid();
    const double V = g.volume();
    const M3Evaluator& m3e = set.m3_evaluator();
    if (domain == DomainKind::T_R_T) {
        detail::TwoTermNorm e_h5, d_h5;
        for (int c = 0; c < 3; ++c)
            u0.for_each_mode(c, [&](int, int, int, const Mode& m, const Complex& v) {
                double rho2 = m.xi * m.xi + m.eta * m.eta;
                double c2 = std::norm(v);
                e_h5.add(detail::poly_weight(rho2, 5), m.eta, c2);
                d_h5.add(rho2 * detail::poly_weight(rho2, 5), m.eta, c2);
            });
        double e = e_h5.value(V), d = d_h5.value(V);
        E0 = e * e;
        D0 = nu * d * d;
        return;
    }
    double h4 = 0.0, grad_h4 = 0.0;
    detail::TwoTermNorm top_e, top_d_visc, top_d_ups;
    for (int c = 0; c < 3; ++c)
        u0.for_each_mode(c, [&](int, int j, int, const Mode& m, const Complex& v) {
            (void)j;
            double rho2 = m.xi * m.xi + m.eta * m.eta;
            double c2 = std::norm(v);
            h4 += detail::poly_weight(rho2, 4) * c2;
            grad_h4 += rho2 * detail::poly_weight(rho2, 4) * c2;
            double a0w = 1.0 / m3e.m3(t, 0.0, m.xi);
            double ups = m3e.dtm3_over_m3(t, 0.0, m.xi);
            double c2w = a0w * a0w * c2;
            double rho10 = rho2 * rho2 * rho2 * rho2 * rho2;
            top_e.add(rho10, m.eta, c2w);
            top_d_visc.add(rho10 * rho2, m.eta, c2w);
            top_d_ups.add(rho10 * ups, m.eta, c2w);
        });
    double te = top_e.value(V), tdv = top_d_visc.value(V), tdu = top_d_ups.value(V);
    E0 = V * h4 + te * te;
    D0 = nu * V * grad_h4 + nu * tdv * tdv + tdu * tdu;
}

/// Full energy record for a solver state. For beta = 0 the W unknown is
/// identically zero and Enot degenerates to the weighted Q part; B_beta < 0
/// and beta = 1 raise RegimeError through the W prefactor.
inline EnergyRecord energy_functionals(const SolverState& st, const MultiplierSet& set) {
    EnergyRecord r;
    r.t = st.t;
    r.total_energy = st.u_hat.l2_sq();
    r.div_residual = divergence_tilde_residual(st.u_hat, st.shear_age());
    r.discarded_energy = st.discarded_energy;
    r.shear_work = st.shear_work;
    const GridSpec& g = st.grid;
    const double nu = st.params.nu;

    SpectralField u0 = collapse_zero_modes(st.u_hat);
    zero_mode_functionals(u0, st.t, nu, set, g.domain_kind, r.E0, r.D0);

    // Nonzero-mode pair (Q, W), weighted by A.
    SpectralField q = extract_q(st), w = extract_w(st);
    MultiplierState ms = MultiplierState::build(g, st.t, set, nu, st.last_remap);
    double tau = st.shear_age();
    double grow2 = std::exp(2.0 * set.params().delta2 * std::cbrt(nu) * st.t);
    double enot = 0.0, dnot = 0.0;
    std::size_t idx = 0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l, ++idx) {
                if (i == 0) continue;
                Mode stored{g.kx(i), g.ky(j), g.kz(l)};
                double xi_abs = stored.xi + stored.k * st.last_remap;
                double ty = stored.xi - stored.k * tau;  // frame-independent tilt
                double p = stored.k * stored.k + ty * ty + stored.eta * stored.eta;
                double w2_good = stored.k * stored.k + xi_abs * xi_abs + stored.eta * stored.eta;
                double s2 = std::norm(q.at(0, i, j, l)) + std::norm(w.at(0, i, j, l));
                double a2 = grow2 / (ms.phi[idx] * ms.m1[idx] * ms.m1[idx] * ms.m2[idx] *
                                     ms.m2[idx] * ms.m3[idx] * ms.m3[idx]);
                double h4 = detail::poly_weight(w2_good, 4);
                enot += h4 * a2 * s2;
                dnot += (nu * p * h4 + std::cbrt(nu) + stored.k * stored.k / p +
                         ms.dtm3_over_m3[idx]) *
                        a2 * s2;
            }
    r.Enot = g.volume() * enot;
    r.Dnot = g.volume() * dnot;

    // Sup norms of the zero modes and their good components.
    r.u0_sup = sup_norm(u0);
    SpectralField u0_3(u0.grid(), 1);
    for (int j = 0; j < g.ny; ++j)
        for (int l = 0; l < g.nz; ++l) u0_3.at(0, 0, j, l) = u0.at(2, 0, j, l);
    double good = sup_norm(u0_3);
    good = std::max(good, sup_norm(good_derivative(u0_3, 1)));
    good = std::max(good, sup_norm(good_derivative(u0_3, 2)));
    good = std::max(good, sup_norm(good_derivative(u0, 1)));
    r.good_sup = good;

    // Damping and enhanced-dissipation trackers on the nonzero modes.
    double u2_sq = 0.0, u13_sq = 0.0;
    for (int i = 1; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) {
                u2_sq += std::norm(st.u_hat.at(1, i, j, l));
                u13_sq += std::norm(st.u_hat.at(0, i, j, l)) +
                          std::norm(st.u_hat.at(2, i, j, l));
            }
    r.damping_ratio = (1.0 + st.t) * std::sqrt(g.volume() * u2_sq);
    r.ed_tracker = std::sqrt(g.volume() * u13_sq);
    return r;
}

}  // namespace rotstab
