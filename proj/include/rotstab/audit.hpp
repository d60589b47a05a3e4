#pragma once

#include <random>
#include <string>
#include <vector>

#include "rotstab/multipliers.hpp"

namespace rotstab {

/// Result of sampling one multiplier inequality.
struct InequalityAudit {
    std::string inequality;
    long samples = 0;
    long violations = 0;       // residual beyond the 1e-10 slack
    double fitted_constant = 0.0;  // smallest admissible constant seen
    double max_violation = 0.0;    // largest normalized residual
};

namespace detail {

inline void tally(InequalityAudit& a, double lhs, double rhs) {
    // Normalized residual of lhs <= rhs.
    double resid = (lhs - rhs) / std::max(1.0, std::abs(rhs));
    a.samples++;
    a.max_violation = std::max(a.max_violation, resid);
    if (resid > 1e-10) a.violations++;
}

inline void fit(InequalityAudit& a, double ratio) {
    a.samples++;
    a.fitted_constant = std::max(a.fitted_constant, ratio);
}

struct MultiplierSample {
    double t, k, xi, eta, xi2, eta2, nu;
    int k2;
};

template <class Rng>
MultiplierSample draw_sample(Rng& rng, const MultiplierParams& mp) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> kdist(-8, 8);
    MultiplierSample s{};
    s.nu = std::pow(10.0, -6.0 * unit(rng));
    int k = kdist(rng);
    if (unit(rng) < 0.9 && k == 0) k = 1;  // keep some exact k = 0 samples
    s.k = k;
    s.k2 = kdist(rng);
    s.xi = 80.0 * (unit(rng) - 0.5);
    s.eta = 80.0 * (unit(rng) - 0.5);
    s.xi2 = 80.0 * (unit(rng) - 0.5);
    s.eta2 = 80.0 * (unit(rng) - 0.5);
    // Spread t over pre-critical, critical-window, and frozen stages.
    double span = (k != 0 ? std::abs(s.xi / k) : 0.0) +
                  mp.beta0 * std::pow(s.nu, -1.0 / 3.0) + 10.0;
    double u = 1.5 * unit(rng);
    s.t = std::min(u * u * span, 1e6);
    return s;
}

}  // namespace detail

/// Sample the closed-form weight inequalities (bounds on phi, its product
/// estimate, the m1/m2 bounds, and the dissipation balance). Fitted constants
/// are reported instead of assumed.
inline std::vector<InequalityAudit> audit_lemma_2_1(long n_samples, const MultiplierSet& set,
                                                    std::uint64_t seed = 12345) {
    if (n_samples < 10000)
        throw ContractViolation("audit_lemma_2_1: need at least 1e4 samples");
    const MultiplierParams& mp = set.params();
    std::mt19937_64 rng(seed);
    InequalityAudit phi_lower{"1 <= phi"};
    InequalityAudit phi_upper{"phi <= 1 + beta0^2 nu^{-2/3}"};
    InequalityAudit phi_over_p{"phi / p <= 1 / (k^2 + eta^2)"};
    InequalityAudit phi_t{"<t>^{-2} phi <= 3"};
    InequalityAudit phi_product{"phi(xi,eta) <= C phi(xi',eta') <xi-xi',eta-eta'>^2"};
    InequalityAudit m1_bounds{"1 <= m1 <= e^{2 pi}"};
    InequalityAudit m2_bounds{"1 <= m2 <= e^{A pi}"};
    InequalityAudit balance{"delta (m1'/m1 + nu p) + (phi'/phi - p'/p)/2 >= delta nu^{1/3}"};

    for (long i = 0; i < n_samples; ++i) {
        auto s = detail::draw_sample(rng, mp);
        Mode m{s.k, s.xi, s.eta};
        double phi = set.phi(s.t, m, s.nu);
        double p = shear_p(m, s.t);
        detail::tally(phi_lower, 1.0, phi);
        detail::tally(phi_upper, phi, 1.0 + mp.beta0 * mp.beta0 * std::pow(s.nu, -2.0 / 3.0));
        if (s.k != 0) detail::tally(phi_over_p, phi / p, 1.0 / (s.k * s.k + s.eta * s.eta));
        double bt = 1.0 + s.t * s.t;
        detail::tally(phi_t, phi / bt, 3.0);
        double phi2 = eval_phi(s.t, s.k, s.xi2, s.eta2, mp.beta0, s.nu);
        double bra2 = 1.0 + (s.xi - s.xi2) * (s.xi - s.xi2) + (s.eta - s.eta2) * (s.eta - s.eta2);
        detail::fit(phi_product, phi / (phi2 * bra2));

        double m1 = set.m1(s.t, m, s.nu);
        detail::tally(m1_bounds, 1.0, m1);
        detail::tally(m1_bounds, m1, std::exp(2.0 * pi));
        double m2 = set.m2(s.t, m);
        detail::tally(m2_bounds, 1.0, m2);
        detail::tally(m2_bounds, m2, std::exp(mp.A_big * pi));

        if (s.k != 0) {
            double c = std::cbrt(s.nu);
            double dm1 = 2.0 * c / (1.0 + c * c * (s.xi / s.k - s.t) * (s.xi / s.k - s.t));
            double tc = s.xi / s.k;
            bool in_window = s.t >= tc && s.t <= tc + mp.beta0 / c && tc > -mp.beta0 / c;
            double dphi_term = in_window ? 0.0 : -0.5 * shear_dp(m, s.t) / p;
            double lhs = mp.delta_beta0 * (dm1 + s.nu * p) + dphi_term;
            detail::tally(balance, mp.delta_beta0 * c, lhs);
        }
    }
    return {phi_lower, phi_upper, phi_over_p, phi_t, phi_product, m1_bounds, m2_bounds, balance};
}

/// Sample the m3 bounds and its log-derivative comparison estimates.
inline std::vector<InequalityAudit> audit_lemma_2_3(long n_samples, const MultiplierSet& set,
                                                    std::uint64_t seed = 54321) {
    if (n_samples < 10000)
        throw ContractViolation("audit_lemma_2_3: need at least 1e4 samples");
    const MultiplierParams& mp = set.params();
    const M3Evaluator& m3e = set.m3_evaluator();
    std::mt19937_64 rng(seed);
    double a0 = mp.a0;
    InequalityAudit m3_lower{"1 <= m3"};
    InequalityAudit dt_lower{"g(t - xi/k) <= dt m3 / m3 (t,k,xi)"};
    InequalityAudit dt_shifted{"g(t - xi/k) <= C a0^{-1-a0} dt m3/m3 (t,k',xi') <k-k',xi-xi'>^{2+a0(2+a0)}"};
    InequalityAudit dt_product{"dt m3/m3 (t,k,xi) <= C a0^{-1-a0} dt m3/m3 (t,k',xi') <k-k',xi-xi'>^{2+a0(2+a0)}"};

    double expo = 2.0 + a0 * (2.0 + a0);
    for (long i = 0; i < n_samples; ++i) {
        auto s = detail::draw_sample(rng, mp);
        double m3 = m3e.m3(s.t, s.k, s.xi);
        detail::tally(m3_lower, 1.0, m3);
        double dt_here = m3e.dtm3_over_m3(s.t, s.k, s.xi);
        double dt_there = m3e.dtm3_over_m3(s.t, s.k2, s.xi2);
        double bra = std::pow(
            1.0 + (s.k - s.k2) * (s.k - s.k2) + (s.xi - s.xi2) * (s.xi - s.xi2), 0.5 * expo);
        double a0fac = std::pow(a0, 1.0 + a0);
        if (s.k != 0) {
            double fk = m3e.g(s.t - s.xi / s.k);
            detail::tally(dt_lower, fk, dt_here);
            detail::fit(dt_shifted, fk * a0fac / (dt_there * bra));
        }
        detail::fit(dt_product, dt_here * a0fac / (dt_there * bra));
    }
    return {m3_lower, dt_lower, dt_shifted, dt_product};
}

}  // namespace rotstab
