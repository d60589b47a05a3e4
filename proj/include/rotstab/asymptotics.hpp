#pragma once

#include "rotstab/energy.hpp"
#include "rotstab/rate_fit.hpp"

namespace rotstab {

/// Fitted long-time exponents of a trajectory of EnergyRecords.
struct AsymptoticsReport {
    RateFit u0_sup_fit;          // target -1/2 on T x R^2, -1/3 on T x R x T
    RateFit good_sup_fit;        // target -1 (surrogate only)
    double damping_sup = 0.0;    // sup_t (1+t)||u_neq^2|| / eps
    double ed_rate = 0.0;        // fitted rate of log||(u1,u3)_neq|| vs t
    double ed_rate_nu_third = 0.0;  // ed_rate / nu^{1/3} (delta_2 estimate)
    double horizon = 0.0;
};

/// Fit the dispersive decay exponents and damping/dissipation trackers.
/// fit window [t_lo, t_hi]; the trajectory must span at least T >= 50.
inline AsymptoticsReport asymptotics_check(const std::vector<EnergyRecord>& records,
                                           double nu, double eps, double t_lo, double t_hi) {
    if (records.empty() || records.back().t < 50.0)
        throw FitError("asymptotics_check: trajectory must span T >= 50");
    std::vector<double> t, u0s, goods, eds;
    double damping_sup = 0.0;
    for (const auto& r : records) {
        t.push_back(r.t);
        u0s.push_back(r.u0_sup);
        goods.push_back(r.good_sup);
        eds.push_back(r.ed_tracker);
        damping_sup = std::max(damping_sup, r.damping_ratio);
    }
    AsymptoticsReport rep;
    rep.horizon = records.back().t;
    rep.u0_sup_fit = measure_rate(t, u0s, RateModel::power_law, t_lo, t_hi);
    rep.good_sup_fit = measure_rate(t, goods, RateModel::power_law, t_lo, t_hi);
    rep.damping_sup = eps > 0.0 ? damping_sup / eps : damping_sup;
    rep.ed_rate = measure_rate(t, eds, RateModel::exp_nu_third, t_lo, t_hi).rate;
    rep.ed_rate_nu_third = nu > 0.0 ? rep.ed_rate / std::cbrt(nu) : 0.0;
    return rep;
}

/// Space-time (Strichartz-type) accumulators of a zero-mode trajectory,
/// with the nu-powers and initial-data norms they are compared against.
struct StrichartzReport {
    double l2t_linf = 0.0;       // ||(1+dz) u0||_{L^2_t L^inf}
    double l1t_grad_linf = 0.0;  // ||(1+dz) grad u0||_{L^1_t L^inf}
    double l2t_u3_w1inf = 0.0;   // ||(1+dz) u0^3||_{L^2_t W^{1,inf}}
    double l1t_dyu_w1inf = 0.0;  // ||(1+dz) dy u0||_{L^1_t W^{1,inf}}
    double init_w21 = 0.0;       // ||(1+dz) u0_in||_{W^{2,1}}
    double init_h2 = 0.0;        // ||(1+dz) u0_in||_{H^2}
    double ratio_l2t = 0.0;      // nu^{1/4} l2t_linf / init_w21
    double ratio_l1t = 0.0;      // nu^{3/4} l1t_grad_linf / init_w21
    double ratio_u3 = 0.0;       // l2t_u3_w1inf / init_h2
    double ratio_dyu = 0.0;      // nu^{1/2} l1t_dyu_w1inf / init_h2
};

namespace detail {

/// sup_x of |f| plus first good derivatives (W^{1,inf} by the two-tier sup).
inline double w1inf(const SpectralField& f) {
    double s = sup_norm(f);
    for (int ax = 0; ax < 3; ++ax) s = std::max(s, sup_norm(good_derivative(f, ax)));
    return s;
}

inline double one_plus_dz_sup(const SpectralField& f) {
    return sup_norm(f) + sup_norm(dz(f));
}
inline double one_plus_dz_w1inf(const SpectralField& f) {
    return w1inf(f) + w1inf(dz(f));
}

}  // namespace detail

/// Accumulate the four space-time norms by trapezoidal quadrature of the
/// snapshot sup-norms. Monotone nondecreasing in the horizon by construction.
inline StrichartzReport strichartz_accumulators(const std::vector<double>& times,
                                                const std::vector<SpectralField>& u0_snaps,
                                                double nu) {
    if (times.size() != u0_snaps.size() || times.empty())
        throw ContractViolation("strichartz_accumulators: mismatched snapshots");
    std::vector<double> f_linf2, f_grad, f_u3, f_dyu;
    for (const auto& u0 : u0_snaps) {
        double v = detail::one_plus_dz_sup(u0);
        f_linf2.push_back(v * v);
        double gsup = 0.0;
        for (int ax = 1; ax <= 2; ++ax)
            gsup = std::max(gsup, detail::one_plus_dz_sup(good_derivative(u0, ax)));
        f_grad.push_back(gsup);
        SpectralField u3(u0.grid(), 1);
        for (int j = 0; j < u0.grid().ny; ++j)
            for (int l = 0; l < u0.grid().nz; ++l) u3.at(0, 0, j, l) = u0.at(2, 0, j, l);
        double w1 = detail::one_plus_dz_w1inf(u3);
        f_u3.push_back(w1 * w1);
        f_dyu.push_back(detail::one_plus_dz_w1inf(good_derivative(u0, 1)));
    }
    auto trapz = [&](const std::vector<double>& f) {
        double acc = 0.0;
        for (std::size_t i = 1; i < times.size(); ++i)
            acc += 0.5 * (f[i] + f[i - 1]) * (times[i] - times[i - 1]);
        return acc;
    };
    StrichartzReport r;
    r.l2t_linf = std::sqrt(trapz(f_linf2));
    r.l1t_grad_linf = trapz(f_grad);
    r.l2t_u3_w1inf = std::sqrt(trapz(f_u3));
    r.l1t_dyu_w1inf = trapz(f_dyu);
    const SpectralField& init = u0_snaps.front();
    r.init_w21 = w_m1_norm(init, 2) + w_m1_norm(dz(init), 2);
    auto h2 = [](const SpectralField& f) { return sobolev_norm(f, 2, DerivKind::good, 0.0); };
    r.init_h2 = one_plus_dz_norm(init, h2);
    if (r.init_w21 > 0.0) {
        r.ratio_l2t = std::pow(nu, 0.25) * r.l2t_linf / r.init_w21;
        r.ratio_l1t = std::pow(nu, 0.75) * r.l1t_grad_linf / r.init_w21;
    }
    if (r.init_h2 > 0.0) {
        r.ratio_u3 = r.l2t_u3_w1inf / r.init_h2;
        r.ratio_dyu = std::sqrt(nu) * r.l1t_dyu_w1inf / r.init_h2;
    }
    return r;
}

}  // namespace rotstab
