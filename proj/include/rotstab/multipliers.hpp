#pragma once

#include <algorithm>
#include <cmath>
#include <memory>

#include "rotstab/operators.hpp"
#include "rotstab/quadrature.hpp"

namespace rotstab {

/// Constants entering the multiplier weights. Defaults sit inside the stated
/// admissible ranges; none of them is pinned numerically by theory, so audits
/// always report fitted constants.
struct MultiplierParams {
    double beta0 = 2.5;     // critical-window width constant, > 2
    double A_big = 16.0;    // pressure/reaction control constant in m2, > 0
    double a0 = 0.3;        // log-weight exponent, in (0, sqrt(2)-1)
    double delta2 = 0.05;   // enhanced-dissipation growth exponent, > 0
    double delta_beta0 = 1.0;  // audit-only constant of the balance inequality, in (0,1]
    int n_trunc = 64;       // half-width of the retained n-window in the m3 sum
    double quad_tol = 1e-9;

    void validate() const {
        if (beta0 <= 2.0) throw ConfigError("MultiplierParams: beta0 must be > 2");
        if (A_big <= 0.0) throw ConfigError("MultiplierParams: A_big must be > 0");
        if (a0 <= 0.0 || a0 >= std::sqrt(2.0) - 1.0)
            throw ConfigError("MultiplierParams: a0 must lie in (0, sqrt(2)-1)");
        if (delta2 <= 0.0) throw ConfigError("MultiplierParams: delta2 must be > 0");
        if (delta_beta0 <= 0.0 || delta_beta0 > 1.0)
            throw ConfigError("MultiplierParams: delta_beta0 must lie in (0,1]");
        if (n_trunc < 8) throw ConfigError("MultiplierParams: n_trunc must be >= 8");
        if (quad_tol <= 0.0) throw ConfigError("MultiplierParams: quad_tol must be > 0");
    }
};

/// Piecewise closed form of the stretching/dissipation balance weight.
/// Equal to 1 at t = 0, frozen outside the critical window
/// [xi/k, xi/k + beta0 nu^{-1/3}], and growing like p(t)/p(window entry)
/// inside it.
inline double eval_phi(double t, double k, double xi, double eta, double beta0, double nu) {
    if (nu < 0.0 || nu > 1.0) throw ContractViolation("eval_phi: nu must lie in [0,1]");
    if (t < 0.0) throw ContractViolation("eval_phi: t must be >= 0");
    if (k == 0.0) return 1.0;
    // nu = 0: the critical window never closes (its inviscid limit).
    const double window =
        nu > 0.0 ? beta0 * std::pow(nu, -1.0 / 3.0) : std::numeric_limits<double>::infinity();
    const double tc = xi / k;
    const double k2 = k * k, eta2 = eta * eta;
    const double tilt = xi - k * t;
    const double frozen = k2 + (beta0 * k) * (beta0 * k) * std::pow(nu, -2.0 / 3.0) + eta2;
    if (tc <= -window) return 1.0;
    if (tc <= 0.0) {
        // Window already open at t = 0; reference value is p(0).
        double p0 = k2 + xi * xi + eta2;
        if (t <= tc + window) return (k2 + tilt * tilt + eta2) / p0;
        return frozen / p0;
    }
    if (t <= tc) return 1.0;
    double pc = k2 + eta2;  // p at the critical time
    if (t <= tc + window) return (k2 + tilt * tilt + eta2) / pc;
    return frozen / pc;
}

/// Explicit solution of d(m1)/dt = 2 nu^{1/3} / (1 + nu^{2/3}(xi/k - t)^2) m1.
inline double eval_m1(double t, double k, double xi, double nu) {
    if (k == 0.0) return 1.0;
    double c = std::cbrt(nu);
    return std::exp(2.0 * std::atan(c * (t - xi / k)) + 2.0 * std::atan(c * xi / k));
}

/// Exact antiderivative of A k^2 / p(s): arctan in the rescaled tilt.
inline double eval_m2(double t, double k, double xi, double eta, double A_big) {
    if (k == 0.0) return 1.0;
    double b = std::sqrt(k * k + eta * eta);
    return std::exp(A_big * (k / b) * (std::atan((k * t - xi) / b) + std::atan(xi / b)));
}

/// The slowly-decaying critical-layer weight g(x) = <x>^{-1} [ln(e + <x>)]^{-1-a0}.
inline double log_weight_g(double x, double a0) {
    double bra = std::sqrt(1.0 + x * x);
    return 1.0 / (bra * std::pow(std::log(std::numbers::e + bra), 1.0 + a0));
}

/// Evaluator for the m3 multiplier
///
///   m3(t,k,xi) = exp( sum_{n != 0} <k-n>^{-1-a0} G(t - xi/n) ),
///   G(x) = integral of g from -infinity to x,
///
/// with the n-sum kept exactly on |n-k| <= n_trunc and its tail summed with
/// the argument frozen at xi/n -> 0, i.e. tail = G(t) * sum_{|n-k|>n_trunc}
/// <k-n>^{-1-a0} (a zeta-type sum evaluated once). G itself is reduced by
/// x = sinh(s) to an integrable profile h(s) = [ln(e + cosh s)]^{-1-a0},
/// tabulated once with the analytic far-tail (s - ln 2)^{-a0}/a0.
class M3Evaluator {
public:
    explicit M3Evaluator(const MultiplierParams& params) : p_(params) {
        p_.validate();
        build_table();
        zeta_tail_ = zeta_tail_sum(p_.n_trunc);
    }

    double a0() const { return p_.a0; }
    int n_trunc() const { return p_.n_trunc; }

    double g(double x) const { return log_weight_g(x, p_.a0); }

    /// G(x) = int_{-inf}^x g, via the tabulated cumulative of h.
    double G(double x) const {
        double s = std::asinh(x);
        return (s >= 0.0) ? half_integral_ + cumulative(s) : half_integral_ - cumulative(-s);
    }

    double log_m3(double t, double k_in, double xi) const {
        return window_sum(t, k_in, xi, [this](double x) { return G(x); }) ;
    }
    double m3(double t, double k, double xi) const { return std::exp(log_m3(t, k, xi)); }
    double dtm3_over_m3(double t, double k, double xi) const {
        return window_sum(t, k, xi, [this](double x) { return g(x); });
    }

    /// Windowed part only (no tail): used by oracle tests.
    double log_m3_window_only(double t, double k_in, double xi, int half_width) const {
        int k = static_cast<int>(std::lround(k_in));
        double s = 0.0;
        for (int n = k - half_width; n <= k + half_width; ++n) {
            if (n == 0) continue;
            s += bra_pow(k - n) * G(t - xi / n);
        }
        return s;
    }

private:
    template <class Prim>
    double window_sum(double t, double k_in, double xi, Prim&& prim) const {
        int k = static_cast<int>(std::lround(k_in));
        double s = 0.0;
        for (int n = k - p_.n_trunc; n <= k + p_.n_trunc; ++n) {
            if (n == 0) continue;
            s += bra_pow(k - n) * prim(t - xi / n);
        }
        double tail = zeta_tail_;
        if (std::abs(k) > p_.n_trunc) tail -= bra_pow(k);
        return s + prim(t) * tail;
    }

    double bra_pow(int m) const {
        return std::pow(1.0 + double(m) * double(m), -0.5 * (1.0 + p_.a0));
    }

    double h(double s) const {
        return std::pow(std::log(std::numbers::e + std::cosh(s)), -1.0 - p_.a0);
    }
    double h_tail(double s) const {  // int_s^inf h, valid for s >= s_max_
        return std::pow(s - std::numbers::ln2, -p_.a0) / p_.a0;
    }

    /// Cumulative C(s) = int_0^s h for s >= 0 (Hermite cubic in the table).
    double cumulative(double s) const {
        if (s >= s_max_) return table_.back() + h_tail(s_max_) - h_tail(s);
        double u = s / ds_;
        int i = std::min(static_cast<int>(u), static_cast<int>(table_.size()) - 2);
        double t1 = u - i, t2 = t1 * t1, t3 = t2 * t1;
        return table_[i] * (2 * t3 - 3 * t2 + 1) + table_[i + 1] * (-2 * t3 + 3 * t2) +
               ds_ * (deriv_[i] * (t3 - 2 * t2 + t1) + deriv_[i + 1] * (t3 - t2));
    }

    void build_table() {
        const int n_panels = 8192;
        table_.resize(n_panels + 1);
        deriv_.resize(n_panels + 1);
        table_[0] = 0.0;
        deriv_[0] = h(0.0);
        for (int i = 0; i < n_panels; ++i) {
            double v, e;
            gk::panel([this](double s) { return h(s); }, i * ds_, (i + 1) * ds_, v, e);
            table_[i + 1] = table_[i] + v;
            deriv_[i + 1] = h((i + 1) * ds_);
        }
        half_integral_ = table_.back() + h_tail(s_max_);
    }

    /// 2 sum_{m > N} <m>^{-1-a0}, by direct summation plus the smooth
    /// remainder integral in the substitution v = (1/x)^{a0}.
    double zeta_tail_sum(int N) const {
        const int direct = 5000;
        double s = 0.0;
        for (int m = N + 1; m <= N + direct; ++m) s += bra_pow(m);
        double X = N + direct + 0.5;
        double a = p_.a0;
        double rem = integrate_adaptive<double>(
            [a](double v) { return std::pow(1.0 + std::pow(v, 2.0 / a), -0.5 * (1.0 + a)); },
            0.0, std::pow(X, -a), 1e-15, 1e-13) / a;
        return 2.0 * (s + rem);
    }

    MultiplierParams p_;
    static constexpr double s_max_ = 50.0;
    double ds_ = s_max_ / 8192;
    double half_integral_ = 0.0;
    double zeta_tail_ = 0.0;
    std::vector<double> table_;
    std::vector<double> deriv_;
};

/// Bundle of all multiplier evaluations for one parameter set.
class MultiplierSet {
public:
    explicit MultiplierSet(const MultiplierParams& params = {})
        : params_(params), m3_(std::make_shared<M3Evaluator>(params)) {}

    const MultiplierParams& params() const { return params_; }

    double phi(double t, const Mode& m, double nu) const {
        return eval_phi(t, m.k, m.xi, m.eta, params_.beta0, nu);
    }
    double m1(double t, const Mode& m, double nu) const { return eval_m1(t, m.k, m.xi, nu); }
    double m2(double t, const Mode& m) const {
        return eval_m2(t, m.k, m.xi, m.eta, params_.A_big);
    }
    double m3(double t, const Mode& m) const { return m3_->m3(t, m.k, m.xi); }
    double dtm3_over_m3(double t, const Mode& m) const {
        return m3_->dtm3_over_m3(t, m.k, m.xi);
    }
    double combined_m(double t, const Mode& m, double nu) const {
        return m1(t, m, nu) * m2(t, m) * m3(t, m);
    }
    const M3Evaluator& m3_evaluator() const { return *m3_; }

private:
    MultiplierParams params_;
    std::shared_ptr<M3Evaluator> m3_;  // immutable once built, shareable
};

/// Cached per-mode multiplier values on a grid at one time. frame_offset is
/// the remap origin: stored xi indices are shifted back to their absolute
/// y-frequency xi + k * frame_offset before evaluating the symbols.
struct MultiplierState {
    double t = 0.0;
    double nu = 0.0;
    GridSpec grid;
    std::vector<double> phi, m1, m2, m3, dtm3_over_m3;

    static MultiplierState build(const GridSpec& g, double t, const MultiplierSet& set,
                                 double nu, double frame_offset = 0.0) {
        MultiplierState s;
        s.t = t;
        s.nu = nu;
        s.grid = g;
        std::size_t n = g.num_modes();
        s.phi.resize(n);
        s.m1.resize(n);
        s.m2.resize(n);
        s.m3.resize(n);
        s.dtm3_over_m3.resize(n);
        // m1, m3 and its log-derivative depend on (k, xi) only: evaluate once
        // per (i, j) slice and broadcast along eta.
        std::size_t idx = 0;
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                double k = g.kx(i), xi = g.ky(j) + k * frame_offset;
                double m1v = eval_m1(t, k, xi, nu);
                double m3v = set.m3_evaluator().m3(t, k, xi);
                double dtv = set.m3_evaluator().dtm3_over_m3(t, k, xi);
                for (int l = 0; l < g.nz; ++l, ++idx) {
                    Mode m{k, xi, g.kz(l)};
                    s.phi[idx] = set.phi(t, m, nu);
                    s.m1[idx] = m1v;
                    s.m2[idx] = set.m2(t, m);
                    s.m3[idx] = m3v;
                    s.dtm3_over_m3[idx] = dtv;
                }
            }
        return s;
    }

    double a_weight(std::size_t idx, double delta2) const {
        return std::exp(delta2 * std::cbrt(nu) * t) /
               (std::sqrt(phi[idx]) * (m1[idx] * m2[idx] * m3[idx]));
    }
};

enum class WeightKind { A, UpsilonA, A0, Upsilon0A0 };

/// Apply one of the energy-functional weights mode by mode:
///   A          phi^{-1/2} m^{-1} e^{delta2 nu^{1/3} t}
///   UpsilonA   additionally sqrt(dt m3 / m3)
///   A0         m3^{-1}(t, 0, xi) on k = 0 fields
///   Upsilon0A0 additionally sqrt(dt m3 / m3)(t, 0, xi)
inline SpectralField weight(const SpectralField& f, double t, WeightKind kind,
                            const MultiplierSet& set, double nu) {
    if (kind == WeightKind::A0 || kind == WeightKind::Upsilon0A0)
        require_zero_mode_only(f, "weight(A0)");
    SpectralField out = f;
    double grow = std::exp(set.params().delta2 * std::cbrt(nu) * t);
    for (int c = 0; c < out.n_components(); ++c)
        out.for_each_mode(c, [&](int, int, int, const Mode& m, Complex& v) {
            switch (kind) {
                case WeightKind::A:
                case WeightKind::UpsilonA: {
                    double w = grow / (std::sqrt(set.phi(t, m, nu)) * set.combined_m(t, m, nu));
                    if (kind == WeightKind::UpsilonA) w *= std::sqrt(set.dtm3_over_m3(t, m));
                    v *= w;
                    break;
                }
                case WeightKind::A0:
                case WeightKind::Upsilon0A0: {
                    Mode m0{0.0, m.xi, 0.0};
                    double w = 1.0 / set.m3(t, m0);
                    if (kind == WeightKind::Upsilon0A0) w *= std::sqrt(set.dtm3_over_m3(t, m0));
                    v *= w;
                    break;
                }
            }
        });
    return out;
}

}  // namespace rotstab
