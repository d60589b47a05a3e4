#pragma once

#include <complex>

#include "rotstab/grid.hpp"
#include "rotstab/quadrature.hpp"
#include "rotstab/rate_fit.hpp"

namespace rotstab {

using Complex = std::complex<double>;

/// Smooth radial cutoff A(r) = chi_{-1} + chi_0 + chi_1 of a standard dyadic
/// partition: A = theta(r/2) - theta(4r) with theta a C-infinity step that is
/// 1 on [0,1] and 0 on [2,inf). Support [1/4, 4], identically 1 on [1/2, 2].
struct BumpProfile {
    /// C-infinity monotone step: 1 for s <= 0, 0 for s >= 1.
    static double smooth_step_down(double s) {
        if (s <= 0.0) return 1.0;
        if (s >= 1.0) return 0.0;
        double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
        return b / (a + b);
    }
    static double theta(double r) { return smooth_step_down(r - 1.0); }
    /// One dyadic piece chi_j(r) = theta(2^{-j} r) - theta(2^{-j+1} r).
    static double chi(int j, double r) {
        double s = std::ldexp(r, -j);  // 2^{-j} r
        return theta(s) - theta(2.0 * s);
    }
    static double A(double r) { return theta(0.5 * r) - theta(4.0 * r); }
};

/// B(z) = int_0^inf e^{irz} A(r) r^{power} dr by adaptive quadrature.
inline Complex eval_B(double z, double power = 1.0, double tol = 1e-10,
                      double* err_out = nullptr) {
    auto f = [z, power](double r) {
        return std::exp(Complex(0.0, r * z)) * BumpProfile::A(r) * std::pow(r, power);
    };
    // Support is [1/4, 4]; oscillation count ~ |z| 3.75 / 2 pi.
    return integrate_adaptive<Complex>(f, 0.25, 4.0, tol, 0.0, 48, err_out);
}

/// Dense Hermite-tabulated B for the kernel scans (millions of evaluations).
class BumpTransform {
public:
    explicit BumpTransform(double power, double z_max = 64.0, double dz = 0.005)
        : power_(power), z_max_(z_max), dz_(dz) {
        int n = static_cast<int>(z_max / dz) + 1;
        val_.resize(n);
        der_.resize(n);
        for (int i = 0; i < n; ++i) {
            double z = i * dz_;
            val_[i] = eval_B(z, power_, 1e-11);
            // dB/dz = i int e^{irz} A r^{power+1} dr
            der_[i] = Complex(0.0, 1.0) * eval_B(z, power_ + 1.0, 1e-11);
        }
    }

    Complex operator()(double z) const {
        double az = std::abs(z);
        if (az >= z_max_) return decay_bound(az);
        double u = az / dz_;
        int i = std::min(static_cast<int>(u), static_cast<int>(val_.size()) - 2);
        double x = u - i, x2 = x * x, x3 = x2 * x;
        Complex v = val_[i] * (2 * x3 - 3 * x2 + 1) + val_[i + 1] * (-2 * x3 + 3 * x2) +
                    dz_ * (der_[i] * (x3 - 2 * x2 + x) + der_[i + 1] * (x3 - x2));
        return z >= 0.0 ? v : std::conj(v);
    }

    double power() const { return power_; }

private:
    /// Beyond the table B is negligible (Schwartz decay); clamp to the last
    /// tabulated magnitude scaled by the integration-by-parts envelope.
    Complex decay_bound(double az) const {
        double tail = std::abs(val_.back()) * std::pow(z_max_ / az, 3.0);
        return Complex(tail, 0.0);
    }

    double power_;
    double z_max_, dz_;
    std::vector<Complex> val_, der_;
};

/// One sup-scan sample of a kernel at fixed time.
struct KernelSample {
    double t = 0.0;
    double sup = 0.0;
    double err_estimate = 0.0;
    double arg_rho = 0.0, arg_phi = 0.0;  // where the sup was attained
};

namespace detail {

/// Composite Gauss-Kronrod of f over [a, b] with the panel count matched to
/// the number of phase oscillations.
template <class F>
Complex oscillatory_panels(const F& f, double a, double b, double cycles, double& err) {
    int n = std::max(4, static_cast<int>(std::ceil(2.0 * cycles)) + 2);
    Complex total{};
    err = 0.0;
    double h = (b - a) / n;
    for (int p = 0; p < n; ++p) {
        Complex v{};
        double e = 0.0;
        gk::panel(f, a + p * h, a + (p + 1) * h, v, e);
        total += v;
        err += e;
    }
    return total;
}

}  // namespace detail

/// K(t, rho, phi) = int_{-pi}^{pi} e^{i t sin(theta)} B(rho cos(theta-phi)) dtheta
/// (the polar form of the dispersive kernel; with_cos adds the cos(theta)
/// factor of the improved kernel M). Panels split at the stationary points
/// theta = +-pi/2 with half-width delta = t^{-1/2}.
inline Complex eval_kernel_polar(double t, double rho, double phi, const BumpTransform& B,
                                 bool with_cos, double& err) {
    auto f = [&](double theta) {
        Complex v = std::exp(Complex(0.0, t * std::sin(theta))) *
                    B(rho * std::cos(theta - phi));
        return with_cos ? v * std::cos(theta) : v;
    };
    double delta = std::min(0.4, 1.0 / std::sqrt(std::max(t, 1.0)));
    double cuts[6] = {-pi, -pi / 2 - delta, -pi / 2 + delta,
                      pi / 2 - delta, pi / 2 + delta, pi};
    Complex total{};
    err = 0.0;
    for (int r = 0; r < 5; ++r) {
        double a = cuts[r], b = cuts[r + 1];
        double phase_cycles = t * std::abs(std::sin(b) - std::sin(a)) / (2.0 * pi);
        double bump_cycles = 4.0 * rho * (b - a) / (2.0 * pi);
        double e = 0.0;
        total += detail::oscillatory_panels(f, a, b, phase_cycles + bump_cycles, e);
        err += e;
    }
    return total;
}

/// Sup of |K| (or |M|) over a (rho, phi) grid at fixed t >= 1.
inline KernelSample eval_kernel_sup(double t, const BumpTransform& B, bool with_cos,
                                    int n_rho = 36, int n_phi = 16, double rho_max = 50.0) {
    if (t < 1.0) throw ContractViolation("eval_kernel_sup: t must be >= 1");
    KernelSample s;
    s.t = t;
    for (int ir = 0; ir < n_rho; ++ir) {
        // Cluster rho samples toward small radii where B is largest.
        double f = static_cast<double>(ir) / (n_rho - 1);
        double rho = rho_max * f * f;
        // |K(t,rho,-phi)| = |K(t,rho,phi)|: scan [0, pi] only.
        for (int ip = 0; ip < n_phi; ++ip) {
            double phi = pi * ip / (n_phi - 1);
            double err = 0.0;
            double v = std::abs(eval_kernel_polar(t, rho, phi, B, with_cos, err));
            if (v > s.sup) {
                s.sup = v;
                s.arg_rho = rho;
                s.arg_phi = phi;
            }
            s.err_estimate = std::max(s.err_estimate, err);
        }
    }
    return s;
}

/// Decay-rate scan of sup|K| or sup|M| over a log-spaced t grid.
inline std::vector<KernelSample> kernel_sup_scan(const BumpTransform& B, bool with_cos,
                                                 double t_lo, double t_hi, int n_t) {
    std::vector<KernelSample> out;
    for (int i = 0; i < n_t; ++i) {
        double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (n_t - 1));
        out.push_back(eval_kernel_sup(t, B, with_cos));
    }
    return out;
}

inline RateFit kernel_rate_fit(const std::vector<KernelSample>& scan) {
    std::vector<double> t, v;
    for (const auto& s : scan) {
        t.push_back(s.t);
        v.push_back(s.sup);
    }
    return measure_rate(t, v, RateModel::power_law, t.front(), t.back(), 5);
}

/// Torus-direction dispersion: sup_y | int e^{i y xi - i gamma t l / sqrt(xi^2+l^2)}
/// psi(xi) dxi | for the bump psi(xi) = A(|xi| / 2^j), fitted over a t grid.
/// j = 0 probes the degenerate |xi| ~ |l|/sqrt(2) point (rate -1/3); large j
/// probes the nondegenerate branch (rate -1/2).
class TorusModeScan {
public:
    TorusModeScan(int l, double gamma, int j_scale) : l_(l), gamma_(gamma), j_(j_scale) {
        if (l == 0) throw ContractViolation("TorusModeScan: l must be nonzero");
    }

    double phase_velocity(double xi) const {  // -Phi'(xi), Phi = l/sqrt(xi^2+l^2)
        double s = xi * xi + double(l_) * l_;
        return double(l_) * xi / (s * std::sqrt(s));
    }

    /// |I(t, y)| by oscillation-matched composite quadrature.
    double modulus(double t, double y) const {
        double c = std::ldexp(1.0, j_);  // bump scale 2^j
        auto f = [&](double xi) {
            double s = std::sqrt(xi * xi + double(l_) * l_);
            return std::exp(Complex(0.0, y * xi - gamma_ * t * l_ / s)) *
                   BumpProfile::A(std::abs(xi) / c);
        };
        double err = 0.0;
        double cycles = (std::abs(y) * 8.0 * c + gamma_ * t * 0.5) / (2.0 * pi);
        Complex v = detail::oscillatory_panels(f, 0.25 * c, 4.0 * c, cycles, err) +
                    detail::oscillatory_panels(f, -4.0 * c, -0.25 * c, cycles, err);
        return std::abs(v);
    }

    /// sup over y: rail of stationary positions plus an Airy-width refinement
    /// around the caustic y_c = gamma t Phi'(l/sqrt(2)) when it is in range.
    double sup_over_y(double t) const {
        double c = std::ldexp(1.0, j_);
        double vmin = 1e300, vmax = -1e300;
        for (double xi = 0.25 * c; xi <= 4.0 * c; xi += 0.05 * c) {
            double v = gamma_ * t * phase_velocity(xi);
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
        double sup = 0.0;
        const int n_coarse = 120;
        for (int i = 0; i <= n_coarse; ++i) {
            double y = -(vmin + (vmax - vmin) * i / n_coarse);
            sup = std::max(sup, modulus(t, y));
        }
        double xi_star = double(std::abs(l_)) / std::sqrt(2.0);
        if (xi_star >= 0.25 * c && xi_star <= 4.0 * c) {
            double yc = -gamma_ * t * phase_velocity(xi_star);
            double width = std::pow(gamma_ * t, 1.0 / 3.0);
            for (int i = -60; i <= 60; ++i)
                sup = std::max(sup, modulus(t, yc + width * i / 10.0));
        }
        return sup;
    }

    RateFit decay_fit(double t_lo, double t_hi, int n_t) const {
        std::vector<double> t, v;
        for (int i = 0; i < n_t; ++i) {
            double tt = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (n_t - 1));
            t.push_back(tt);
            v.push_back(sup_over_y(tt));
        }
        return measure_rate(t, v, RateModel::power_law, t.front(), t.back(), 5);
    }

private:
    int l_;
    double gamma_;
    int j_;
};

}  // namespace rotstab
