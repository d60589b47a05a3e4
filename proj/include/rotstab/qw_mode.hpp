#pragma once

#include <array>

#include "rotstab/field.hpp"
#include "rotstab/regime.hpp"

namespace rotstab {

/// One sampled (Q, W) pair of a single nonzero-frequency mode.
struct QwSample {
    double t;
    Complex q, w;
};

using QwTrajectory = std::vector<QwSample>;

/// Non-autonomous linear system of one (k != 0) mode of the good unknowns:
///
///   dQ/dt = C_beta (i eta / sqrt(p)) W - nu p Q
///   dW/dt = C_beta (i eta / sqrt(p)) Q + (p'/p)/2 W - nu p W
///
/// integrated with a classical RK4 on the heat-factored variables (the exact
/// factor exp(-nu int p) is applied per step), dt capped at
/// 0.1 min(1, p^{-1/2}) and controlled by step doubling to 1e-10 local error.
class QwModeIntegrator {
public:
    QwModeIntegrator(const Mode& mode, const PhysicalParams& params)
        : mode_(mode), params_(params), c_beta_(params.C_beta()) {
        if (mode.k == 0.0)
            throw ContractViolation("QwModeIntegrator: k = 0 modes have no (Q,W) dynamics");
    }

    /// Advance (q, w) from t0 to t1 and append samples roughly every
    /// sample_dt (always at t1).
    void propagate(double t0, double t1, Complex& q, Complex& w, double sample_dt,
                   QwTrajectory* out = nullptr) const {
        double t = t0;
        double next_sample = t0 + sample_dt;
        if (out && out->empty()) out->push_back({t0, q, w});
        while (t < t1 - 1e-14) {
            double dt = std::min(step_cap(t), t1 - t);
            while (true) {
                Complex q1 = q, w1 = w;
                step_rk4(t, dt, q1, w1);
                Complex q2 = q, w2 = w;
                step_rk4(t, 0.5 * dt, q2, w2);
                step_rk4(t + 0.5 * dt, 0.5 * dt, q2, w2);
                double scale = std::abs(q2) + std::abs(w2) + 1e-300;
                double err = (std::abs(q1 - q2) + std::abs(w1 - w2)) / 15.0;
                if (err <= 1e-10 * scale || dt < 1e-12) {
                    q = q2;
                    w = w2;
                    t += dt;
                    break;
                }
                dt *= 0.5;
            }
            if (!std::isfinite(std::abs(q)) || !std::isfinite(std::abs(w)))
                throw DivergenceError("QwModeIntegrator: non-finite state", t);
            if (out && (t >= next_sample - 1e-12 || t >= t1 - 1e-14)) {
                out->push_back({t, q, w});
                next_sample += sample_dt;
            }
        }
    }

    /// Closed forms for the decoupled case C_beta = 0 (test oracles):
    /// Q(t) = Q0 exp(-nu int_0^t p), W(t) = W0 sqrt(p(t)/p(0)) exp(-nu int p).
    Complex exact_q_decoupled(Complex q0, double t) const {
        return q0 * std::exp(-params_.nu * shear_p_integral(mode_, 0.0, t));
    }
    Complex exact_w_decoupled(Complex w0, double t) const {
        double ratio = std::sqrt(shear_p(mode_, t) / shear_p(mode_, 0.0));
        return w0 * ratio * std::exp(-params_.nu * shear_p_integral(mode_, 0.0, t));
    }

private:
    double step_cap(double t) const {
        double p = shear_p(mode_, t);
        double cap = 0.1 * std::min(1.0, 1.0 / std::sqrt(p));
        // Keep the within-step heat factor and stretching well resolved.
        double rate = params_.nu * p + std::abs(shear_dp(mode_, t)) / p + std::abs(c_beta_);
        if (rate > 0.0) cap = std::min(cap, 0.5 / rate);
        return cap;
    }

    // RHS on the heat-factored variables: coupling + stretching only.
    void rhs(double t, Complex q, Complex w, Complex& dq, Complex& dw) const {
        double p = shear_p(mode_, t);
        Complex coupling = Complex(0.0, c_beta_ * mode_.eta / std::sqrt(p));
        dq = coupling * w;
        dw = coupling * q + 0.5 * (shear_dp(mode_, t) / p) * w;
    }

    void step_rk4(double t, double dt, Complex& q, Complex& w) const {
        Complex k1q, k1w, k2q, k2w, k3q, k3w, k4q, k4w;
        rhs(t, q, w, k1q, k1w);
        rhs(t + 0.5 * dt, q + 0.5 * dt * k1q, w + 0.5 * dt * k1w, k2q, k2w);
        rhs(t + 0.5 * dt, q + 0.5 * dt * k2q, w + 0.5 * dt * k2w, k3q, k3w);
        rhs(t + dt, q + dt * k3q, w + dt * k3w, k4q, k4w);
        q += dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        w += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        double heat = std::exp(-params_.nu * shear_p_integral(mode_, t, t + dt));
        q *= heat;
        w *= heat;
    }

    Mode mode_;
    PhysicalParams params_;
    double c_beta_;
};

/// Spec-level entry point: propagate one mode over [0, t_end], sampling every
/// sample_dt.
inline QwTrajectory qw_linear_propagate(const Mode& mode, double t_end, double sample_dt,
                                        Complex q0, Complex w0, const PhysicalParams& params) {
    QwModeIntegrator integ(mode, params);
    QwTrajectory traj;
    Complex q = q0, w = w0;
    integ.propagate(0.0, t_end, q, w, sample_dt, &traj);
    return traj;
}

/// A k = 1 wave packet: Gaussian amplitudes in (xi, eta) centered at the
/// critical-layer origin xi/k = t0.
struct QwPacket {
    std::vector<Mode> modes;
    std::vector<double> amplitudes;

    static QwPacket critical_layer(double t0, int n_xi, int n_eta, double dxi, double deta,
                                   double sigma_xi = 1.0, double sigma_eta = 1.0) {
        QwPacket p;
        for (int a = -n_xi; a <= n_xi; ++a)
            for (int b = 0; b <= n_eta; ++b) {
                double xi = t0 + a * dxi;
                double eta = (b == 0) ? 0.5 * deta : b * deta;  // stay off eta = 0
                double amp = std::exp(-0.5 * (a * dxi / sigma_xi) * (a * dxi / sigma_xi) -
                                      0.5 * (eta / sigma_eta) * (eta / sigma_eta));
                p.modes.push_back({1.0, xi, eta});
                p.amplitudes.push_back(amp);
            }
        return p;
    }
};

/// Packet time series: for each sample time, the packet l2 norms of Q, W and
/// of the inviscid-damping diagnostic Delta_tilde^{-1} Q = -Q/p.
struct QwPacketSeries {
    std::vector<double> t;
    std::vector<double> qw_norm;      // sqrt(sum |Q|^2 + |W|^2)
    std::vector<double> u2_norm;      // sqrt(sum |Q/p|^2)
    std::vector<double> q_norm;
};

inline QwPacketSeries qw_packet_evolve(const QwPacket& packet, const PhysicalParams& params,
                                       double t_end, double sample_dt) {
    QwPacketSeries series;
    std::size_t n_samples = static_cast<std::size_t>(std::floor(t_end / sample_dt + 1e-9)) + 1;
    series.t.resize(n_samples);
    series.qw_norm.assign(n_samples, 0.0);
    series.u2_norm.assign(n_samples, 0.0);
    series.q_norm.assign(n_samples, 0.0);
    for (std::size_t s = 0; s < n_samples; ++s) series.t[s] = s * sample_dt;
    for (std::size_t im = 0; im < packet.modes.size(); ++im) {
        const Mode& m = packet.modes[im];
        QwModeIntegrator integ(m, params);
        Complex q = packet.amplitudes[im], w = packet.amplitudes[im];
        for (std::size_t s = 0; s < n_samples; ++s) {
            if (s > 0) integ.propagate(series.t[s - 1], series.t[s], q, w, t_end);
            double p = shear_p(m, series.t[s]);
            series.qw_norm[s] += std::norm(q) + std::norm(w);
            series.u2_norm[s] += std::norm(q) / (p * p);
            series.q_norm[s] += std::norm(q);
        }
    }
    for (std::size_t s = 0; s < n_samples; ++s) {
        series.qw_norm[s] = std::sqrt(series.qw_norm[s]);
        series.u2_norm[s] = std::sqrt(series.u2_norm[s]);
        series.q_norm[s] = std::sqrt(series.q_norm[s]);
    }
    return series;
}

/// First time the series norm falls below 1/e of its initial value
/// (linear interpolation between samples); NaN if it never does.
inline double efolding_time(const std::vector<double>& t, const std::vector<double>& norm) {
    double target = norm.front() / std::numbers::e;
    for (std::size_t i = 1; i < t.size(); ++i)
        if (norm[i] <= target) {
            double f = (norm[i - 1] - target) / std::max(norm[i - 1] - norm[i], 1e-300);
            return t[i - 1] + f * (t[i] - t[i - 1]);
        }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace rotstab
