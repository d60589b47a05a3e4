#pragma once

#include "rotstab/checkpoint.hpp"
#include "rotstab/initial_data.hpp"
#include "rotstab/norms.hpp"
#include "rotstab/regime.hpp"
#include "rotstab/zero_mode.hpp"

namespace rotstab {

struct SolverConfig {
    GridSpec grid;
    PhysicalParams params;
    InitialData initial;
    double cfl = 0.45;
    bool linearized = false;  // drop the quadratic transport term
};

/// Moving-frame solver state. Spectral symbols are evaluated at the shear
/// age t - last_remap; remap() folds accumulated shear back into the stored
/// xi indices.
struct SolverState {
    double t = 0.0;
    SpectralField u_hat;  // 3-component moving-frame velocity
    double last_remap = 0.0;
    PhysicalParams params;
    GridSpec grid;
    double discarded_energy = 0.0;
    long step_count = 0;
    // Work done on the perturbation by the background shear,
    // int_0^t -2 <u^1, u^2> ds, accumulated at RK4 order. At nu = 0 the
    // balance ||u(t)||^2 - ||u(0)||^2 - shear_work is a pure discretization
    // residual (Coriolis and transport do no work).
    double shear_work = 0.0;

    double shear_age() const { return t - last_remap; }
};

/// Pseudo-spectral integrator for the perturbation system around Couette
/// flow in the sheared frame:
///
///   dU/dt = P_tilde[ -U.grad_tilde U - ((1-beta) U^2, beta U^1, 0) ]
///           + k ktilde U^2 / p  +  nu Delta_tilde U,
///
/// where the last algebraic term keeps the time-dependent constraint
/// ktilde(t).U = 0 invariant and the heat factor exp(-nu int p) is applied
/// exactly per mode (integrating-factor RK4). The quadratic term is computed
/// pseudo-spectrally in divergence form with 2/3-rule dealiasing.
class NscSolver {
public:
    explicit NscSolver(const SolverConfig& cfg) : cfg_(cfg) {
        cfg_.grid.validate();
        cfg_.params.validate();
        st_.t = 0.0;
        st_.last_remap = 0.0;
        st_.params = cfg_.params;
        st_.grid = cfg_.grid;
        st_.u_hat = generate_initial_field(cfg_.grid, cfg_.initial);
        n_ = cfg_.grid.num_modes();
        // Flat per-mode wavenumber tables for the hot loops.
        const GridSpec& g = cfg_.grid;
        kx_.resize(n_);
        ky_.resize(n_);
        kz_.resize(n_);
        keep_.resize(n_);
        std::size_t idx = 0;
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                for (int l = 0; l < g.nz; ++l, ++idx) {
                    kx_[idx] = g.kx(i);
                    ky_[idx] = g.ky(j);
                    kz_[idx] = g.kz(l);
                    keep_[idx] = g.retained(i, j, l) ? 1 : 0;
                }
    }

    const SolverState& state() const { return st_; }
    SolverState& state() { return st_; }
    const SolverConfig& config() const { return cfg_; }

    /// Largest stable step for the current state (advective CFL on the
    /// tilted grid); infinity for linearized runs.
    double cfl_bound() {
        if (cfg_.linearized) return std::numeric_limits<double>::infinity();
        double vmax[3];
        max_velocity(st_.u_hat, vmax);
        return cfl_bound_from(vmax);
    }

    /// One integrating-factor RK4 step of size dt.
    void step(double dt) {
        if (dt <= 0.0) throw ContractViolation("step: dt must be > 0");
        double tau0 = st_.shear_age();

        // Exact per-mode heat factors over the two half intervals.
        e_half_.resize(n_);
        e_mid_.resize(n_);
        e_full_.resize(n_);
        const double nu = cfg_.params.nu;
        for (std::size_t m = 0; m < n_; ++m) {
            if (nu == 0.0) {
                e_half_[m] = e_mid_[m] = e_full_[m] = 1.0;
                continue;
            }
            Mode mo{kx_[m], ky_[m], kz_[m]};
            double i1 = nu * shear_p_integral(mo, tau0, tau0 + 0.5 * dt);
            double i2 = nu * shear_p_integral(mo, tau0 + 0.5 * dt, tau0 + dt);
            e_half_[m] = std::exp(-i1);
            e_mid_[m] = std::exp(-i2);
            e_full_[m] = e_half_[m] * e_mid_[m];
        }

        const SpectralField& u0 = st_.u_hat;
        alloc_stage(k1_);
        alloc_stage(k2_);
        alloc_stage(k3_);
        alloc_stage(k4_);
        alloc_stage(us_);
        alloc_stage(next_);

        rhs(u0, tau0, /*check_cfl=*/!cfg_.linearized, dt, k1_);
        double prod = production(u0);

        // u2 = E_half (u0 + dt/2 k1)
        combine(us_, u0, k1_, 0.5 * dt, e_half_.data(), nullptr);
        rhs(us_, tau0 + 0.5 * dt, false, dt, k2_);
        prod += 2.0 * production(us_);

        // u3 = E_half u0 + dt/2 k2
        combine(us_, u0, k2_, 0.5 * dt, nullptr, e_half_.data());
        rhs(us_, tau0 + 0.5 * dt, false, dt, k3_);
        prod += 2.0 * production(us_);

        // u4 = E_full u0 + dt E_mid k3
        combine4(us_, u0, k3_, dt);
        rhs(us_, tau0 + dt, false, dt, k4_);
        prod += production(us_);

        // next = E_full (u0 + dt/6 k1) + dt/3 E_mid (k2 + k3) + dt/6 k4,
        // projected at tau0 + dt, dealiased, in one fused pass.
        finish_step(u0, tau0 + dt, dt);

        double e = next_.coeff_l2_sq();
        if (!std::isfinite(e))
            throw DivergenceError("step: solution diverged (non-finite energy)", st_.t);

        st_.shear_work += dt / 6.0 * prod;
        std::swap(st_.u_hat, next_);
        st_.u_hat.enforce_hermitian();
        st_.t += dt;
        st_.step_count++;
    }

    /// d/dt ||u||^2 contribution of the lift/rotation linear term,
    /// -2 <u^1, u^2>_{L^2} (the Coriolis part cancels exactly).
    double production(const SpectralField& u) const {
        double s = 0.0;
        const Complex* a = u.component(0);
        const Complex* b = u.component(1);
        for (std::size_t i = 0; i < n_; ++i)
            s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        return -2.0 * cfg_.grid.volume() * s;
    }

    /// Fold the accumulated shear into the xi indices (integer shift per k).
    /// Modes tilted beyond the grid are discarded and their energy logged.
    void remap() {
        const GridSpec& g = cfg_.grid;
        double s = st_.shear_age();
        double dxi = 2.0 * pi / g.Ly;
        double shift = s / dxi;
        long m = std::lround(shift);
        if (std::abs(shift - m) > 1e-9)
            throw SchedulingError(
                "remap: accumulated shear " + std::to_string(s) +
                " is not an integer number of xi-grid steps (needs multiples of 2*pi/L_y)");
        if (m == 0) {
            st_.last_remap = st_.t;
            return;
        }
        SpectralField next(g, 3);
        double lost = 0.0;
        // Modes shifted past the dealiasing cut carry tilt the refreshed
        // frame cannot represent; they are dropped and their energy logged.
        const long keep = std::min<long>(g.ny / 2 - 1, g.dealias_cut(g.ny));
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < g.nx; ++i) {
                long ki = GridSpec::signed_index(i, g.nx);
                for (int j = 0; j < g.ny; ++j) {
                    long sj = GridSpec::signed_index(j, g.ny);
                    long sj2 = sj - ki * m;
                    for (int l = 0; l < g.nz; ++l) {
                        const Complex& val = st_.u_hat.at(c, i, j, l);
                        if (std::abs(sj2) <= keep) {
                            int j2 = static_cast<int>((sj2 + g.ny) % g.ny);
                            next.at(c, i, j2, l) = val;
                        } else {
                            lost += std::norm(val);
                        }
                    }
                }
            }
        st_.discarded_energy += g.volume() * lost;
        st_.u_hat = std::move(next);
        st_.last_remap = st_.t;
    }

private:
    void alloc_stage(SpectralField& f) {
        if (f.modes_per_component() != n_ || f.n_components() != 3)
            f = SpectralField(cfg_.grid, 3);
    }

    // out = ea (u + a k)   when eb == nullptr
    // out = eb u + a k     when ea == nullptr
    void combine(SpectralField& out, const SpectralField& u, const SpectralField& k, double a,
                 const double* ea, const double* eb) const {
        for (int c = 0; c < 3; ++c) {
            Complex* o = out.component(c);
            const Complex* uu = u.component(c);
            const Complex* kk = k.component(c);
            if (ea)
                for (std::size_t m = 0; m < n_; ++m) o[m] = ea[m] * (uu[m] + a * kk[m]);
            else
                for (std::size_t m = 0; m < n_; ++m) o[m] = eb[m] * uu[m] + a * kk[m];
        }
    }

    // out = E_full u + dt E_mid k
    void combine4(SpectralField& out, const SpectralField& u, const SpectralField& k,
                  double dt) const {
        for (int c = 0; c < 3; ++c) {
            Complex* o = out.component(c);
            const Complex* uu = u.component(c);
            const Complex* kk = k.component(c);
            for (std::size_t m = 0; m < n_; ++m)
                o[m] = e_full_[m] * uu[m] + dt * e_mid_[m] * kk[m];
        }
    }

    // next = E_full (u0 + dt/6 k1) + dt/3 E_mid (k2+k3) + dt/6 k4, then the
    // projection at the new shear age and the dealias mask, fused.
    void finish_step(const SpectralField& u0, double tau1, double dt) {
        const Complex* uu[3] = {u0.component(0), u0.component(1), u0.component(2)};
        const Complex* a1[3] = {k1_.component(0), k1_.component(1), k1_.component(2)};
        const Complex* a2[3] = {k2_.component(0), k2_.component(1), k2_.component(2)};
        const Complex* a3[3] = {k3_.component(0), k3_.component(1), k3_.component(2)};
        const Complex* a4[3] = {k4_.component(0), k4_.component(1), k4_.component(2)};
        Complex* o[3] = {next_.component(0), next_.component(1), next_.component(2)};
        for (std::size_t m = 0; m < n_; ++m) {
            if (!keep_[m]) {
                o[0][m] = o[1][m] = o[2][m] = 0.0;
                continue;
            }
            double kt[3] = {kx_[m], ky_[m] - kx_[m] * tau1, kz_[m]};
            double p = kt[0] * kt[0] + kt[1] * kt[1] + kt[2] * kt[2];
            Complex v[3], dot(0.0, 0.0);
            for (int c = 0; c < 3; ++c) {
                v[c] = e_full_[m] * (uu[c][m] + dt / 6.0 * a1[c][m]) +
                       dt / 3.0 * e_mid_[m] * (a2[c][m] + a3[c][m]) + dt / 6.0 * a4[c][m];
                dot += kt[c] * v[c];
            }
            if (p > 0.0) {
                dot /= p;
                for (int c = 0; c < 3; ++c) v[c] -= kt[c] * dot;
            }
            for (int c = 0; c < 3; ++c) o[c][m] = v[c];
        }
    }

    void max_velocity(const SpectralField& u, double vmax[3]) {
        for (int c = 0; c < 3; ++c) {
            auto phys = to_physical(u, c);
            double worst = 0.0;
            for (const auto& v : phys) worst = std::max(worst, std::abs(v.real()));
            vmax[c] = worst;
        }
    }

    double cfl_bound_from(const double vmax[3]) const {
        const GridSpec& g = cfg_.grid;
        // Advective rate on the tilted grid: the y wavenumber reaches
        // ky_max + kx_max * s before the next remap folds the tilt back.
        double s_max = st_.shear_age() + 2.0 * pi / g.Ly;
        double kx = g.dealias_cut(g.nx);
        double ky = g.dealias_cut(g.ny) * 2.0 * pi / g.Ly + kx * s_max;
        double kz = g.dealias_cut(g.nz) * 2.0 * pi / g.Lz;
        double rate = vmax[0] * kx + vmax[1] * ky + vmax[2] * kz;
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return cfg_.cfl * 2.8 / rate;  // RK4 imaginary-axis stability extent
    }

    /// Non-viscous right-hand side at shear age tau: projected transport +
    /// Coriolis/lift term, plus the frame-consistency term k ktilde U^2 / p.
    void rhs(const SpectralField& u, double tau, bool check_cfl, double dt,
             SpectralField& out) {
        const GridSpec& g = cfg_.grid;
        const double beta = cfg_.params.beta;
        const bool nonlinear = !cfg_.linearized;

        if (nonlinear) {
            for (int c = 0; c < 3; ++c) {
                phys_[c].resize(n_);
                Fft::instance().backward(g, u.component(c), phys_[c].data());
            }
            if (check_cfl) {
                double vmax[3];
                for (int c = 0; c < 3; ++c) {
                    double worst = 0.0;
                    for (const auto& v : phys_[c]) worst = std::max(worst, std::abs(v.real()));
                    vmax[c] = worst;
                }
                double bound = cfl_bound_from(vmax);
                if (dt > bound)
                    throw CflError("step: dt " + std::to_string(dt) +
                                       " exceeds the CFL bound " + std::to_string(bound),
                                   0.9 * bound);
            }
            // Divergence form: N_i = -i ktilde_a (u_a u_i)^
            static constexpr int pair_a[6] = {0, 0, 0, 1, 1, 2};
            static constexpr int pair_b[6] = {0, 1, 2, 1, 2, 2};
            prod_.resize(n_);
            for (int q = 0; q < 6; ++q) {
                const Complex* pa = phys_[pair_a[q]].data();
                const Complex* pb = phys_[pair_b[q]].data();
                for (std::size_t m = 0; m < n_; ++m) prod_[m] = pa[m] * pb[m];
                what_[q].resize(n_);
                Fft::instance().forward(g, prod_.data(), what_[q].data());
            }
        }

        // Index of (a,b) in the symmetric product storage.
        static constexpr int sym[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
        const Complex* uu[3] = {u.component(0), u.component(1), u.component(2)};
        Complex* o[3] = {out.component(0), out.component(1), out.component(2)};
        for (std::size_t m = 0; m < n_; ++m) {
            double kt[3] = {kx_[m], ky_[m] - kx_[m] * tau, kz_[m]};
            Complex r[3];
            if (nonlinear && keep_[m]) {
                for (int ci = 0; ci < 3; ++ci) {
                    Complex div = kt[0] * what_[sym[0][ci]][m] +
                                  kt[1] * what_[sym[1][ci]][m] +
                                  kt[2] * what_[sym[2][ci]][m];
                    r[ci] = Complex(div.imag(), -div.real());  // -i * div
                }
            } else {
                r[0] = r[1] = r[2] = Complex(0.0, 0.0);
            }
            Complex w2 = uu[1][m];
            r[0] -= (1.0 - beta) * w2;
            r[1] -= beta * uu[0][m];
            double p = kt[0] * kt[0] + kt[1] * kt[1] + kt[2] * kt[2];
            if (p > 0.0) {
                Complex dot = (kt[0] * r[0] + kt[1] * r[1] + kt[2] * r[2] - kt[0] * w2) / p;
                r[0] -= kt[0] * dot;
                r[1] -= kt[1] * dot;
                r[2] -= kt[2] * dot;
            }
            o[0][m] = r[0];
            o[1][m] = r[1];
            o[2][m] = r[2];
        }
    }

    SolverConfig cfg_;
    SolverState st_;
    std::size_t n_ = 0;
    std::vector<double> kx_, ky_, kz_;
    std::vector<char> keep_;
    std::vector<Complex> phys_[3];
    std::vector<Complex> prod_;
    std::vector<Complex> what_[6];
    std::vector<double> e_half_, e_mid_, e_full_;
    SpectralField k1_, k2_, k3_, k4_, us_, next_;
};

/// What to pull out of a solver state.
enum class Extract { u0, U_neq, Q, W, Wpm_plus, Wpm_minus, upsilon0 };

/// Q = Delta_tilde U^2 (nonzero modes only).
inline SpectralField extract_q(const SolverState& st) {
    const GridSpec& g = st.grid;
    double tau = st.shear_age();
    SpectralField q(g, 1);
    for (int i = 1; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) {
                Mode m{g.kx(i), g.ky(j), g.kz(l)};
                q.at(0, i, j, l) = -shear_p(m, tau) * st.u_hat.at(1, i, j, l);
            }
    return q;
}

/// W = sqrt(beta/(beta-1)) |grad_tilde| (dz U^1 - dx U^3) (nonzero modes).
inline SpectralField extract_w(const SolverState& st) {
    double pref = st.params.w_prefactor();
    const GridSpec& g = st.grid;
    double tau = st.shear_age();
    SpectralField w(g, 1);
    for (int i = 1; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) {
                Mode m{g.kx(i), g.ky(j), g.kz(l)};
                Complex curl2 = Complex(0.0, m.eta) * st.u_hat.at(0, i, j, l) -
                                Complex(0.0, m.k) * st.u_hat.at(2, i, j, l);
                w.at(0, i, j, l) = pref * std::sqrt(shear_p(m, tau)) * curl2;
            }
    return w;
}

/// Invert the (Q, W) map back to the nonzero-mode velocity:
///   U^2 = Delta_tilde^{-1} Q,
///   U^1 = (dx^2+dz^2)^{-1} ( sqrt((b-1)/b) dz |gt|^{-1} W - dx dyt Delta_t^{-1} Q ),
///   U^3 = -(dx^2+dz^2)^{-1} ( sqrt((b-1)/b) dx |gt|^{-1} W + dyt dz Delta_t^{-1} Q ).
inline SpectralField u_neq_from_qw(const SpectralField& q, const SpectralField& w, double tau,
                                   const PhysicalParams& params) {
    double pref = params.w_prefactor();
    if (pref == 0.0) throw RegimeError("u_neq_from_qw: needs beta/(beta-1) > 0");
    double inv_pref = 1.0 / pref;  // sqrt((beta-1)/beta)
    const GridSpec& g = q.grid();
    SpectralField u(g, 3);
    for (int i = 1; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) {
                Mode m{g.kx(i), g.ky(j), g.kz(l)};
                double ty = shear_tilt(m, tau);
                double p = m.k * m.k + ty * ty + m.eta * m.eta;
                double kz2 = m.k * m.k + m.eta * m.eta;
                Complex qq = q.at(0, i, j, l), ww = w.at(0, i, j, l);
                Complex u2 = -qq / p;
                Complex wpart = inv_pref * ww / std::sqrt(p);
                u.at(1, i, j, l) = u2;
                u.at(0, i, j, l) =
                    -(Complex(0.0, m.eta) * wpart - m.k * ty * qq / p) / kz2;
                u.at(2, i, j, l) =
                    (Complex(0.0, m.k) * wpart + m.eta * ty * qq / p) / kz2;
            }
    return u;
}

/// Extract a named diagnostic field from the state.
inline SpectralField extract(const SolverState& st, Extract what) {
    switch (what) {
        case Extract::u0: return collapse_zero_modes(st.u_hat);
        case Extract::U_neq: return project_nonzero_modes(st.u_hat);
        case Extract::Q: return extract_q(st);
        case Extract::W: return extract_w(st);
        case Extract::upsilon0:
            return upsilon0_from_u0(collapse_zero_modes(st.u_hat), st.params);
        case Extract::Wpm_plus:
        case Extract::Wpm_minus: {
            auto [wp, wm] = wpm_from_u0(collapse_zero_modes(st.u_hat), st.params);
            return what == Extract::Wpm_plus ? wp : wm;
        }
    }
    throw ContractViolation("extract: unknown kind");
}

}  // namespace rotstab
