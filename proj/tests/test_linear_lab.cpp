#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rotstab/qw_mode.hpp"
#include "rotstab/rate_fit.hpp"
#include "rotstab/zero_mode.hpp"

using namespace rotstab;

namespace {

GridSpec zero_grid(int n = 32, double L = 8.0 * pi) {
    GridSpec g;
    g.nx = 1;
    g.ny = g.nz = n;
    g.Ly = g.Lz = L;
    g.validate();
    return g;
}

/// Random solenoidal mean-free zero-mode velocity.
SpectralField random_u0(const GridSpec& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SpectralField u(g, 3);
    for (int j = 0; j < g.ny; ++j)
        for (int l = 0; l < g.nz; ++l) {
            Mode m{0.0, g.ky(j), g.kz(l)};
            double rho = std::hypot(m.xi, m.eta);
            if (rho == 0.0 || rho > 3.0) continue;
            u.at(0, 0, j, l) = Complex(normal(rng), normal(rng));
            Complex psi(normal(rng), normal(rng));
            u.at(1, 0, j, l) = psi * (m.eta / rho);
            u.at(2, 0, j, l) = psi * (-m.xi / rho);
        }
    u.enforce_hermitian();
    for (int c = 0; c < 3; ++c) u.at(c, 0, 0, 0) = 0.0;
    return u;
}

double max_coeff_diff(const SpectralField& a, const SpectralField& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i)
        worst = std::max(worst, std::abs(a.raw()[i] - b.raw()[i]));
    return worst;
}

}  // namespace

TEST_CASE("regime classification") {
    CHECK(classify_regime(0.0).classification == Regime::liftup);
    CHECK(classify_regime(1.0).classification == Regime::liftup);
    auto disp = classify_regime(2.0);
    CHECK(disp.classification == Regime::dispersive);
    CHECK(disp.B_beta == Catch::Approx(2.0));
    auto unstable = classify_regime(0.5);
    CHECK(unstable.classification == Regime::exponentially_unstable);
    CHECK(unstable.B_beta == Catch::Approx(-0.25));
}

TEST_CASE("zero-mode semigroup") {
    GridSpec g = zero_grid();
    PhysicalParams params{1e-3, 2.0};

    SECTION("t = 0 is the identity") {
        SpectralField w = random_u0(g, 3);
        SpectralField w1(g, 1);
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) w1.at(0, 0, j, l) = w.at(0, 0, j, l);
        CHECK(max_coeff_diff(zero_mode_semigroup(w1, 0.0, SemigroupSign::plus, params), w1) <
              1e-14);
    }

    SECTION("pure mode rotates by exp(-+ i sqrt(B) t) at nu = 0") {
        PhysicalParams inviscid{0.0, 2.0};
        SpectralField f(g, 1);
        int lq = 4;  // (xi, eta) = (0, eta>0)
        f.at(0, 0, 0, lq) = 1.0;
        double t = 2.37;
        SpectralField out = zero_mode_semigroup(f, t, SemigroupSign::plus, inviscid);
        // eta/rho = 1 for this mode
        Complex expect = std::exp(Complex(0.0, -std::sqrt(2.0) * t));
        CHECK(std::abs(out.at(0, 0, 0, lq) - expect) < 1e-13);
        CHECK(std::abs(std::abs(out.at(0, 0, 0, lq)) - 1.0) < 1e-13);
    }

    SECTION("eta = 0 modes see pure heat decay") {
        SpectralField f(g, 1);
        int jq = 3;
        f.at(0, 0, jq, 0) = 1.0;
        double t = 5.0, rho2 = g.ky(jq) * g.ky(jq);
        SpectralField out = zero_mode_semigroup(f, t, SemigroupSign::minus, params);
        CHECK(std::abs(out.at(0, 0, jq, 0) - std::exp(-params.nu * t * rho2)) < 1e-13);
    }

    SECTION("unitary per-mode modulus at nu = 0") {
        PhysicalParams inviscid{0.0, 3.0};
        SpectralField w = random_u0(g, 5);
        SpectralField w1(g, 1);
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) w1.at(0, 0, j, l) = w.at(0, 0, j, l);
        SpectralField out = zero_mode_semigroup(w1, 11.0, SemigroupSign::plus, inviscid);
        double worst = 0.0;
        for (std::size_t i = 0; i < out.raw().size(); ++i)
            worst = std::max(worst,
                             std::abs(std::abs(out.raw()[i]) - std::abs(w1.raw()[i])));
        CHECK(worst < 1e-12);
    }

    SECTION("regime and contract errors") {
        SpectralField f(g, 1);
        f.at(0, 0, 1, 0) = 1.0;
        PhysicalParams liftup{1e-3, 0.0};
        CHECK_THROWS_AS(zero_mode_semigroup(f, 1.0, SemigroupSign::plus, liftup), RegimeError);
        SpectralField mean(g, 1);
        mean.at(0, 0, 0, 0) = 1.0;
        CHECK_THROWS_AS(zero_mode_semigroup(mean, 1.0, SemigroupSign::plus, params),
                        ContractViolation);
    }
}

TEST_CASE("zero-mode linear solve") {
    GridSpec g = zero_grid();

    SECTION("lift-up closed form at beta = 0, nu = 0") {
        PhysicalParams params{0.0, 0.0};
        SpectralField u0 = random_u0(g, 7);
        double t = 4.0;
        auto traj = zero_mode_linear_solve(u0, {t}, params);
        double worst = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) {
                Complex expect1 = u0.at(0, 0, j, l) - t * u0.at(1, 0, j, l);
                worst = std::max(worst, std::abs(traj[0].at(0, 0, j, l) - expect1));
                worst = std::max(worst, std::abs(traj[0].at(1, 0, j, l) - u0.at(1, 0, j, l)));
                worst = std::max(worst, std::abs(traj[0].at(2, 0, j, l) - u0.at(2, 0, j, l)));
            }
        CHECK(worst < 1e-12);
    }

    SECTION("lift-up growth saturates under min(1+t, 1/nu) with viscosity") {
        PhysicalParams params{1e-2, 0.0};
        SpectralField u0 = random_u0(g, 9);
        // strip u0^1 so the growth is purely u0^2-driven
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) u0.at(0, 0, j, l) = 0.0;
        double u2_norm = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) u2_norm += std::norm(u0.at(1, 0, j, l));
        u2_norm = std::sqrt(u2_norm);
        std::vector<double> times{1.0, 5.0, 20.0, 100.0, 400.0, 2000.0};
        auto traj = zero_mode_linear_solve(u0, times, params);
        for (std::size_t s = 0; s < times.size(); ++s) {
            double n1 = 0.0;
            for (int j = 0; j < g.ny; ++j)
                for (int l = 0; l < g.nz; ++l) n1 += std::norm(traj[s].at(0, 0, j, l));
            n1 = std::sqrt(n1);
            CHECK(n1 <= std::min(times[s], 1.0 / params.nu) * u2_norm * (1.0 + 1e-9));
        }
        // Early growth is exactly t ||exp(nu rho^2 t) u0^2(0)||.
        double n1 = 0.0, expect = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) {
                Mode m{0.0, g.ky(j), g.kz(l)};
                double heat = std::exp(-params.nu * (m.xi * m.xi + m.eta * m.eta) * times[0]);
                n1 += std::norm(traj[0].at(0, 0, j, l));
                expect += std::norm(heat * times[0] * u0.at(1, 0, j, l));
            }
        CHECK(std::sqrt(n1) == Catch::Approx(std::sqrt(expect)).epsilon(1e-9));
    }

    SECTION("exponential growth rate matches the symbol eigenvalue to 1e-6") {
        PhysicalParams params{0.0, 0.5};  // B_beta = -1/4
        double B = params.B_beta();
        REQUIRE(B < 0.0);
        SpectralField u0(g, 3);
        int jq = 2, lq = 5;
        Mode m{0.0, g.ky(jq), g.kz(lq)};
        double rho = std::hypot(m.xi, m.eta);
        u0.at(0, 0, jq, lq) = 0.7;
        Complex psi(0.4, -0.1);
        u0.at(1, 0, jq, lq) = psi * (m.eta / rho);
        u0.at(2, 0, jq, lq) = psi * (-m.xi / rho);
        double lam = std::sqrt(-B) * std::abs(m.eta) / rho;
        double t1 = 40.0 / lam, t2 = 1.25 * t1;
        auto traj = zero_mode_linear_solve(u0, {t1, t2}, params);
        double n1 = std::abs(traj[0].at(0, 0, jq, lq)), n2 = std::abs(traj[1].at(0, 0, jq, lq));
        double measured = std::log(n2 / n1) / (t2 - t1);
        CHECK(measured == Catch::Approx(lam).epsilon(1e-6));
    }

    SECTION("dispersive evolution: solenoidal, monotone W-energy, bounded L2") {
        // The rotation conserves |u1|^2 + (beta-1)/beta |(u2,u3)|^2 (the
        // W+- modulus), not the plain L2 norm, which merely stays bounded
        // by the norm-equivalence factor.
        PhysicalParams params{1e-3, 2.0};
        double wfac = (params.beta - 1.0) / params.beta;
        SpectralField u0 = random_u0(g, 13);
        std::vector<double> times{0.0, 1.0, 8.0, 31.0};
        auto traj = zero_mode_linear_solve(u0, times, params);
        double prev = std::numeric_limits<double>::infinity();
        double e_plain0 = u0.l2_sq();
        double bound = std::max(params.beta / (params.beta - 1.0), wfac);
        for (std::size_t s = 0; s < times.size(); ++s) {
            double div = 0.0, e_w = 0.0;
            for (int j = 0; j < g.ny; ++j)
                for (int l = 0; l < g.nz; ++l) {
                    Mode m{0.0, g.ky(j), g.kz(l)};
                    div = std::max(div, std::abs(m.xi * traj[s].at(1, 0, j, l) +
                                                 m.eta * traj[s].at(2, 0, j, l)));
                    e_w += std::norm(traj[s].at(0, 0, j, l)) +
                           wfac * (std::norm(traj[s].at(1, 0, j, l)) +
                                   std::norm(traj[s].at(2, 0, j, l)));
                }
            CHECK(div < 1e-12);
            CHECK(e_w <= prev * (1.0 + 1e-12));
            CHECK(traj[s].l2_sq() <= bound * e_plain0 * (1.0 + 1e-12));
            prev = e_w;
        }
    }

    SECTION("W+- definitions: sum recovers 2 u0^1, zero when u0^2 = u0^3 = 0") {
        PhysicalParams params{1e-3, 2.0};
        SpectralField u0 = random_u0(g, 17);
        auto [wp, wm] = wpm_from_u0(u0, params);
        double worst = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l)
                worst = std::max(worst, std::abs(wp.at(0, 0, j, l) + wm.at(0, 0, j, l) -
                                                 2.0 * u0.at(0, 0, j, l)));
        CHECK(worst < 1e-13);

        SpectralField streak(g, 3);
        streak.at(0, 0, 1, 2) = Complex(0.3, 0.1);
        streak.enforce_hermitian();
        SpectralField ups = upsilon0_from_u0(streak, params);
        double m = 0.0;
        for (const auto& c : ups.raw()) m = std::max(m, std::abs(c));
        CHECK(m < 1e-15);
    }

    SECTION("both solve routes agree for B_beta > 0") {
        // The W+- reconstruction must match the raw 2x2 exponential.
        PhysicalParams params{2e-3, 2.0};
        SpectralField u0 = random_u0(g, 19);
        auto traj = zero_mode_linear_solve(u0, {3.7}, params);
        SpectralField direct(g, 3);
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) {
                Mode m{0.0, g.ky(j), g.kz(l)};
                double rho2 = m.xi * m.xi + m.eta * m.eta;
                if (rho2 == 0.0) continue;
                double rho = std::sqrt(rho2);
                Complex psi0 = (m.eta * u0.at(1, 0, j, l) - m.xi * u0.at(2, 0, j, l)) / rho;
                Complex u1, psi;
                zero_mode_mode_solution(u0.at(0, 0, j, l), psi0, m.eta / rho, rho2, params,
                                        3.7, u1, psi);
                direct.at(0, 0, j, l) = u1;
                direct.at(1, 0, j, l) = psi * (m.eta / rho);
                direct.at(2, 0, j, l) = psi * (-m.xi / rho);
            }
        CHECK(max_coeff_diff(traj[0], direct) < 1e-12);
    }

    SECTION("non-solenoidal input is rejected") {
        PhysicalParams params{1e-3, 2.0};
        SpectralField bad(g, 3);
        bad.at(1, 0, 1, 0) = 1.0;  // xi != 0 with u2 only: xi*u2 != 0
        bad.enforce_hermitian();
        CHECK_THROWS_AS(zero_mode_linear_solve(bad, {1.0}, params), ContractViolation);
    }
}

TEST_CASE("qw mode propagation") {
    SECTION("t = 0 returns the initial data") {
        PhysicalParams params{1e-3, 2.0};
        auto traj = qw_linear_propagate({1.0, 2.0, 1.0}, 0.0, 1.0, {1.0, 0.0}, {0.0, 1.0},
                                        params);
        REQUIRE(traj.size() == 1);
        CHECK(std::abs(traj[0].q - Complex(1.0, 0.0)) < 1e-14);
        CHECK(std::abs(traj[0].w - Complex(0.0, 1.0)) < 1e-14);
    }

    SECTION("k = 0 is a contract violation") {
        PhysicalParams params{1e-3, 2.0};
        CHECK_THROWS_AS(QwModeIntegrator({0.0, 1.0, 1.0}, params), ContractViolation);
    }

    SECTION("decoupled closed forms at C_beta = 0 to 1e-8") {
        PhysicalParams params{5e-3, 0.0};
        Mode m{1.0, 3.0, 0.7};
        QwModeIntegrator integ(m, params);
        Complex q(0.8, -0.2), w(-0.3, 0.5);
        Complex q0 = q, w0 = w;
        integ.propagate(0.0, 25.0, q, w, 1e9);
        CHECK(std::abs(q - integ.exact_q_decoupled(q0, 25.0)) <
              1e-8 * std::abs(integ.exact_q_decoupled(q0, 25.0)));
        CHECK(std::abs(w - integ.exact_w_decoupled(w0, 25.0)) <
              1e-8 * std::abs(integ.exact_w_decoupled(w0, 25.0)));
    }

    SECTION("single-mode inviscid damping diagnostic stays bounded") {
        PhysicalParams params{1e-4, 2.0};
        Mode m{1.0, 0.0, 1.0};
        auto traj = qw_linear_propagate(m, 100.0, 0.5, {1.0, 0.0}, {1.0, 0.0}, params);
        double init = std::abs(traj[0].q) / shear_p(m, 0.0);
        double worst = 0.0;
        for (const auto& s : traj)
            worst = std::max(worst, (1.0 + s.t) * std::abs(s.q) / shear_p(m, s.t));
        CHECK(worst / init <= 5.0);
    }

    SECTION("e-folding time lengthens as nu decreases (packet sanity)") {
        QwPacket packet = QwPacket::critical_layer(0.0, 4, 2, 0.5, 1.0);
        PhysicalParams nu3{1e-3, 2.0}, nu4{1e-4, 2.0};
        auto s3 = qw_packet_evolve(packet, nu3, 10.0 * std::pow(1e-3, -1.0 / 3.0), 0.5);
        auto s4 = qw_packet_evolve(packet, nu4, 10.0 * std::pow(1e-4, -1.0 / 3.0), 0.5);
        double t3 = efolding_time(s3.t, s3.qw_norm), t4 = efolding_time(s4.t, s4.qw_norm);
        REQUIRE(std::isfinite(t3));
        REQUIRE(std::isfinite(t4));
        double ratio = t4 / t3;  // one decade of nu
        CHECK(ratio > std::pow(10.0, 0.20));
        CHECK(ratio < std::pow(10.0, 0.55));
    }
}

TEST_CASE("rate fitting") {
    SECTION("synthetic exponential") {
        std::vector<double> t, n;
        for (int i = 0; i <= 100; ++i) {
            t.push_back(0.1 * i);
            n.push_back(std::exp(-0.1 * i));
        }
        auto fit = measure_rate(t, n, RateModel::exp_nu_third, 0.0, 10.0);
        CHECK(fit.rate == Catch::Approx(-1.0).epsilon(1e-6));
        CHECK(fit.r2 > 1.0 - 1e-12);
    }

    SECTION("synthetic power law on [10, 1e4]") {
        std::vector<double> t, n;
        for (int i = 0; i <= 200; ++i) {
            double tt = 10.0 * std::pow(1e3, i / 200.0);
            t.push_back(tt);
            n.push_back(std::pow(tt, -0.5));
        }
        auto fit = measure_rate(t, n, RateModel::power_law, 10.0, 1e4);
        CHECK(fit.rate == Catch::Approx(-0.5).epsilon(1e-6));
    }

    SECTION("degenerate trajectories raise fit errors") {
        std::vector<double> t(30), n(30, 0.0);
        for (int i = 0; i < 30; ++i) t[i] = i;
        CHECK_THROWS_AS(measure_rate(t, n, RateModel::power_law, 0.0, 30.0), FitError);
    }
}
