#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rotstab/audit.hpp"
#include "rotstab/multipliers.hpp"
#include "rotstab/quadrature.hpp"

using namespace rotstab;

namespace {

const MultiplierSet& default_set() {
    static MultiplierSet set{MultiplierParams{}};
    return set;
}

/// Independent evaluation of G(x) = int_{-inf}^x g: plain adaptive panels on
/// [0, x], plus the half-line mass computed through the substitution
/// w = ln(e + <u>) on u >= 1 with the analytic remainder w^{-a0}/a0. This
/// route shares nothing with the sinh-substituted table in the evaluator.
double oracle_G(double x, double a0) {
    auto g = [a0](double u) { return log_weight_g(u, a0); };
    const double w_star = 60.0;
    auto w_integrand = [a0](double w) {
        double bra = std::exp(w) - std::numbers::e;  // = <u>
        double u = std::sqrt(bra * bra - 1.0);
        return std::pow(w, -1.0 - a0) * (std::numbers::e + bra) / u;
    };
    double w1 = std::log(std::numbers::e + std::sqrt(2.0));
    double half = integrate_adaptive<double>(g, 0.0, 1.0, 1e-13) +
                  integrate_adaptive<double>(w_integrand, w1, w_star, 1e-13) +
                  std::pow(w_star, -a0) / a0;
    if (x >= 0.0) return half + integrate_adaptive<double>(g, 0.0, x, 1e-13);
    return half - integrate_adaptive<double>(g, x, 0.0, 1e-13);
}

}  // namespace

TEST_CASE("phi closed form") {
    const double beta0 = 2.5;

    SECTION("k = 0 always gives 1") {
        CHECK(eval_phi(3.0, 0, 5.0, -2.0, beta0, 1e-4) == 1.0);
        CHECK(eval_phi(0.0, 0, 0.0, 0.0, beta0, 1.0) == 1.0);
    }

    SECTION("before the critical time phi stays 1") {
        CHECK(eval_phi(1.0, 1, 2.0, 0.0, beta0, 1e-3) == 1.0);
    }

    SECTION("frozen value past the window at xi = eta = 0") {
        double nu = 1e-3;
        double phi = eval_phi(1e3, 1, 0.0, 0.0, beta0, nu);
        CHECK(phi == Catch::Approx(1.0 + beta0 * beta0 * std::pow(nu, -2.0 / 3.0)).epsilon(1e-13));
        CHECK(phi == Catch::Approx(626.0).epsilon(1e-12));
    }

    SECTION("continuity across the branch times") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> uni(-20.0, 20.0);
        for (int trial = 0; trial < 200; ++trial) {
            double k = (trial % 4) + 1, xi = uni(rng), eta = uni(rng);
            double nu = std::pow(10.0, -1.0 - 4.0 * (trial % 7) / 7.0);
            double window = beta0 * std::pow(nu, -1.0 / 3.0);
            for (double tb : {xi / k, xi / k + window}) {
                if (tb <= 0.0) continue;
                double eps = 1e-9 * std::max(1.0, tb);
                double lo = eval_phi(tb - eps, k, xi, eta, beta0, nu);
                double hi = eval_phi(tb + eps, k, xi, eta, beta0, nu);
                CHECK(std::abs(hi - lo) < 1e-6 * std::max(1.0, std::abs(hi)));
            }
            double t = std::abs(uni(rng));
            CHECK(eval_phi(t, k, xi, eta, beta0, nu) >= 1.0);
        }
    }
}

TEST_CASE("m1 and m2") {
    const double A = 16.0;

    SECTION("both start at 1") {
        CHECK(eval_m1(0.0, 3, 7.0, 1e-2) == Catch::Approx(1.0).margin(1e-14));
        CHECK(eval_m2(0.0, 3, 7.0, -1.0, A) == Catch::Approx(1.0).margin(1e-14));
    }

    SECTION("m1 at xi = 0 collapses to exp(2 arctan(nu^{1/3} t))") {
        double nu = 1e-3;
        for (double t : {0.5, 3.0, 40.0, 1e4})
            CHECK(eval_m1(t, 1, 0.0, nu) ==
                  Catch::Approx(std::exp(2.0 * std::atan(std::cbrt(nu) * t))).epsilon(1e-13));
    }

    SECTION("m1 satisfies its defining ODE (finite differences)") {
        double nu = 3e-4, k = 2, xi = 5.0;
        for (double t : {0.1, 1.0, 2.5, 10.0, 111.0}) {
            double h = 1e-5 * std::max(1.0, t);
            double num = (eval_m1(t + h, k, xi, nu) - eval_m1(t - h, k, xi, nu)) / (2 * h);
            double c = std::cbrt(nu);
            double rhs = 2.0 * c / (1.0 + c * c * (xi / k - t) * (xi / k - t)) *
                         eval_m1(t, k, xi, nu);
            CHECK(num == Catch::Approx(rhs).epsilon(1e-6));
        }
    }

    SECTION("m2 agrees with direct integration of its ODE to 1e-8") {
        double k = 1, xi = 6.0, eta = 0.5;
        double t_end = 30.0;
        // RK4 on d/dt ln(m2) = A k^2 / p(t), fine fixed step.
        double lnm = 0.0, t = 0.0, dt = 1e-4;
        auto f = [&](double s) { return A * k * k / shear_p({k, xi, eta}, s); };
        while (t < t_end - 1e-12) {
            double h = std::min(dt, t_end - t);
            double k1 = f(t), k2 = f(t + h / 2), k3 = f(t + h / 2), k4 = f(t + h);
            lnm += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            t += h;
        }
        CHECK(eval_m2(t_end, k, xi, eta, A) == Catch::Approx(std::exp(lnm)).epsilon(1e-8));
        CHECK(eval_m2(1e9, k, xi, eta, A) <= std::exp(A * pi));
    }
}

TEST_CASE("m3 evaluator") {
    const MultiplierSet& set = default_set();
    const M3Evaluator& m3e = set.m3_evaluator();
    const double a0 = set.params().a0;

    SECTION("primitive G matches the independent quadrature oracle") {
        for (double x : {-1e4, -37.0, -2.0, 0.0, 0.7, 5.0, 123.0, 4e6})
            CHECK(m3e.G(x) == Catch::Approx(oracle_G(x, a0)).epsilon(1e-8));
    }

    SECTION("windowed log m3 equals the per-n oracle sum") {
        double t = 4.0, k = 2, xi = -3.0;
        double expect = 0.0;
        for (int n = -1; n <= 5; ++n) {
            if (n == 0) continue;
            expect += std::pow(1.0 + (k - n) * (k - n), -0.5 * (1 + a0)) *
                      oracle_G(t - xi / n, a0);
        }
        CHECK(m3e.log_m3_window_only(t, k, xi, 3) == Catch::Approx(expect).epsilon(1e-8));
    }

    SECTION("m3 >= 1 and nondecreasing in t") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int trial = 0; trial < 300; ++trial) {
            double k = std::floor(uni(rng) * 9.0) - 4.0;
            double xi = 60.0 * (uni(rng) - 0.5);
            double t = 100.0 * uni(rng);
            double v = m3e.m3(t, k, xi);
            CHECK(v >= 1.0);
            double h = 1e-4 * std::max(1.0, t);
            CHECK(m3e.m3(t + h, k, xi) - v >= -1e-12 * v);
        }
    }

    SECTION("dt m3 / m3 is the t-derivative of log m3") {
        for (double t : {0.3, 2.0, 17.0})
            for (double xi : {-8.0, 0.4, 21.0}) {
                double k = 3;
                double h = 1e-5 * std::max(1.0, t);
                double num = (m3e.log_m3(t + h, k, xi) - m3e.log_m3(t - h, k, xi)) / (2 * h);
                CHECK(num == Catch::Approx(m3e.dtm3_over_m3(t, k, xi)).epsilon(1e-5));
            }
    }

    SECTION("critical-layer lower bound (zero violations on 1e4 samples)") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        long violations = 0;
        for (int trial = 0; trial < 10000; ++trial) {
            int k = 1 + static_cast<int>(uni(rng) * 8.0);
            if (uni(rng) < 0.5) k = -k;
            double xi = 80.0 * (uni(rng) - 0.5);
            double t = 200.0 * uni(rng) * uni(rng);
            double lhs = m3e.g(t - xi / k);
            if (lhs > m3e.dtm3_over_m3(t, k, xi) * (1.0 + 1e-10)) violations++;
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("weights") {
    const MultiplierSet& set = default_set();
    GridSpec g;
    g.nx = 8;
    g.ny = 8;
    g.nz = 4;
    g.Ly = 4 * pi;
    g.Lz = 4 * pi;
    g.validate();
    double nu = 1e-3;

    SECTION("A at t = 0 reduces to 1/m3(0,k,xi) on k != 0 modes") {
        SpectralField f(g, 1);
        f.at(0, 1, 2, 1) = 1.0;  // k=1, xi=1
        SpectralField w = weight(f, 0.0, WeightKind::A, set, nu);
        double expect = 1.0 / set.m3_evaluator().m3(0.0, 1.0, g.ky(2));
        CHECK(std::abs(w.at(0, 1, 2, 1)) == Catch::Approx(expect).epsilon(1e-12));
    }

    SECTION("A0 at t = 0 is the m3(0,.) normalization") {
        SpectralField f(g, 1);
        f.at(0, 0, 3, 1) = 2.0;
        SpectralField w = weight(f, 0.0, WeightKind::A0, set, nu);
        double m3v = set.m3_evaluator().m3(0.0, 0.0, g.ky(3));
        CHECK(m3v >= 1.0);
        CHECK(std::abs(w.at(0, 0, 3, 1)) == Catch::Approx(2.0 / m3v).epsilon(1e-12));
    }

    SECTION("A0 kinds reject fields with k-content") {
        SpectralField f(g, 1);
        f.at(0, 1, 0, 0) = 1.0;
        CHECK_THROWS_AS(weight(f, 0.0, WeightKind::A0, set, nu), ContractViolation);
    }

    SECTION("A-weighted pure-heat mode decays past the critical window") {
        Mode m{1.0, 0.0, 0.5};
        double window_end = set.params().beta0 * std::pow(nu, -1.0 / 3.0);
        double prev = std::numeric_limits<double>::infinity();
        for (double t = window_end; t < window_end + 200.0; t += 5.0) {
            double heat = std::exp(-nu * shear_p_integral(m, 0.0, t));
            double aw = std::exp(set.params().delta2 * std::cbrt(nu) * t) /
                        (std::sqrt(set.phi(t, m, nu)) * set.combined_m(t, m, nu));
            double v = aw * heat;
            CHECK(v <= prev * (1.0 + 1e-12));
            prev = v;
        }
    }

    SECTION("toy stretching mode: discounted squared A-weight is non-increasing") {
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int trial = 0; trial < 40; ++trial) {
            Mode m{std::floor(uni(rng) * 4.0) + 1.0, 40.0 * (uni(rng) - 0.5),
                   10.0 * (uni(rng) - 0.5)};
            double nu_t = std::pow(10.0, -1.0 - 4.0 * uni(rng));
            double p0 = shear_p(m, 0.0);
            double prev = std::numeric_limits<double>::infinity();
            for (double t = 0.0; t <= 120.0; t += 0.25) {
                // Exact solution of the stretching + dissipation toy mode.
                double mod2 = shear_p(m, t) / p0 *
                              std::exp(-2.0 * nu_t * shear_p_integral(m, 0.0, t));
                double w2 = 1.0 / (set.phi(t, m, nu_t) *
                                   std::pow(set.combined_m(t, m, nu_t), 2));
                double v = w2 * mod2;
                CHECK(v <= prev * (1.0 + 1e-12));
                prev = v;
            }
        }
    }
}

TEST_CASE("multiplier audits") {
    const MultiplierSet& set = default_set();

    SECTION("lemma 2.1 family has no violations at 1e4 samples") {
        auto report = audit_lemma_2_1(10000, set, 99);
        for (const auto& item : report) {
            INFO(item.inequality);
            CHECK(item.violations == 0);
        }
    }

    SECTION("lemma 2.3 family: bounds hold, fitted constants finite") {
        auto report = audit_lemma_2_3(10000, set, 101);
        for (const auto& item : report) {
            INFO(item.inequality);
            CHECK(item.violations == 0);
            CHECK(std::isfinite(item.fitted_constant));
        }
    }

    SECTION("sample size precondition") {
        CHECK_THROWS_AS(audit_lemma_2_1(100, set), ContractViolation);
    }
}
