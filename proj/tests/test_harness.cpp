#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rotstab/config.hpp"
#include "rotstab/harness.hpp"

using namespace rotstab;

namespace {

GridSpec tiny_grid() {
    GridSpec g;
    g.domain_kind = DomainKind::T_R_T;
    g.nx = 8;
    g.ny = 8;
    g.nz = 8;
    g.Ly = 4.0 * pi;
    g.Lz = 2.0 * pi;
    g.validate();
    return g;
}

}  // namespace

TEST_CASE("key=value config parsing") {
    SECTION("values, comments, overrides") {
        auto cfg = KeyValueConfig::from_string(
            "# comment\n"
            "nu = 1e-3\n"
            "beta= 2.0   # trailing comment\n"
            "grid = 64,64,32\n"
            "nu = 2e-3\n");
        CHECK(cfg.get_double("nu", 0.0) == 2e-3);
        CHECK(cfg.get_double("beta", 0.0) == 2.0);
        auto dims = cfg.get_double_list("grid", {});
        REQUIRE(dims.size() == 3);
        CHECK(dims[2] == 32.0);
        CHECK(cfg.get_double("absent", 7.5) == 7.5);
    }

    SECTION("include resolves relative to the including file") {
        namespace fs = std::filesystem;
        auto dir = fs::temp_directory_path() / "rotstab_cfg_test";
        fs::create_directories(dir);
        std::ofstream(dir / "base.cfg") << "nu = 1e-4\nbeta = 2\n";
        std::ofstream(dir / "sweep.cfg") << "include base.cfg\nbeta = 0\n";
        auto cfg = KeyValueConfig::from_file((dir / "sweep.cfg").string());
        CHECK(cfg.get_double("nu", 0.0) == 1e-4);
        CHECK(cfg.get_double("beta", 9.0) == 0.0);
        fs::remove_all(dir);
    }

    SECTION("malformed lines and bad numbers raise config errors") {
        CHECK_THROWS_AS(KeyValueConfig::from_string("just words\n"), ConfigError);
        auto cfg = KeyValueConfig::from_string("nu = banana\n");
        CHECK_THROWS_AS(cfg.get_double("nu", 0.0), ConfigError);
    }
}

TEST_CASE("classification proxy") {
    RunResult r;
    r.completed = true;
    r.sup_energy_ratio = 5.0;
    CHECK(classify_run(r, 10.0) == RunLabel::stable);
    r.sup_energy_ratio = 101.0;
    CHECK(classify_run(r, 10.0) == RunLabel::unstable);
    r.sup_energy_ratio = 5.0;
    r.diverged = true;
    CHECK(classify_run(r, 10.0) == RunLabel::unstable);
    r.diverged = false;
    r.completed = false;
    CHECK(classify_run(r, 10.0) == RunLabel::inconclusive);
}

TEST_CASE("bisection on a synthetic classifier") {
    // stable iff eps < 0.01
    auto probe = [](double eps) {
        ThresholdProbe p;
        p.eps = eps;
        p.label = eps < 0.01 ? RunLabel::stable : RunLabel::unstable;
        return p;
    };

    SECTION("midpoint converges to the synthetic threshold") {
        auto res = bisect_threshold(1e-3, 2.0, 1e-4, 1.0, 20, probe);
        CHECK(res.eps_star == Catch::Approx(0.01).epsilon(1e-3));
        CHECK(res.eps_lo < 0.01);
        CHECK(res.eps_hi >= 0.01);
        CHECK(res.probes.size() == 22);
        // bracket width halves exactly each iteration (in log space)
        double expected = std::log(1.0 / 1e-4) / std::pow(2.0, 20);
        CHECK(std::log(res.eps_hi / res.eps_lo) == Catch::Approx(expected).epsilon(1e-9));
    }

    SECTION("same-label brackets are rejected with guidance") {
        CHECK_THROWS_AS(bisect_threshold(1e-3, 2.0, 0.02, 1.0, 8, probe), BracketError);
        CHECK_THROWS_AS(bisect_threshold(1e-3, 2.0, 1e-5, 1e-3, 8, probe), BracketError);
    }

    SECTION("iteration-count precondition") {
        CHECK_THROWS_AS(bisect_threshold(1e-3, 2.0, 1e-4, 1.0, 4, probe),
                        ContractViolation);
    }

    SECTION("scan finds a bracket from above") {
        std::vector<ThresholdProbe> trace;
        auto [lo, hi] = scan_bracket(1e-5, 1.0, 2.0, probe, &trace);
        CHECK(lo < 0.01);
        CHECK(hi >= 0.01);
        CHECK(hi == Catch::Approx(2.0 * lo));
        CHECK(trace.size() >= 2);
    }
}

TEST_CASE("alpha fit") {
    SECTION("synthetic eps_star = nu^{0.8} recovers alpha = 0.8") {
        std::vector<ThresholdResult> results;
        for (double nu : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
            ThresholdResult r;
            r.nu = nu;
            r.eps_star = std::pow(nu, 0.8);
            results.push_back(r);
        }
        AlphaFit f = fit_alpha(results);
        CHECK(f.alpha == Catch::Approx(0.8).epsilon(1e-6));
        CHECK(f.ci_lo == Catch::Approx(0.8).margin(1e-6));
        CHECK(f.ci_hi == Catch::Approx(0.8).margin(1e-6));
    }

    SECTION("too few or degenerate points raise fit errors") {
        std::vector<ThresholdResult> two(2);
        CHECK_THROWS_AS(fit_alpha(two), FitError);
        std::vector<ThresholdResult> flat(5);
        for (int i = 0; i < 5; ++i) {
            flat[i].nu = std::pow(10.0, -1 - i);
            flat[i].eps_star = 0.5;
        }
        CHECK_THROWS_AS(fit_alpha(flat), FitError);
    }
}

TEST_CASE("run_trajectory") {
    MultiplierSet mult{MultiplierParams{}};

    SECTION("zero data classifies stable with unit ratio") {
        RunSpec spec;
        spec.grid = tiny_grid();
        spec.params = PhysicalParams{1e-2, 2.0};
        spec.initial.amplitude = 0.0;
        spec.dt = 0.05;
        spec.t_end = 1.0;
        spec.sample_dt = 0.5;
        RunResult r = run_trajectory(spec, mult);
        CHECK(r.label == RunLabel::stable);
        CHECK(r.completed);
        CHECK(r.records.size() >= 3);
    }

    SECTION("identical specs give byte-identical energy records") {
        RunSpec spec;
        spec.grid = tiny_grid();
        spec.params = PhysicalParams{1e-2, 2.0};
        spec.initial.amplitude = 0.02;
        spec.initial.seed = 11;
        spec.initial.zero_mode_fraction = 0.2;
        spec.dt = 0.05;
        spec.t_end = 2.0;
        spec.sample_dt = 0.25;
        auto csv_of = [&]() {
            RunResult r = run_trajectory(spec, mult);
            std::ostringstream out;
            for (const auto& rec : r.records) append_energy_csv(out, rec);
            return out.str();
        };
        std::string a = csv_of(), b = csv_of();
        CHECK(a == b);
        CHECK(a.size() > 100);
    }

    SECTION("wall-clock truncation yields an inconclusive label") {
        RunSpec spec;
        spec.grid = tiny_grid();
        spec.params = PhysicalParams{1e-2, 2.0};
        spec.initial.amplitude = 0.02;
        spec.dt = 0.05;
        spec.t_end = 1e6;  // far beyond any wall clock
        spec.sample_dt = 10.0;
        spec.wall_clock_limit_s = 0.2;
        RunResult r = run_trajectory(spec, mult);
        CHECK(r.label == RunLabel::inconclusive);
        CHECK_FALSE(r.completed);
    }
}

TEST_CASE("job pool") {
    std::vector<int> done(64, 0);
    std::vector<std::function<void()>> jobs;
    for (int i = 0; i < 64; ++i) jobs.push_back([&done, i]() { done[i] = i + 1; });
    run_job_pool(jobs, 4);
    for (int i = 0; i < 64; ++i) CHECK(done[i] == i + 1);

    std::vector<std::function<void()>> bad;
    bad.push_back([]() { throw std::runtime_error("boom"); });
    CHECK_THROWS_AS(run_job_pool(bad, 2), std::runtime_error);
}
