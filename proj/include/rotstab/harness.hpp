#pragma once

#include <algorithm>
#include <chrono>
#include <optional>
#include <random>

#include "rotstab/asymptotics.hpp"
#include "rotstab/energy.hpp"
#include "rotstab/parallel.hpp"
#include "rotstab/rate_fit.hpp"

namespace rotstab {

enum class RunLabel { stable, unstable, inconclusive };

inline std::string to_string(RunLabel l) {
    switch (l) {
        case RunLabel::stable: return "stable";
        case RunLabel::unstable: return "unstable";
        default: return "inconclusive";
    }
}

/// One full nonlinear (or linearized) trajectory request.
struct RunSpec {
    GridSpec grid;
    PhysicalParams params;
    InitialData initial;
    bool linearized = false;
    double dt = 0.0125;
    double t_end = 10.0;
    double sample_dt = 0.5;
    double amplification_G = 10.0;  // stability proxy threshold
    bool early_stop_on_amplification = false;
    double wall_clock_limit_s = 0.0;  // 0: unlimited
    bool keep_final_state = false;
};

struct RunResult {
    std::vector<EnergyRecord> records;
    bool diverged = false;
    bool completed = false;
    double sup_energy_ratio = 0.0;  // sup_t (E0+Enot) / (E0+Enot)(0)
    double t_final = 0.0;
    RunLabel label = RunLabel::inconclusive;
    std::optional<SolverState> final_state;
};

/// Stability proxy: stable iff the run reached T with
/// sup_t (E0 + Enot) <= G^2 (E0 + Enot)(0) and no NaN; unstable on
/// amplification beyond the proxy or on divergence; inconclusive when the
/// run was truncated (wall clock).
inline RunLabel classify_run(const RunResult& r, double G) {
    if (r.diverged) return RunLabel::unstable;
    if (r.sup_energy_ratio > G * G) return RunLabel::unstable;
    if (!r.completed) return RunLabel::inconclusive;
    return RunLabel::stable;
}

/// Advance one solver trajectory, sampling energy records and applying the
/// Rogallo remap every xi-grid-step of accumulated shear. The step size is
/// shrunk (never grown) to divide the remap cadence exactly.
inline RunResult run_trajectory(const RunSpec& spec, const MultiplierSet& mult) {
    RunResult result;
    SolverConfig cfg;
    cfg.grid = spec.grid;
    cfg.params = spec.params;
    cfg.initial = spec.initial;
    cfg.linearized = spec.linearized;
    NscSolver solver(cfg);

    const double remap_shear = 2.0 * pi / spec.grid.Ly;
    const int steps_per_remap =
        std::max(1, static_cast<int>(std::ceil(remap_shear / spec.dt - 1e-12)));
    const double dt = remap_shear / steps_per_remap;
    const bool do_remap = !spec.linearized;

    auto start = std::chrono::steady_clock::now();
    double e_init = -1.0;
    double next_sample = 0.0;
    long step_in_block = 0;

    auto sample = [&]() {
        EnergyRecord r = energy_functionals(solver.state(), mult);
        if (e_init < 0.0) e_init = r.E0 + r.Enot;
        if (e_init > 0.0)
            result.sup_energy_ratio =
                std::max(result.sup_energy_ratio, (r.E0 + r.Enot) / e_init);
        result.records.push_back(r);
    };

    // Advance by h, halving on CFL rejection (keeps the remap cadence).
    std::function<void(double, int)> advance = [&](double h, int depth) {
        try {
            solver.step(h);
        } catch (const CflError&) {
            if (depth >= 10)
                throw DivergenceError("run_trajectory: CFL subdivision exhausted",
                                      solver.state().t);
            advance(0.5 * h, depth + 1);
            advance(0.5 * h, depth + 1);
        }
    };

    sample();
    try {
        while (solver.state().t < spec.t_end - 1e-12) {
            advance(std::min(dt, spec.t_end - solver.state().t), 0);
            if (do_remap && ++step_in_block >= steps_per_remap) {
                solver.remap();
                step_in_block = 0;
            }
            if (solver.state().t >= next_sample + spec.sample_dt - 1e-12 ||
                solver.state().t >= spec.t_end - 1e-12) {
                next_sample = solver.state().t;
                sample();
                if (spec.early_stop_on_amplification &&
                    result.sup_energy_ratio > spec.amplification_G * spec.amplification_G) {
                    result.t_final = solver.state().t;
                    result.label = RunLabel::unstable;
                    if (spec.keep_final_state) result.final_state = solver.state();
                    return result;
                }
            }
            if (spec.wall_clock_limit_s > 0.0) {
                double elapsed =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                        .count();
                if (elapsed > spec.wall_clock_limit_s) {
                    result.t_final = solver.state().t;
                    result.label = RunLabel::inconclusive;
                    if (spec.keep_final_state) result.final_state = solver.state();
                    return result;
                }
            }
        }
        result.completed = true;
    } catch (const DivergenceError&) {
        result.diverged = true;
    }
    result.t_final = solver.state().t;
    result.label = classify_run(result, spec.amplification_G);
    if (spec.keep_final_state) result.final_state = solver.state();
    return result;
}

/// One probe of the threshold search.
struct ThresholdProbe {
    double eps = 0.0;
    RunLabel label = RunLabel::inconclusive;
    double sup_energy_ratio = 0.0;
    double t_final = 0.0;
};

struct ThresholdResult {
    double nu = 0.0;
    double beta = 0.0;
    double eps_star = 0.0;
    double eps_lo = 0.0, eps_hi = 0.0;
    std::vector<ThresholdProbe> probes;
};

/// Bisection on log(eps) between a stable and an unstable endpoint.
/// Endpoints must classify differently (BracketError otherwise); every probe
/// trace is recorded. Inconclusive probes abort the search.
template <class ProbeFn>
ThresholdResult bisect_threshold(double nu, double beta, double eps_lo, double eps_hi,
                                 int n_iter, ProbeFn&& probe) {
    if (n_iter < 8) throw ContractViolation("bisect_threshold: n_iter must be >= 8");
    if (!(eps_lo > 0.0 && eps_hi > eps_lo))
        throw ContractViolation("bisect_threshold: need 0 < eps_lo < eps_hi");
    ThresholdResult res;
    res.nu = nu;
    res.beta = beta;
    ThresholdProbe lo = probe(eps_lo), hi = probe(eps_hi);
    res.probes.push_back(lo);
    res.probes.push_back(hi);
    if (lo.label == RunLabel::inconclusive || hi.label == RunLabel::inconclusive)
        throw BracketError("bisect_threshold: inconclusive probe at a bracket endpoint");
    if (lo.label == hi.label)
        throw BracketError(
            "bisect_threshold: bracket endpoints classify identically (" +
            to_string(lo.label) + "); widen the bracket");
    if (lo.label != RunLabel::stable)
        throw BracketError("bisect_threshold: lower endpoint must be stable");
    double a = std::log(eps_lo), b = std::log(eps_hi);
    for (int i = 0; i < n_iter; ++i) {
        double mid = 0.5 * (a + b);
        ThresholdProbe p = probe(std::exp(mid));
        res.probes.push_back(p);
        if (p.label == RunLabel::inconclusive)
            throw BracketError("bisect_threshold: inconclusive probe; excluded from bisection");
        (p.label == RunLabel::stable ? a : b) = mid;
    }
    res.eps_lo = std::exp(a);
    res.eps_hi = std::exp(b);
    res.eps_star = std::exp(0.5 * (a + b));
    return res;
}

/// Find a stable/unstable bracket by scanning a log grid of eps downward
/// from eps_max. Returns (eps_lo, eps_hi) and appends the probes.
template <class ProbeFn>
std::pair<double, double> scan_bracket(double eps_min, double eps_max, double factor,
                                       ProbeFn&& probe, std::vector<ThresholdProbe>* trace) {
    if (!(factor > 1.0)) throw ContractViolation("scan_bracket: factor must be > 1");
    ThresholdProbe prev = probe(eps_max);
    if (trace) trace->push_back(prev);
    if (prev.label == RunLabel::stable)
        throw BracketError("scan_bracket: top of the scan already classifies stable");
    for (double eps = eps_max / factor; eps >= eps_min / (1.0 + 1e-12); eps /= factor) {
        ThresholdProbe p = probe(eps);
        if (trace) trace->push_back(p);
        if (p.label == RunLabel::stable && prev.label == RunLabel::unstable)
            return {eps, eps * factor};
        prev = p;
    }
    throw BracketError("scan_bracket: no stable probe above eps_min; widen the scan");
}

struct AlphaFit {
    double alpha = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    double intercept = 0.0;
    int n_points = 0;
};

/// Least-squares slope of log(eps_star) against log(nu) with a pairs
/// bootstrap confidence interval.
inline AlphaFit fit_alpha(const std::vector<ThresholdResult>& results,
                          int n_bootstrap = 2000, std::uint64_t seed = 777) {
    if (results.size() < 4) throw FitError("fit_alpha: need at least 4 nu points");
    std::vector<double> x, y;
    for (const auto& r : results) {
        x.push_back(std::log(r.nu));
        y.push_back(std::log(r.eps_star));
    }
    bool degenerate = true;
    for (std::size_t i = 1; i < y.size(); ++i)
        if (std::abs(y[i] - y[0]) > 1e-12) degenerate = false;
    if (degenerate) throw FitError("fit_alpha: thresholds are constant across nu");
    AlphaFit fit;
    auto [slope, intercept] = fit_line(x, y);
    fit.alpha = slope;
    fit.intercept = intercept;
    fit.n_points = static_cast<int>(x.size());
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    std::vector<double> slopes;
    std::vector<double> bx(x.size()), by(y.size());
    for (int b = 0; b < n_bootstrap; ++b) {
        bool ok = false;
        for (int attempt = 0; attempt < 16 && !ok; ++attempt) {
            for (std::size_t i = 0; i < x.size(); ++i) {
                std::size_t j = pick(rng);
                bx[i] = x[j];
                by[i] = y[j];
            }
            double lo = *std::min_element(bx.begin(), bx.end());
            double hi = *std::max_element(bx.begin(), bx.end());
            ok = hi - lo > 1e-9;
        }
        if (!ok) continue;
        slopes.push_back(fit_line(bx, by).first);
    }
    std::sort(slopes.begin(), slopes.end());
    if (!slopes.empty()) {
        fit.ci_lo = slopes[static_cast<std::size_t>(0.025 * (slopes.size() - 1))];
        fit.ci_hi = slopes[static_cast<std::size_t>(0.975 * (slopes.size() - 1))];
    }
    return fit;
}

}  // namespace rotstab
