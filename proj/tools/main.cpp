// Command-line laboratory for rotating-Couette stability experiments:
// linear dispersion and enhanced-dissipation measurements, dispersive-kernel
// scans, multiplier audits, nonlinear runs, and threshold sweeps.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "rotstab/audit.hpp"
#include "rotstab/config.hpp"
#include "rotstab/harness.hpp"
#include "rotstab/kernels.hpp"
#include "rotstab/qw_mode.hpp"
#include "rotstab/zero_mode.hpp"

using nlohmann::json;
using namespace rotstab;

namespace {

namespace fs = std::filesystem;

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_divergence = 3;

struct OutputDir {
    fs::path dir;
    json manifest;

    OutputDir(const std::string& base, const std::string& command,
              const KeyValueConfig& cfg) {
        dir = fs::path(base) / command;
        fs::create_directories(dir);
        manifest["command"] = command;
        manifest["schema"] = 1;
        json jcfg;
        for (const auto& [k, v] : cfg.values()) jcfg[k] = v;
        manifest["config"] = jcfg;
        manifest["outputs"] = json::array();
    }

    std::ofstream open(const std::string& name) {
        manifest["outputs"].push_back(name);
        return std::ofstream(dir / name);
    }

    void finish(int exit_code) {
        manifest["exit_code"] = exit_code;
        std::ofstream out(dir / "manifest.json");
        out << manifest.dump(2) << "\n";
    }
};

MultiplierParams multiplier_params_from(const KeyValueConfig& cfg) {
    MultiplierParams p;
    p.beta0 = cfg.get_double("beta0", p.beta0);
    p.A_big = cfg.get_double("A_big", p.A_big);
    p.a0 = cfg.get_double("a0", p.a0);
    p.delta2 = cfg.get_double("delta2", p.delta2);
    p.delta_beta0 = cfg.get_double("delta_beta0", p.delta_beta0);
    p.n_trunc = static_cast<int>(cfg.get_long("n_trunc", p.n_trunc));
    p.quad_tol = cfg.get_double("quad_tol", p.quad_tol);
    p.validate();
    return p;
}

GridSpec grid_from(const KeyValueConfig& cfg) {
    GridSpec g;
    std::string domain = cfg.get_string("domain", "T_R_T");
    if (domain == "T_R_T")
        g.domain_kind = DomainKind::T_R_T;
    else if (domain == "T_R2_surrogate")
        g.domain_kind = DomainKind::T_R2_surrogate;
    else
        throw ConfigError("unknown domain '" + domain + "'");
    // "nx=64,ny=64,nz=32" or individual keys
    if (cfg.has("grid")) {
        auto dims = cfg.get_double_list("grid", {});
        if (dims.size() != 3) throw ConfigError("grid: expected three comma-separated sizes");
        g.nx = static_cast<int>(dims[0]);
        g.ny = static_cast<int>(dims[1]);
        g.nz = static_cast<int>(dims[2]);
    }
    g.nx = static_cast<int>(cfg.get_long("nx", g.nx));
    g.ny = static_cast<int>(cfg.get_long("ny", g.ny));
    g.nz = static_cast<int>(cfg.get_long("nz", g.nz));
    g.Ly = cfg.get_double("Ly", 4.0 * pi);
    g.Lz = cfg.get_double("Lz", g.domain_kind == DomainKind::T_R_T ? 2.0 * pi : 4.0 * pi);
    g.dealias_fraction = cfg.get_double("dealias_fraction", g.dealias_fraction);
    g.validate();
    return g;
}

InitialData initial_from(const KeyValueConfig& cfg) {
    InitialData d;
    std::string profile = cfg.get_string("profile", "random_band");
    if (profile == "random_band")
        d.profile = InitialProfile::random_band;
    else if (profile == "localized_bubble")
        d.profile = InitialProfile::localized_bubble;
    else if (profile == "file")
        d.profile = InitialProfile::file;
    else
        throw ConfigError("unknown profile '" + profile + "'");
    d.amplitude = cfg.get_double("eps", 1e-3);
    d.seed = static_cast<std::uint64_t>(cfg.get_long("seed", 1));
    d.band_lo = cfg.get_double("band_lo", d.band_lo);
    d.band_hi = cfg.get_double("band_hi", d.band_hi);
    d.zero_mode_fraction = cfg.get_double("zero_mode_fraction", d.zero_mode_fraction);
    d.bubble_width_frac = cfg.get_double("bubble_width", d.bubble_width_frac);
    d.bubble_width_y_frac = cfg.get_double("bubble_width_y", d.bubble_width_y_frac);
    d.bubble_width_z_frac = cfg.get_double("bubble_width_z", d.bubble_width_z_frac);
    d.bubble_carrier = cfg.get_double("bubble_carrier", d.bubble_carrier);
    d.file_path = cfg.get_string("initial_file", "");
    return d;
}

double horizon_from(const KeyValueConfig& cfg, double nu) {
    double horizon = cfg.get_double("horizon", 0.0);
    if (horizon > 0.0) return horizon;
    double factor = cfg.get_double("horizon_factor", 10.0);
    return factor * std::pow(std::max(nu, 1e-12), -1.0 / 3.0);
}

json rate_fit_json(const RateFit& f) {
    return json{{"rate", f.rate},   {"intercept", f.intercept}, {"r2", f.r2},
                {"t_lo", f.t_lo},   {"t_hi", f.t_hi},           {"model", to_string(f.model)},
                {"n_points", f.n_points}};
}

// ---------------------------------------------------------------- commands

int cmd_multiplier_audit(const KeyValueConfig& cfg) {
    OutputDir out(cfg.get_string("out", "runs"), "multiplier-audit", cfg);
    MultiplierSet set(multiplier_params_from(cfg));
    long n = cfg.get_long("samples", 100000);
    std::uint64_t seed = cfg.get_long("seed", 1);
    auto r1 = audit_lemma_2_1(n, set, seed);
    auto r2 = audit_lemma_2_3(n, set, seed + 1);
    auto jsonl = out.open("audit.jsonl");
    long total_violations = 0;
    for (const auto& group : {r1, r2})
        for (const auto& item : group) {
            json j{{"inequality", item.inequality},
                   {"samples", item.samples},
                   {"violations", item.violations},
                   {"fitted_constant", item.fitted_constant},
                   {"max_violation", item.max_violation}};
            jsonl << j.dump() << "\n";
            total_violations += item.violations;
            std::cout << item.inequality << ": violations=" << item.violations
                      << " fitted=" << item.fitted_constant << "\n";
        }
    out.manifest["total_violations"] = total_violations;
    out.finish(exit_ok);
    return exit_ok;
}

int cmd_kernels(const KeyValueConfig& cfg) {
    OutputDir out(cfg.get_string("out", "runs"), "kernels", cfg);
    double t_lo = cfg.get_double("t_lo", 10.0), t_hi = cfg.get_double("t_hi", 1e4);
    int n_t = static_cast<int>(cfg.get_long("n_t", 13));
    json fits;

    BumpTransform B(1.0), Btilde(2.0);
    auto write_scan = [&](const char* name, const std::vector<KernelSample>& scan) {
        auto csv = out.open(std::string(name) + ".csv");
        csv << "t,sup,err_estimate,arg_rho,arg_phi\n";
        char buf[256];
        for (const auto& s : scan) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.sup,
                          s.err_estimate, s.arg_rho, s.arg_phi);
            csv << buf;
        }
    };
    auto scan_k = kernel_sup_scan(B, false, t_lo, t_hi, n_t);
    write_scan("kernel_K", scan_k);
    fits["K_slope"] = rate_fit_json(kernel_rate_fit(scan_k));
    std::cout << "sup|K| slope: " << kernel_rate_fit(scan_k).rate << "\n";

    auto scan_m = kernel_sup_scan(Btilde, true, t_lo, t_hi, n_t);
    write_scan("kernel_M", scan_m);
    fits["M_slope"] = rate_fit_json(kernel_rate_fit(scan_m));
    std::cout << "sup|M| slope: " << kernel_rate_fit(scan_m).rate << "\n";

    int n_torus = static_cast<int>(cfg.get_long("n_t_torus", 9));
    TorusModeScan near_stationary(1, 1.0, 0);
    auto fit0 = near_stationary.decay_fit(t_lo, t_hi, n_torus);
    fits["torus_j0_slope"] = rate_fit_json(fit0);
    std::cout << "torus j=0 slope: " << fit0.rate << "\n";
    TorusModeScan high_freq(1, 1.0, 5);
    auto fit5 = high_freq.decay_fit(t_lo, std::min(t_hi, 2000.0), n_torus);
    fits["torus_j5_slope"] = rate_fit_json(fit5);
    std::cout << "torus j=5 slope: " << fit5.rate << "\n";

    auto fj = out.open("fits.json");
    fj << fits.dump(2) << "\n";
    out.finish(exit_ok);
    return exit_ok;
}

int cmd_linear_disp(const KeyValueConfig& cfg) {
    OutputDir out(cfg.get_string("out", "runs"), "linear-disp", cfg);
    GridSpec g;
    g.domain_kind = DomainKind::T_R2_surrogate;
    g.nx = 1;
    g.ny = static_cast<int>(cfg.get_long("ny", 512));
    g.nz = static_cast<int>(cfg.get_long("nz", 512));
    g.Ly = cfg.get_double("Ly", 96.0 * pi);
    g.Lz = cfg.get_double("Lz", 96.0 * pi);
    g.validate();
    PhysicalParams params{cfg.get_double("nu", 1e-4), cfg.get_double("beta", 2.0)};
    params.validate();
    auto regime = classify_regime(params.beta);

    InitialData d = initial_from(cfg);
    if (d.profile == InitialProfile::random_band && !cfg.has("profile"))
        d.profile = InitialProfile::localized_bubble;
    if (!cfg.has("eps")) d.amplitude = 1.0;
    if (regime.classification == Regime::dispersive) {
        // Shell data centered on the stationary axis of the dispersive phase.
        if (!cfg.has("bubble_width")) d.bubble_width_frac = 0.0156;
        if (!cfg.has("bubble_width_y")) d.bubble_width_y_frac = 2.5 / g.Ly;
        if (!cfg.has("bubble_width_z")) d.bubble_width_z_frac = 8.0 / g.Lz;
    } else {
        // Lift-up / instability runs want low-frequency content so the heat
        // factor stays negligible over the measurement window.
        if (!cfg.has("bubble_carrier")) d.bubble_carrier = 0.3;
        if (!cfg.has("bubble_width")) d.bubble_width_frac = 0.04;
    }
    SpectralField u0 = generate_initial_field(g, d);

    double t_hi = cfg.get_double(
        "t_hi", regime.classification == Regime::dispersive
                    ? 300.0
                    : 30.0 / std::max(params.nu, 1e-6));
    int n_samples = static_cast<int>(cfg.get_long("n_samples", 200));
    std::vector<double> times;
    if (regime.classification == Regime::liftup) {
        // Dense linear samples over the growth window, log samples beyond.
        double t_lin = std::min(0.1 / std::max(params.nu, 1e-12), t_hi);
        for (int i = 0; i <= n_samples / 2; ++i)
            times.push_back(t_lin * i / (n_samples / 2));
        for (int i = 1; i <= n_samples / 2; ++i)
            times.push_back(t_lin * std::pow(t_hi / t_lin,
                                             static_cast<double>(i) / (n_samples / 2)));
        // Purely u0^2-driven growth: strip the initial streak component.
        if (cfg.get_bool("liftup_zero_u1", true))
            for (int j = 0; j < g.ny; ++j)
                for (int l = 0; l < g.nz; ++l) u0.at(0, 0, j, l) = 0.0;
    } else {
        for (int i = 0; i <= n_samples; ++i) times.push_back(t_hi * i / n_samples);
    }
    auto traj = zero_mode_linear_solve(u0, times, params);

    auto csv = out.open("zero_modes.csv");
    csv << "t,u0_sup,good_sup,u01_l2,u02_l2,u03_l2\n";
    std::vector<double> u0_sup, good_sup, u01_l2;
    char buf[320];
    for (std::size_t s = 0; s < times.size(); ++s) {
        const SpectralField& u = traj[s];
        double sup = sup_norm(u);
        SpectralField u3(g, 1);
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) u3.at(0, 0, j, l) = u.at(2, 0, j, l);
        double gsup = std::max({sup_norm(u3), sup_norm(good_derivative(u3, 1)),
                                sup_norm(good_derivative(u3, 2)),
                                sup_norm(good_derivative(u, 1))});
        double n1 = 0.0, n2 = 0.0, n3 = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) {
                n1 += std::norm(u.at(0, 0, j, l));
                n2 += std::norm(u.at(1, 0, j, l));
                n3 += std::norm(u.at(2, 0, j, l));
            }
        double V = g.volume();
        u0_sup.push_back(sup);
        good_sup.push_back(gsup);
        u01_l2.push_back(std::sqrt(V * n1));
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", times[s],
                      sup, gsup, std::sqrt(V * n1), std::sqrt(V * n2), std::sqrt(V * n3));
        csv << buf;
    }

    json fits;
    fits["regime"] = to_string(regime.classification);
    fits["B_beta"] = regime.B_beta;
    // Periodization horizon estimate: half-box travel time (reported, not
    // asserted; the group speed is O(sqrt(B_beta)) near unit frequencies).
    fits["periodization_horizon_estimate"] = 0.5 * g.Ly;
    if (regime.classification == Regime::dispersive) {
        double f_lo = cfg.get_double("fit_lo", 40.0);
        double f_hi = cfg.get_double("fit_hi", t_hi);
        double gf_lo = cfg.get_double("good_fit_lo", 110.0);
        fits["u0_sup_slope"] = rate_fit_json(
            measure_rate(times, u0_sup, RateModel::power_law, f_lo, f_hi));
        fits["good_sup_slope"] = rate_fit_json(
            measure_rate(times, good_sup, RateModel::power_law, gf_lo, f_hi));
        std::vector<SpectralField> snaps;
        std::vector<double> snap_t;
        for (std::size_t s = 0; s < times.size(); s += 2) {
            snap_t.push_back(times[s]);
            snaps.push_back(traj[s]);
        }
        auto st = strichartz_accumulators(snap_t, snaps, params.nu);
        fits["strichartz"] = json{{"l2t_linf", st.l2t_linf},
                                  {"l1t_grad_linf", st.l1t_grad_linf},
                                  {"l2t_u3_w1inf", st.l2t_u3_w1inf},
                                  {"l1t_dyu_w1inf", st.l1t_dyu_w1inf},
                                  {"ratio_l2t", st.ratio_l2t},
                                  {"ratio_l1t", st.ratio_l1t},
                                  {"ratio_u3", st.ratio_u3},
                                  {"ratio_dyu", st.ratio_dyu}};
    } else if (regime.classification == Regime::liftup) {
        // ||u0^1(t)|| growth rate against ||u0^2(0)||, plus the saturation cap.
        double u2_init = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int l = 0; l < g.nz; ++l) u2_init += std::norm(u0.at(1, 0, j, l));
        u2_init = std::sqrt(g.volume() * u2_init);
        double window = 0.1 / std::max(params.nu, 1e-12);
        auto fit = measure_rate(times, u01_l2, RateModel::linear, 0.0,
                                std::min(window, t_hi), 5);
        fits["liftup_rate"] = fit.rate;
        fits["u02_init"] = u2_init;
        fits["liftup_rate_rel_err"] = std::abs(fit.rate - u2_init) / u2_init;
        double sup = *std::max_element(u01_l2.begin(), u01_l2.end());
        fits["saturation_sup"] = sup;
        fits["saturation_C_nu"] = sup * params.nu / u2_init;
        fits["final_over_peak"] = u01_l2.back() / sup;
    } else {
        // Exponentially unstable regime: measured per-mode growth rates
        // against the symbol eigenvalue sqrt(-B) |eta|/rho.
        double B = regime.B_beta;
        double worst = 0.0;
        int checked = 0;
        for (int j = 1; j < g.ny && checked < 24; j += g.ny / 6)
            for (int l = 1; l < g.nz && checked < 24; l += g.nz / 6) {
                Mode m{0.0, g.ky(j), g.kz(l)};
                double rho = std::hypot(m.xi, m.eta);
                double lam = std::sqrt(-B) * std::abs(m.eta) / rho;
                if (lam < 1e-6) continue;
                Complex u1a, psia, u1b, psib;
                double t1 = 40.0 / lam, t2 = 1.25 * t1;
                zero_mode_mode_solution({0.7, 0.0}, {0.4, -0.1}, m.eta / rho,
                                        rho * rho, params, t1, u1a, psia);
                zero_mode_mode_solution({0.7, 0.0}, {0.4, -0.1}, m.eta / rho,
                                        rho * rho, params, t2, u1b, psib);
                double measured = std::log(std::abs(u1b) / std::abs(u1a)) / (t2 - t1);
                worst = std::max(worst, std::abs(measured - lam) / lam);
                checked++;
            }
        fits["growth_rate_max_rel_err"] = worst;
        fits["growth_modes_checked"] = checked;
    }
    auto fj = out.open("fits.json");
    fj << fits.dump(2) << "\n";
    out.finish(exit_ok);
    std::cout << "linear-disp done (" << to_string(regime.classification) << ")\n";
    return exit_ok;
}

int cmd_linear_ed(const KeyValueConfig& cfg) {
    OutputDir out(cfg.get_string("out", "runs"), "linear-ed", cfg);
    auto nu_list = cfg.get_double_list("nu", {1e-3, 1e-4, 1e-5, 1e-6});
    double beta = cfg.get_double("beta", 2.0);
    double damping_horizon = cfg.get_double("damping_horizon", 100.0);
    QwPacket packet = QwPacket::critical_layer(
        0.0, static_cast<int>(cfg.get_long("packet_nxi", 8)),
        static_cast<int>(cfg.get_long("packet_neta", 2)), cfg.get_double("packet_dxi", 0.5),
        cfg.get_double("packet_deta", 1.0));

    struct PerNu {
        double nu, t_efold, damping_sup;
        QwPacketSeries series;
    };
    std::vector<PerNu> results(nu_list.size());
    std::vector<std::function<void()>> jobs;
    for (std::size_t i = 0; i < nu_list.size(); ++i)
        jobs.push_back([&, i]() {
            PhysicalParams p{nu_list[i], beta};
            double T = horizon_from(cfg, nu_list[i]);
            auto series = qw_packet_evolve(packet, p, T, cfg.get_double("sample_dt", 0.5));
            PerNu r;
            r.nu = nu_list[i];
            r.t_efold = efolding_time(series.t, series.qw_norm);
            double damp = 0.0;
            for (std::size_t s = 0; s < series.t.size(); ++s) {
                if (series.t[s] > damping_horizon) break;
                damp = std::max(damp,
                                (1.0 + series.t[s]) * series.u2_norm[s] / series.u2_norm[0]);
            }
            r.damping_sup = damp;
            r.series = std::move(series);
            results[i] = std::move(r);
        });
    run_job_pool(jobs, static_cast<unsigned>(cfg.get_long("workers", 2)));

    json fits;
    std::vector<double> log_nu, log_te;
    char buf[256];
    for (const auto& r : results) {
        std::snprintf(buf, sizeof(buf), "packet_nu_%g.csv", r.nu);
        auto csv = out.open(buf);
        csv << "t,qw_norm,u2_norm,q_norm\n";
        for (std::size_t s = 0; s < r.series.t.size(); ++s) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", r.series.t[s],
                          r.series.qw_norm[s], r.series.u2_norm[s], r.series.q_norm[s]);
            csv << buf;
        }
        fits["efold"][std::to_string(r.nu)] = r.t_efold;
        fits["damping_sup"][std::to_string(r.nu)] = r.damping_sup;
        if (std::isfinite(r.t_efold)) {
            log_nu.push_back(std::log(r.nu));
            log_te.push_back(std::log(r.t_efold));
        }
        std::cout << "nu=" << r.nu << "  T_e=" << r.t_efold
                  << "  damping_sup=" << r.damping_sup << "\n";
    }
    if (log_nu.size() >= 2) {
        auto [slope, icpt] = fit_line(log_nu, log_te);
        (void)icpt;
        fits["efold_exponent"] = slope;
        std::cout << "e-folding exponent vs nu: " << slope << "\n";
    }
    auto fj = out.open("fits.json");
    fj << fits.dump(2) << "\n";
    out.finish(exit_ok);
    return exit_ok;
}

int cmd_nonlinear_run(const KeyValueConfig& cfg) {
    OutputDir out(cfg.get_string("out", "runs"), "nonlinear-run", cfg);
    RunSpec spec;
    spec.grid = grid_from(cfg);
    spec.params = PhysicalParams{cfg.get_double("nu", 1e-3), cfg.get_double("beta", 2.0)};
    spec.params.validate();
    spec.initial = initial_from(cfg);
    spec.linearized = cfg.get_bool("linearized", false);
    spec.dt = cfg.get_double("dt", 0.0125);
    spec.t_end = horizon_from(cfg, spec.params.nu);
    spec.sample_dt = cfg.get_double("sample_dt", 0.5);
    spec.amplification_G = cfg.get_double("G", 10.0);
    spec.keep_final_state = true;
    MultiplierSet mult(multiplier_params_from(cfg));

    RunResult r = run_trajectory(spec, mult);
    auto csv = out.open("energy.csv");
    csv << energy_csv_header() << "\n";
    for (const auto& rec : r.records) append_energy_csv(csv, rec);
    if (r.final_state) {
        fs::create_directories(out.dir / "checkpoints");
        write_checkpoint((out.dir / "checkpoints" / "final.bin").string(),
                         r.final_state->u_hat, r.final_state->t, r.final_state->last_remap,
                         spec.params.nu, spec.params.beta, r.final_state->discarded_energy);
        out.manifest["outputs"].push_back("checkpoints/final.bin");
    }
    out.manifest["label"] = to_string(r.label);
    out.manifest["diverged"] = r.diverged;
    out.manifest["sup_energy_ratio"] = r.sup_energy_ratio;
    out.manifest["t_final"] = r.t_final;
    int code = r.diverged ? exit_divergence : exit_ok;
    out.finish(code);
    std::cout << "nonlinear-run: label=" << to_string(r.label)
              << " sup_ratio=" << r.sup_energy_ratio << " t_final=" << r.t_final << "\n";
    return code;
}

int cmd_threshold_sweep(const KeyValueConfig& cfg) {
    OutputDir out(cfg.get_string("out", "runs"), "threshold-sweep", cfg);
    auto nu_list = cfg.get_double_list("nu", {0.03125, 0.015625, 0.0078125, 0.00390625,
                                              0.001953125});
    double beta = cfg.get_double("beta", 2.0);
    double eps_min = cfg.get_double("eps_min", 1e-4);
    double eps_max = cfg.get_double("eps_max", 4.0);
    double factor = cfg.get_double("scan_factor", 2.0);
    int n_iter = static_cast<int>(cfg.get_long("n_iter", 8));
    MultiplierSet mult(multiplier_params_from(cfg));

    auto make_probe = [&](double nu) {
        return [&, nu](double eps) {
            RunSpec spec;
            spec.grid = grid_from(cfg);
            spec.params = PhysicalParams{nu, beta};
            spec.initial = initial_from(cfg);
            if (!cfg.has("zero_mode_fraction")) spec.initial.zero_mode_fraction = 0.3;
            spec.initial.amplitude = eps;
            spec.dt = cfg.get_double("dt", 0.05);
            spec.t_end = horizon_from(cfg, nu);
            spec.sample_dt = cfg.get_double("sample_dt", 1.0);
            // Default amplification threshold sits above the linear lift-up
            // envelope so "unstable" measures nonlinear growth at every beta.
            spec.amplification_G = cfg.has("G")
                                       ? cfg.get_double("G", 10.0)
                                       : 2.0 * std::sqrt(1.0 + spec.t_end * spec.t_end);
            spec.early_stop_on_amplification = true;
            RunResult r = run_trajectory(spec, mult);
            ThresholdProbe p;
            p.eps = eps;
            p.label = r.label;
            p.sup_energy_ratio = r.sup_energy_ratio;
            p.t_final = r.t_final;
            return p;
        };
    };

    std::vector<ThresholdResult> results(nu_list.size());
    std::vector<std::string> errors(nu_list.size());
    std::vector<std::function<void()>> jobs;
    for (std::size_t i = 0; i < nu_list.size(); ++i)
        jobs.push_back([&, i]() {
            auto probe = make_probe(nu_list[i]);
            ThresholdResult res;
            res.nu = nu_list[i];
            res.beta = beta;
            try {
                auto [lo, hi] = scan_bracket(eps_min, eps_max, factor, probe, &res.probes);
                ThresholdResult b = bisect_threshold(nu_list[i], beta, lo, hi, n_iter, probe);
                b.probes.insert(b.probes.begin(), res.probes.begin(), res.probes.end());
                results[i] = b;
            } catch (const BracketError& e) {
                errors[i] = e.what();
                results[i] = res;
            }
        });
    run_job_pool(jobs, static_cast<unsigned>(cfg.get_long("workers", 2)));

    auto csv = out.open("thresholds.csv");
    csv << "nu,beta,eps_star,eps_lo,eps_hi,n_probes\n";
    auto pcsv = out.open("probes.csv");
    pcsv << "nu,eps,label,sup_energy_ratio,t_final\n";
    char buf[320];
    std::vector<ThresholdResult> good;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        if (!errors[i].empty()) {
            out.manifest["errors"][std::to_string(r.nu)] = errors[i];
            std::cout << "nu=" << r.nu << ": " << errors[i] << "\n";
        } else {
            good.push_back(r);
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%zu\n", r.nu,
                          r.beta, r.eps_star, r.eps_lo, r.eps_hi, r.probes.size());
            csv << buf;
            std::cout << "nu=" << r.nu << "  eps_star=" << r.eps_star << "\n";
        }
        for (const auto& p : r.probes) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%s,%.17g,%.17g\n", r.nu, p.eps,
                          to_string(p.label).c_str(), p.sup_energy_ratio, p.t_final);
            pcsv << buf;
        }
    }
    json fits;
    if (good.size() >= 4) {
        AlphaFit af = fit_alpha(good);
        fits["alpha"] = af.alpha;
        fits["alpha_ci"] = json::array({af.ci_lo, af.ci_hi});
        fits["n_points"] = af.n_points;
        std::cout << "fitted alpha=" << af.alpha << "  CI=[" << af.ci_lo << ", " << af.ci_hi
                  << "]\n";
    }
    json thresholds = json::array();
    for (const auto& r : good)
        thresholds.push_back(json{{"nu", r.nu}, {"eps_star", r.eps_star}});
    fits["thresholds"] = thresholds;
    auto fj = out.open("fits.json");
    fj << fits.dump(2) << "\n";
    out.finish(exit_ok);
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rotstab: pseudo-spectral laboratory for rotating Couette stability"};
    app.require_subcommand(1);

    std::string config_path, out_base = "runs";
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "flat key=value config file (include supported)")
        ->expected(1);
    app.add_option("--out", out_base, "output base directory");
    app.add_option("--set,-D", overrides, "override config entries as key=value");

    const char* names[] = {"linear-disp", "linear-ed",     "kernels",
                           "multiplier-audit", "nonlinear-run", "threshold-sweep"};
    const char* descr[] = {"zero-mode linear dispersion/lift-up measurements",
                           "enhanced dissipation and damping of (Q,W) packets",
                           "dispersive kernel sup scans",
                           "random-sample audits of the multiplier inequalities",
                           "full nonlinear solver run",
                           "stability-threshold bisection sweep"};
    std::map<std::string, CLI::App*> subs;
    for (int i = 0; i < 6; ++i) {
        subs[names[i]] = app.add_subcommand(names[i], descr[i]);
        subs[names[i]]->fallthrough();  // let --config/--out/--set follow the subcommand
    }

    // Frequently used knobs as first-class flags on every subcommand.
    std::map<std::string, std::map<std::string, std::string>> flag_values;
    for (auto& [name, sub] : subs) {
        for (const char* key : {"nu", "beta", "eps", "grid", "horizon", "seed", "dt",
                                "profile", "samples", "G"}) {
            auto* opt = sub->add_option("--" + std::string(key));
            opt->each([&flag_values, name = name, key](const std::string& v) {
                flag_values[name][key] = v;
            });
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? exit_ok : exit_config;
    }

    try {
        KeyValueConfig cfg;
        if (!config_path.empty()) cfg = KeyValueConfig::from_file(config_path);
        std::string command = app.get_subcommands().front()->get_name();
        for (const auto& [k, v] : flag_values[command]) cfg.set(k, v);
        for (const auto& kv : overrides) {
            auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw ConfigError("--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!cfg.has("out")) cfg.set("out", out_base);

        if (command == "multiplier-audit") return cmd_multiplier_audit(cfg);
        if (command == "kernels") return cmd_kernels(cfg);
        if (command == "linear-disp") return cmd_linear_disp(cfg);
        if (command == "linear-ed") return cmd_linear_ed(cfg);
        if (command == "nonlinear-run") return cmd_nonlinear_run(cfg);
        if (command == "threshold-sweep") return cmd_threshold_sweep(cfg);
        throw ConfigError("unknown command " + command);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return exit_config;
    } catch (const DivergenceError& e) {
        std::cerr << "numerical divergence: " << e.what() << "\n";
        return exit_divergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
