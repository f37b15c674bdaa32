// Command-line front end: model configs in, reports and plot-ready CSV out.
// Machine-first output (JSON / CSV files); one line per test on stdout.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smallnoise/chisq.hpp"
#include "smallnoise/composite.hpp"
#include "smallnoise/gof.hpp"
#include "smallnoise/kalman.hpp"
#include "smallnoise/localtime.hpp"
#include "smallnoise/model.hpp"
#include "smallnoise/parallel.hpp"
#include "smallnoise/power.hpp"
#include "smallnoise/refdist.hpp"
#include "smallnoise/report.hpp"
#include "smallnoise/sde.hpp"

namespace {

using namespace smallnoise;

struct CommonOpts {
    double alpha = 0.05;
    std::uint64_t seed = 1;
    std::uint64_t reps = 2000;
    std::uint64_t steps = 10000;
    std::uint64_t calib_reps = 200000;
    std::uint64_t calib_steps = 2048;
    unsigned threads = 0;
    bool no_cache = false;
    bool fail_on_reject = false;
    std::string out;
};

// Calibration noise must not overlap the test simulations driven by --seed.
std::uint64_t calibration_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ull; }

QuantileTable threshold_table(RefDistribution dist, const CommonOpts& opts) {
    return load_or_compute_table(default_cache_dir(), dist, {opts.alpha}, opts.calib_reps,
                                 opts.calib_steps, calibration_seed(opts.seed),
                                 !opts.no_cache);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    out << text << '\n';
}

void print_report_line(const TestReport& report) {
    std::printf("%-14s value=%.6g threshold=%.6g alpha=%.3g -> %s\n",
                report.statistic_name.c_str(), report.value, report.threshold, report.alpha,
                report.reject ? "REJECT" : "accept");
}

void emit_report(const TestReport& report, const std::string& out_path) {
    print_report_line(report);
    if (!out_path.empty()) {
        write_text(out_path, report_to_json(report));
    }
}

TestReport run_single_stat(const std::string& stat_name, const Trajectory& traj,
                           const ModelSpec& spec, const StatOptions& stat_opts,
                           const CommonOpts& opts) {
    const StatKind kind = stat_kind_from_string(stat_name);
    const double value = compute_statistic(kind, traj, spec, stat_opts);
    TestReport report;
    if (kind == StatKind::ChiSq && stat_opts.m <= 100) {
        // exact finite-m law of the centered sum
        report.statistic_name = stat_name;
        report.value = value;
        report.threshold = chisq_exact_threshold(stat_opts.m, opts.alpha);
        report.alpha = opts.alpha;
        report.reject = value > report.threshold;
    } else {
        const QuantileTable table = threshold_table(limit_law(kind), opts);
        report = decide(value, table, opts.alpha, stat_name);
    }
    if (kind == StatKind::Cvm || kind == StatKind::Ks) {
        report.diagnostics["u_T"] = time_change_total(spec, traj.grid);
    }
    if (kind == StatKind::CvmIntegral) {
        IntegralStatDiagnostics diag;
        stat_cvm_integral(traj, spec, &diag, nullptr);
        report.diagnostics["tau_T"] = diag.tau_T;
    }
    if (kind == StatKind::ChiSq || kind == StatKind::ChiSqWeighted) {
        report.diagnostics["m"] = stat_opts.m;
    }
    return report;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string current;
    for (char c : csv) {
        if (c == ',') {
            out.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    out.push_back(current);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Goodness-of-fit testing for dynamical systems observed with small noise"};
    app.require_subcommand(1);

    CommonOpts opts;

    std::string model_path;
    std::string alt_path;
    std::string trajectory_path;
    std::string stat_csv = "cvm";
    std::string eps_grid_csv;
    std::string dist_name = "int-sq-wiener";
    std::string alpha_csv = "0.05";
    std::string curve_out;
    std::string coeffs_out;
    StatOptions stat_opts;
    double contrast_r = 0.0;

    auto add_base = [&](CLI::App* cmd) {
        cmd->add_option("--seed", opts.seed, "master seed; all randomness derives from it");
        cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
        cmd->add_flag("--no-cache", opts.no_cache, "recompute calibration tables");
    };
    auto add_common = [&](CLI::App* cmd) {
        add_base(cmd);
        cmd->add_option("--alpha", opts.alpha, "nominal test level");
        cmd->add_option("--reps", opts.reps, "Monte Carlo replications");
        cmd->add_option("--steps", opts.steps, "time grid steps");
        cmd->add_option("--out", opts.out, "output file (JSON or CSV)");
        cmd->add_option("--calib-reps", opts.calib_reps, "calibration replications");
        cmd->add_option("--calib-steps", opts.calib_steps, "calibration path steps");
    };

    CLI::App* calibrate = app.add_subcommand("calibrate", "Monte Carlo critical values");
    calibrate->add_option("--dist", dist_name,
                          "int-sq-wiener | sup-abs-wiener | std-normal");
    calibrate->add_option("--alpha", alpha_csv, "comma-separated levels");
    calibrate->add_option("--reps", opts.calib_reps, "replications");
    calibrate->add_option("--steps", opts.calib_steps, "path steps");
    calibrate->add_option("--out", opts.out, "also write the table here");
    add_base(calibrate);

    CLI::App* simulate = app.add_subcommand("simulate", "sample one trajectory to CSV");
    simulate->add_option("--model", model_path, "model JSON")->required();
    simulate->add_option("--alt", alt_path, "alternative JSON (perturbed drift)");
    add_common(simulate);

    CLI::App* test = app.add_subcommand("test", "run statistics on a trajectory");
    test->add_option("--model", model_path, "model JSON (matches --stat)")->required();
    test->add_option("--trajectory", trajectory_path, "trajectory CSV (simulated if absent)");
    test->add_option("--stat", stat_csv,
                     "comma-separated: cvm,ks,cvm-plugin,ks-plugin,cvm-integral,degenerate,"
                     "chisq,chisq-weighted,localtime,kalman,adf");
    test->add_option("--m", stat_opts.m, "chi-square coefficient count");
    test->add_option("--k-smooth", stat_opts.k_smooth, "weight smoothness order");
    test->add_option("--contrast-r", contrast_r, "target contrast (sets m)");
    test->add_option("--nu", stat_opts.nu, "local-time bandwidth (0 = rule)");
    test->add_option("--bins", stat_opts.bins, "local-time spatial bins");
    test->add_option("--coeffs-out", coeffs_out,
                     "write chi-square Fourier coefficients CSV here");
    test->add_flag("--fail-on-reject", opts.fail_on_reject,
                   "exit 1 when any test rejects");
    add_common(test);

    CLI::App* power = app.add_subcommand("power", "empirical power over an epsilon grid");
    power->add_option("--model", model_path, "null model JSON")->required();
    power->add_option("--alt", alt_path, "alternative JSON")->required();
    power->add_option("--eps-grid", eps_grid_csv, "comma-separated epsilon values")
        ->required();
    power->add_option("--stat", stat_csv, "statistic");
    power->add_option("--m", stat_opts.m, "chi-square coefficient count");
    power->add_option("--k-smooth", stat_opts.k_smooth, "weight smoothness order");
    power->add_option("--nu", stat_opts.nu, "local-time bandwidth");
    power->add_option("--bins", stat_opts.bins, "local-time spatial bins");
    add_common(power);

    CLI::App* kalman_cmd = app.add_subcommand("kalman", "partially observed linear system");
    kalman_cmd->add_option("--model", model_path, "linear system JSON")->required();
    kalman_cmd->add_option("--trajectory", trajectory_path,
                           "observation CSV (simulated if absent)");
    kalman_cmd->add_flag("--fail-on-reject", opts.fail_on_reject, "exit 1 on rejection");
    add_common(kalman_cmd);

    CLI::App* localtime_cmd = app.add_subcommand("localtime", "local-time curve and test");
    localtime_cmd->add_option("--model", model_path, "model JSON")->required();
    localtime_cmd->add_option("--trajectory", trajectory_path,
                              "trajectory CSV (simulated if absent)");
    localtime_cmd->add_option("--nu", stat_opts.nu, "bandwidth (0 = rule)");
    localtime_cmd->add_option("--bins", stat_opts.bins, "spatial bins");
    localtime_cmd->add_option("--curve-out", curve_out, "write the curve CSV here");
    localtime_cmd->add_flag("--fail-on-reject", opts.fail_on_reject, "exit 1 on rejection");
    add_common(localtime_cmd);

    CLI::App* composite_cmd =
        app.add_subcommand("composite", "parametric null: MLE and ADF test");
    composite_cmd->add_option("--model", model_path, "parametric model JSON")->required();
    composite_cmd->add_option("--trajectory", trajectory_path,
                              "trajectory CSV (simulated at theta mid-range if absent)");
    composite_cmd->add_flag("--fail-on-reject", opts.fail_on_reject, "exit 1 on rejection");
    add_common(composite_cmd);

    CLI11_PARSE(app, argc, argv);
    if (opts.threads != 0) {
        set_default_threads(opts.threads);
    }

    bool any_rejection = false;
    try {
        if (calibrate->parsed()) {
            std::vector<double> alphas;
            for (const auto& a : split_list(alpha_csv)) {
                alphas.push_back(std::stod(a));
            }
            const RefDistribution dist = ref_distribution_from_string(dist_name);
            const QuantileTable table =
                load_or_compute_table(default_cache_dir(), dist, alphas, opts.calib_reps,
                                      opts.calib_steps, opts.seed, !opts.no_cache);
            for (std::size_t i = 0; i < table.alphas.size(); ++i) {
                std::printf("%s alpha=%.4g critical=%.6g (reps=%llu steps=%llu)\n",
                            dist_name.c_str(), table.alphas[i], table.critical_values[i],
                            static_cast<unsigned long long>(table.replications),
                            static_cast<unsigned long long>(table.n_steps));
            }
            if (!opts.out.empty()) {
                write_text(opts.out, quantile_table_to_json(table));
            }
        } else if (simulate->parsed()) {
            const ModelSpec spec = load_model_json(model_path);
            const TimeGrid grid{spec.T, opts.steps};
            Trajectory traj;
            if (!alt_path.empty()) {
                const AlternativeSpec alt = load_alternative_json(alt_path);
                traj = simulate_under(spec, &alt, grid, opts.seed, 0);
            } else {
                traj = simulate_sde(spec, grid, opts.seed);
            }
            if (opts.out.empty()) {
                throw std::runtime_error("simulate requires --out for the trajectory CSV");
            }
            write_trajectory_csv(opts.out, traj);
            std::printf("trajectory: %llu steps, X_T=%.6g -> %s\n",
                        static_cast<unsigned long long>(grid.n_steps), traj.values.back(),
                        opts.out.c_str());
        } else if (test->parsed()) {
            std::vector<TestReport> reports;
            for (const auto& name : split_list(stat_csv)) {
                if (name == "kalman") {
                    const LinearSystemSpec spec = load_linear_system_json(model_path);
                    Trajectory x;
                    if (trajectory_path.empty()) {
                        x = simulate_linear_system(spec, TimeGrid{spec.T, opts.steps},
                                                   opts.seed)
                                .first;
                    } else {
                        x = read_trajectory_csv(trajectory_path);
                    }
                    const FilterPath fp = kalman_filter(x, spec);
                    const double value = stat_kalman(x, fp, spec);
                    const QuantileTable table =
                        threshold_table(RefDistribution::IntSquaredWiener, opts);
                    reports.push_back(decide(value, table, opts.alpha, "kalman"));
                } else if (name == "adf") {
                    const ParametricModel pm = load_parametric_model_json(model_path);
                    Trajectory traj;
                    if (trajectory_path.empty()) {
                        const double theta_mid = 0.5 * (pm.theta_min + pm.theta_max);
                        traj = simulate_sde(pm.at(theta_mid), TimeGrid{pm.T, opts.steps},
                                            opts.seed);
                    } else {
                        traj = read_trajectory_csv(trajectory_path);
                    }
                    const MleResult fit = mle(traj, pm);
                    const double value = stat_adf(traj, pm, fit);
                    const QuantileTable table =
                        threshold_table(RefDistribution::IntSquaredWiener, opts);
                    TestReport report = decide(value, table, opts.alpha, "adf");
                    report.diagnostics["theta_hat"] = fit.theta_hat;
                    report.diagnostics["fisher"] = fit.fisher;
                    reports.push_back(report);
                } else {
                    const ModelSpec spec = load_model_json(model_path);
                    if (contrast_r > 0.0) {
                        stat_opts.m = select_m(contrast_r, spec.epsilon);
                    }
                    Trajectory traj;
                    if (trajectory_path.empty()) {
                        traj = simulate_sde(spec, TimeGrid{spec.T, opts.steps}, opts.seed);
                    } else {
                        traj = read_trajectory_csv(trajectory_path);
                    }
                    if (!coeffs_out.empty() &&
                        (name == "chisq" || name == "chisq-weighted")) {
                        const BasisSpec basis{traj.grid.T, stat_opts.m};
                        write_fourier_coeffs_csv(coeffs_out,
                                                 fourier_coeffs(traj, spec, basis));
                    }
                    reports.push_back(run_single_stat(name, traj, spec, stat_opts, opts));
                }
            }
            std::string json = "[";
            for (std::size_t i = 0; i < reports.size(); ++i) {
                print_report_line(reports[i]);
                any_rejection = any_rejection || reports[i].reject;
                json += (i == 0 ? "\n" : ",\n") + report_to_json(reports[i]);
            }
            json += "\n]";
            if (!opts.out.empty()) {
                write_text(opts.out, json);
            }
        } else if (power->parsed()) {
            const ModelSpec base = load_model_json(model_path);
            const AlternativeSpec alt = load_alternative_json(alt_path);
            const StatKind kind = stat_kind_from_string(stat_csv);
            const QuantileTable table = threshold_table(limit_law(kind), opts);
            PowerCurve curve;
            curve.reps = opts.reps;
            curve.test_name = stat_csv;
            for (const auto& token : split_list(eps_grid_csv)) {
                ModelSpec spec = base;
                spec.epsilon = std::stod(token);
                if (alt.contrast_r.has_value()) {
                    stat_opts.m = select_m(*alt.contrast_r, spec.epsilon);
                }
                const double p = estimate_power(kind, stat_opts, spec, alt, table,
                                                opts.alpha, opts.reps, opts.seed, opts.steps);
                curve.x_axis.push_back(spec.epsilon);
                curve.power.push_back(p);
                curve.se.push_back(
                    std::sqrt(std::max(p * (1.0 - p), 1e-12) /
                              static_cast<double>(opts.reps)));
                std::printf("%-14s eps=%-8g power=%.4f se=%.4f\n", stat_csv.c_str(),
                            spec.epsilon, p, curve.se.back());
            }
            if (!opts.out.empty()) {
                write_power_curve_csv(opts.out, curve);
            }
        } else if (kalman_cmd->parsed()) {
            const LinearSystemSpec spec = load_linear_system_json(model_path);
            Trajectory x;
            if (trajectory_path.empty()) {
                x = simulate_linear_system(spec, TimeGrid{spec.T, opts.steps}, opts.seed)
                        .first;
            } else {
                x = read_trajectory_csv(trajectory_path);
            }
            const FilterPath fp = kalman_filter(x, spec);
            const double value = stat_kalman(x, fp, spec);
            const QuantileTable table =
                threshold_table(RefDistribution::IntSquaredWiener, opts);
            TestReport report = decide(value, table, opts.alpha, "kalman");
            report.diagnostics["Gamma_T"] = fp.Gamma.back();
            report.diagnostics["M_T"] = fp.M.back();
            any_rejection = report.reject;
            emit_report(report, opts.out);
        } else if (localtime_cmd->parsed()) {
            const ModelSpec spec = load_model_json(model_path);
            Trajectory traj;
            if (trajectory_path.empty()) {
                traj = simulate_sde(spec, TimeGrid{spec.T, opts.steps}, opts.seed);
            } else {
                traj = read_trajectory_csv(trajectory_path);
            }
            const NullModelContext ctx = make_null_context(spec, traj.grid);
            const double x_T = ctx.limit.values.back();
            const double width = (x_T - spec.x0) / stat_opts.bins;
            SpaceGrid grid{spec.x0 - 5.0 * width, x_T + 5.0 * width, stat_opts.bins + 10};
            const double nu =
                stat_opts.nu > 0.0 ? stat_opts.nu : default_bandwidth(traj, grid);
            const LocalTimeCurve curve = local_time_occupation(traj, spec, grid, nu);
            if (!curve_out.empty()) {
                write_local_time_csv(curve_out, curve);
            }
            const double value = stat_localtime(curve, spec, ctx.limit);
            const QuantileTable table =
                threshold_table(RefDistribution::IntSquaredWiener, opts);
            TestReport report = decide(value, table, opts.alpha, "localtime");
            report.diagnostics["nu"] = nu;
            report.diagnostics["bins"] = stat_opts.bins;
            any_rejection = report.reject;
            emit_report(report, opts.out);
        } else if (composite_cmd->parsed()) {
            const ParametricModel pm = load_parametric_model_json(model_path);
            Trajectory traj;
            if (trajectory_path.empty()) {
                const double theta_mid = 0.5 * (pm.theta_min + pm.theta_max);
                traj = simulate_sde(pm.at(theta_mid), TimeGrid{pm.T, opts.steps}, opts.seed);
            } else {
                traj = read_trajectory_csv(trajectory_path);
            }
            const MleResult fit = mle(traj, pm);
            const double value = stat_adf(traj, pm, fit);
            const QuantileTable table =
                threshold_table(RefDistribution::IntSquaredWiener, opts);
            TestReport report = decide(value, table, opts.alpha, "adf");
            report.diagnostics["theta_hat"] = fit.theta_hat;
            report.diagnostics["fisher"] = fit.fisher;
            report.diagnostics["loglik"] = fit.loglik;
            report.diagnostics["boundary"] = fit.boundary ? 1.0 : 0.0;
            any_rejection = report.reject;
            emit_report(report, opts.out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return opts.fail_on_reject && any_rejection ? 1 : 0;
}
