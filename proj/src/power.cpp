#include "smallnoise/power.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "smallnoise/parallel.hpp"
#include "smallnoise/rng.hpp"
#include "smallnoise/stats.hpp"

namespace smallnoise {

std::string to_string(StatKind kind) {
    switch (kind) {
        case StatKind::Cvm:
            return "cvm";
        case StatKind::Ks:
            return "ks";
        case StatKind::CvmPlugin:
            return "cvm-plugin";
        case StatKind::KsPlugin:
            return "ks-plugin";
        case StatKind::CvmIntegral:
            return "cvm-integral";
        case StatKind::DegenerateStart:
            return "degenerate";
        case StatKind::ChiSq:
            return "chisq";
        case StatKind::ChiSqWeighted:
            return "chisq-weighted";
        case StatKind::LocalTime:
            return "localtime";
    }
    return "?";
}

StatKind stat_kind_from_string(const std::string& name) {
    if (name == "cvm") return StatKind::Cvm;
    if (name == "ks") return StatKind::Ks;
    if (name == "cvm-plugin") return StatKind::CvmPlugin;
    if (name == "ks-plugin") return StatKind::KsPlugin;
    if (name == "cvm-integral") return StatKind::CvmIntegral;
    if (name == "degenerate") return StatKind::DegenerateStart;
    if (name == "chisq") return StatKind::ChiSq;
    if (name == "chisq-weighted") return StatKind::ChiSqWeighted;
    if (name == "localtime") return StatKind::LocalTime;
    throw std::invalid_argument("unknown statistic: " + name);
}

RefDistribution limit_law(StatKind kind) {
    switch (kind) {
        case StatKind::Ks:
        case StatKind::KsPlugin:
            return RefDistribution::SupAbsWiener;
        case StatKind::ChiSq:
        case StatKind::ChiSqWeighted:
            return RefDistribution::StdNormal;
        default:
            return RefDistribution::IntSquaredWiener;
    }
}

namespace {

// Spatial grid for the local-time statistic: bins of the nominal width
// spanning the limit range, padded so kernel mass near the endpoints is
// not clipped.
SpaceGrid local_time_grid(const NullModelContext& ctx, double x0, int bins) {
    const double x_T = ctx.limit.values.back();
    const double width = (x_T - x0) / bins;
    SpaceGrid grid;
    grid.lo = x0 - 5.0 * width;
    grid.hi = x_T + 5.0 * width;
    grid.n_bins = bins + 10;
    return grid;
}

}  // namespace

double compute_statistic(StatKind kind, const Trajectory& traj, const ModelSpec& spec,
                         const StatOptions& opts, const NullModelContext* ctx) {
    NullModelContext local_ctx;
    auto context = [&]() -> const NullModelContext& {
        if (ctx != nullptr) {
            return *ctx;
        }
        local_ctx = make_null_context(spec, traj.grid);
        return local_ctx;
    };
    switch (kind) {
        case StatKind::Cvm:
            return stat_cvm(traj, spec, context());
        case StatKind::Ks:
            return stat_ks(traj, spec, context());
        case StatKind::CvmPlugin:
            return stat_cvm_plugin(traj, spec, context());
        case StatKind::KsPlugin:
            return stat_ks_plugin(traj, spec, context());
        case StatKind::CvmIntegral:
            return stat_cvm_integral(traj, spec);
        case StatKind::DegenerateStart:
            return stat_degenerate_start(traj, spec);
        case StatKind::ChiSq: {
            const BasisSpec basis{traj.grid.T, opts.m};
            return stat_chisq(fourier_coeffs(traj, spec, basis));
        }
        case StatKind::ChiSqWeighted: {
            const BasisSpec basis{traj.grid.T, opts.m};
            return stat_chisq_weighted(fourier_coeffs(traj, spec, basis), opts.k_smooth);
        }
        case StatKind::LocalTime: {
            const NullModelContext& c = context();
            const SpaceGrid grid = local_time_grid(c, spec.x0, opts.bins);
            const double nu = opts.nu > 0.0 ? opts.nu : default_bandwidth(traj, grid);
            const LocalTimeCurve curve = local_time_occupation(traj, spec, grid, nu);
            return stat_localtime(curve, spec, c.limit);
        }
    }
    throw std::logic_error("unknown statistic kind");
}

AlternativeSpec alternative_from_json_text(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    AlternativeSpec alt;
    alt.h = CoefficientFn::parse(j.at("h").get<std::string>());
    const std::string scaling = j.at("scaling").get<std::string>();
    if (scaling == "eq7") {
        alt.scaling = AlternativeScaling::Eq7;
    } else if (scaling == "chisq") {
        alt.scaling = AlternativeScaling::ChiSquare;
    } else if (scaling == "fixed-drift") {
        alt.scaling = AlternativeScaling::FixedDrift;
    } else {
        throw std::invalid_argument("unknown alternative scaling: " + scaling);
    }
    if (j.contains("r") && !j.at("r").is_null()) {
        alt.contrast_r = j.at("r").get<double>();
    }
    if (j.contains("rho") && !j.at("rho").is_null()) {
        alt.rho = j.at("rho").get<double>();
    }
    return alt;
}

AlternativeSpec load_alternative_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open alternative file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return alternative_from_json_text(buf.str());
}

Trajectory simulate_under(const ModelSpec& spec, const AlternativeSpec* alt,
                          const TimeGrid& grid, std::uint64_t seed,
                          std::uint64_t replication) {
    if (alt == nullptr) {
        return simulate_sde(spec, grid, seed, replication);
    }
    return simulate_alternative(spec, alt->h, grid, seed, alt->scaling, replication);
}

std::vector<double> sample_statistics(const ModelSpec& spec, const AlternativeSpec* alt,
                                      StatKind kind, const StatOptions& opts,
                                      const TimeGrid& grid, std::uint64_t reps,
                                      std::uint64_t seed) {
    const NullModelContext ctx = make_null_context(spec, grid);
    std::vector<double> out(reps);
    parallel_for(reps, [&](std::size_t r) {
        const Trajectory traj = simulate_under(spec, alt, grid, seed, r);
        out[r] = compute_statistic(kind, traj, spec, opts, &ctx);
    });
    return out;
}

double estimate_power(StatKind kind, const StatOptions& opts, const ModelSpec& null_spec,
                      const AlternativeSpec& alt, const QuantileTable& table, double alpha,
                      std::uint64_t reps, std::uint64_t seed, std::uint64_t n_steps) {
    if (table.distribution != limit_law(kind)) {
        throw std::invalid_argument("estimate_power: table does not match the test's limit law");
    }
    const double threshold = table.critical_value(alpha);
    const std::vector<double> sample =
        sample_statistics(null_spec, &alt, kind, opts, TimeGrid{null_spec.T, n_steps}, reps,
                          seed);
    std::uint64_t rejections = 0;
    for (double v : sample) {
        if (v > threshold) {
            ++rejections;
        }
    }
    return static_cast<double>(rejections) / static_cast<double>(reps);
}

namespace {

// Fritsch-Carlson monotone cubic interpolation through (u_i, x_i).
struct MonotoneCubic {
    std::vector<double> u;
    std::vector<double> x;
    std::vector<double> slope;

    double operator()(double query) const {
        if (query <= u.front()) {
            return x.front();
        }
        if (query >= u.back()) {
            return x.back();
        }
        std::size_t lo = 0;
        std::size_t hi = u.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (u[mid] <= query) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        const double h = u[hi] - u[lo];
        const double t = (query - u[lo]) / h;
        const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        const double h10 = t * (1.0 - t) * (1.0 - t);
        const double h01 = t * t * (3.0 - 2.0 * t);
        const double h11 = t * t * (t - 1.0);
        return h00 * x[lo] + h10 * h * slope[lo] + h01 * x[hi] + h11 * h * slope[hi];
    }
};

MonotoneCubic make_monotone_cubic(std::vector<double> u, std::vector<double> x) {
    const std::size_t n = u.size();
    std::vector<double> secant(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        secant[i] = (x[i + 1] - x[i]) / (u[i + 1] - u[i]);
    }
    std::vector<double> slope(n);
    slope[0] = secant[0];
    slope[n - 1] = secant[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        slope[i] = 0.5 * (secant[i - 1] + secant[i]);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (secant[i] == 0.0) {
            slope[i] = 0.0;
            slope[i + 1] = 0.0;
            continue;
        }
        const double a = slope[i] / secant[i];
        const double b = slope[i + 1] / secant[i];
        const double norm_sq = a * a + b * b;
        if (norm_sq > 9.0) {
            const double tau = 3.0 / std::sqrt(norm_sq);
            slope[i] = tau * a * secant[i];
            slope[i + 1] = tau * b * secant[i];
        }
    }
    MonotoneCubic interp;
    interp.u = std::move(u);
    interp.x = std::move(x);
    interp.slope = std::move(slope);
    return interp;
}

}  // namespace

TimeChangedSignal build_time_changed_signal(const ModelSpec& spec, const CoefficientFn& h,
                                            int table_nodes) {
    const LimitPath limit = solve_limit_ode(spec, TimeGrid{spec.T, 4096});
    const double x_T = limit.values.back();
    const double span = x_T - spec.x0;
    if (!(span > 0.0)) {
        throw StatisticError("time change requires an increasing limit path");
    }
    std::vector<double> xs(static_cast<std::size_t>(table_nodes));
    std::vector<double> us(static_cast<std::size_t>(table_nodes));
    std::vector<double> integrand(static_cast<std::size_t>(table_nodes));
    for (int i = 0; i < table_nodes; ++i) {
        const double x =
            spec.x0 + span * static_cast<double>(i) / static_cast<double>(table_nodes - 1);
        const double s0 = spec.trend.eval(x);
        const double sig = spec.diffusion.eval(x);
        xs[static_cast<std::size_t>(i)] = x;
        integrand[static_cast<std::size_t>(i)] = sig * sig / (s0 * s0 * s0);
    }
    cumulative_trapezoid(integrand, span / (table_nodes - 1), us);
    const double u_T = us.back();

    auto inverse = make_monotone_cubic(std::move(us), std::move(xs));
    TimeChangedSignal signal;
    signal.u_T = u_T;
    signal.h_star = [inverse = std::move(inverse), u_T, h](double s) {
        return std::sqrt(u_T) * h.eval(inverse(u_T * s));
    };
    return signal;
}

double limit_power_cvm(const std::function<double(double)>& h_star, double alpha,
                       std::uint64_t reps, std::uint64_t n_steps, std::uint64_t seed,
                       const QuantileTable* table) {
    double threshold = 0.0;
    if (table != nullptr) {
        threshold = table->critical_value(alpha);
    } else {
        threshold = mc_critical_value(RefDistribution::IntSquaredWiener, alpha, reps, n_steps,
                                      seed + 1);
    }
    // Tabulate the signal once; replications only redraw the noise.
    const double dt = 1.0 / static_cast<double>(n_steps);
    std::vector<double> signal_cum(n_steps);  // int_0^{s_i} h* ds, left Riemann
    double acc = 0.0;
    for (std::uint64_t i = 0; i < n_steps; ++i) {
        signal_cum[i] = acc;
        acc += h_star(static_cast<double>(i) * dt) * dt;
    }
    std::vector<std::uint8_t> reject(reps, 0);
    parallel_for(reps, [&](std::size_t r) {
        const RandomStream noise = replication_stream(seed, r, 0);
        const double sqrt_dt = std::sqrt(dt);
        double w = 0.0;
        double int_sq = 0.0;
        for (std::uint64_t i = 0; i < n_steps; ++i) {
            const double y = signal_cum[i] + w;
            int_sq += y * y * dt;
            w += sqrt_dt * noise.normal(i);
        }
        reject[r] = int_sq > threshold ? 1 : 0;
    });
    std::uint64_t count = 0;
    for (std::uint8_t b : reject) {
        count += b;
    }
    return static_cast<double>(count) / static_cast<double>(reps);
}

AlternativeSpec degenerate_family(const ModelSpec& spec, int n, double c) {
    if (n < 0 || !(c > 0.0)) {
        throw std::invalid_argument("degenerate_family: need n >= 0 and c > 0");
    }
    const CoefficientFn x = CoefficientFn::variable(spec.trend.uses_variable()
                                                        ? spec.trend.variable_name()
                                                        : std::string("x"));
    const CoefficientFn phase =
        CoefficientFn::constant(static_cast<double>(n)) * (x - CoefficientFn::constant(spec.x0));
    const CoefficientFn oscillation = CoefficientFn::call(FuncId::Cos, phase);
    AlternativeSpec alt;
    alt.h = CoefficientFn::constant(c) * (spec.trend * spec.trend) /
            (spec.diffusion * spec.diffusion) * oscillation;
    alt.scaling = AlternativeScaling::Eq7;
    return alt;
}

DegenerateScale degenerate_scale_for_contrast(const ModelSpec& spec, double r) {
    const LimitPath limit = solve_limit_ode(spec, TimeGrid{spec.T, 4096});
    const double x_T = limit.values.back();
    const int nodes = 2049;
    const double span = x_T - spec.x0;
    std::vector<double> integrand(nodes);
    for (int i = 0; i < nodes; ++i) {
        const double x = spec.x0 + span * static_cast<double>(i) / (nodes - 1);
        const double s0 = spec.trend.eval(x);
        const double sig = spec.diffusion.eval(x);
        integrand[static_cast<std::size_t>(i)] = s0 / (sig * sig);
    }
    const double mass = trapezoid(integrand, span / (nodes - 1));
    DegenerateScale scale;
    scale.c = 2.0 * r / (spec.epsilon * std::sqrt(mass));
    scale.n = scale.c * scale.c;
    return scale;
}

void write_power_curve_csv(const std::string& path, const PowerCurve& curve) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    out << "x,power,se\n";
    std::array<char, 128> line{};
    for (std::size_t i = 0; i < curve.x_axis.size(); ++i) {
        std::snprintf(line.data(), line.size(), "%.17g,%.17g,%.17g\n", curve.x_axis[i],
                      curve.power[i], curve.se[i]);
        out << line.data();
    }
}

}  // namespace smallnoise
