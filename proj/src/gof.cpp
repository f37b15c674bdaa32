#include "smallnoise/gof.hpp"

#include <cmath>
#include <string>

#include "smallnoise/stats.hpp"

namespace smallnoise {

namespace {

void check_compatible(const Trajectory& traj, const ModelSpec& spec) {
    if (traj.values.size() != traj.grid.n_nodes() || traj.values.size() < 2) {
        throw StatisticError("trajectory length does not match its grid");
    }
    if (std::abs(traj.values.front() - spec.x0) > 1e-9 * (1.0 + std::abs(spec.x0))) {
        throw StatisticError("trajectory does not start at the model x0");
    }
}

void check_positive_trend(const std::vector<double>& trend) {
    for (std::size_t i = 0; i < trend.size(); ++i) {
        if (!(trend[i] > 0.0)) {
            throw StatisticError("trend not positive along the limit path (node " +
                                 std::to_string(i) + ")");
        }
    }
}

}  // namespace

NullModelContext make_null_context(const ModelSpec& spec, const TimeGrid& grid) {
    NullModelContext ctx;
    ctx.limit = solve_limit_ode(spec, grid);
    const std::size_t n = ctx.limit.values.size();
    ctx.trend_on_limit.resize(n);
    ctx.diff_on_limit.resize(n);
    std::vector<double> ratio_sq(n);
    std::vector<double> diff_sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = ctx.limit.values[i];
        ctx.trend_on_limit[i] = spec.trend.eval(x);
        ctx.diff_on_limit[i] = spec.diffusion.eval(x);
        diff_sq[i] = ctx.diff_on_limit[i] * ctx.diff_on_limit[i];
    }
    check_positive_trend(ctx.trend_on_limit);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ctx.diff_on_limit[i] / ctx.trend_on_limit[i];
        ratio_sq[i] = r * r;
    }
    const double dt = grid.dt();
    ctx.u_T = trapezoid(ratio_sq, dt);
    ctx.tau_T_limit = trapezoid(diff_sq, dt);
    return ctx;
}

double stat_cvm(const Trajectory& traj, const ModelSpec& spec, const NullModelContext& ctx) {
    check_compatible(traj, spec);
    const std::size_t n = traj.values.size();
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s0 = ctx.trend_on_limit[i];
        const double sig = ctx.diff_on_limit[i];
        const double r = (traj.values[i] - ctx.limit.values[i]) / (spec.epsilon * s0 * s0);
        integrand[i] = r * r * sig * sig;
    }
    const double value = trapezoid(integrand, traj.grid.dt());
    return value / (ctx.u_T * ctx.u_T);
}

double stat_cvm(const Trajectory& traj, const ModelSpec& spec) {
    return stat_cvm(traj, spec, make_null_context(spec, traj.grid));
}

double stat_ks(const Trajectory& traj, const ModelSpec& spec, const NullModelContext& ctx) {
    check_compatible(traj, spec);
    double sup = 0.0;
    for (std::size_t i = 0; i < traj.values.size(); ++i) {
        sup = std::max(sup, std::abs((traj.values[i] - ctx.limit.values[i]) /
                                     (spec.epsilon * ctx.trend_on_limit[i])));
    }
    return sup / std::sqrt(ctx.u_T);
}

double stat_ks(const Trajectory& traj, const ModelSpec& spec) {
    return stat_ks(traj, spec, make_null_context(spec, traj.grid));
}

namespace {

// Shared arrays for the plug-in statistics: coefficients along X.
struct PluginArrays {
    std::vector<double> trend;
    std::vector<double> diff;
    double u_T = 0.0;
};

PluginArrays make_plugin_arrays(const Trajectory& traj, const ModelSpec& spec) {
    const std::size_t n = traj.values.size();
    PluginArrays arrays;
    arrays.trend.resize(n);
    arrays.diff.resize(n);
    std::vector<double> ratio_sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        arrays.trend[i] = spec.trend.eval(traj.values[i]);
        if (!(arrays.trend[i] > 0.0)) {
            throw StatisticError("trend not positive along the observed path (node " +
                                 std::to_string(i) + ")");
        }
        arrays.diff[i] = spec.diffusion.eval(traj.values[i]);
        const double r = arrays.diff[i] / arrays.trend[i];
        ratio_sq[i] = r * r;
    }
    arrays.u_T = trapezoid(ratio_sq, traj.grid.dt());
    return arrays;
}

}  // namespace

double stat_cvm_plugin(const Trajectory& traj, const ModelSpec& spec,
                       const NullModelContext& ctx) {
    check_compatible(traj, spec);
    const PluginArrays arrays = make_plugin_arrays(traj, spec);
    const std::size_t n = traj.values.size();
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s0 = arrays.trend[i];
        const double sig = arrays.diff[i];
        const double r = (traj.values[i] - ctx.limit.values[i]) / (spec.epsilon * s0 * s0);
        integrand[i] = r * r * sig * sig;
    }
    const double value = trapezoid(integrand, traj.grid.dt());
    return value / (arrays.u_T * arrays.u_T);
}

double stat_cvm_plugin(const Trajectory& traj, const ModelSpec& spec) {
    return stat_cvm_plugin(traj, spec, make_null_context(spec, traj.grid));
}

double stat_ks_plugin(const Trajectory& traj, const ModelSpec& spec,
                      const NullModelContext& ctx) {
    check_compatible(traj, spec);
    const PluginArrays arrays = make_plugin_arrays(traj, spec);
    double sup = 0.0;
    for (std::size_t i = 0; i < traj.values.size(); ++i) {
        sup = std::max(sup, std::abs((traj.values[i] - ctx.limit.values[i]) /
                                     (spec.epsilon * arrays.trend[i])));
    }
    return sup / std::sqrt(arrays.u_T);
}

double stat_ks_plugin(const Trajectory& traj, const ModelSpec& spec) {
    return stat_ks_plugin(traj, spec, make_null_context(spec, traj.grid));
}

double stat_cvm_integral(const Trajectory& traj, const ModelSpec& spec,
                         IntegralStatDiagnostics* diag, const NullModelContext* ctx) {
    check_compatible(traj, spec);
    const std::size_t n = traj.values.size();
    const double dt = traj.grid.dt();
    std::vector<double> trend_on_x(n);
    std::vector<double> diff_sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        trend_on_x[i] = spec.trend.eval(traj.values[i]);
        const double sig = spec.diffusion.eval(traj.values[i]);
        diff_sq[i] = sig * sig;
    }
    std::vector<double> xhat(n);
    cumulative_trapezoid(trend_on_x, dt, xhat);
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (traj.values[i] - (spec.x0 + xhat[i])) / spec.epsilon;
        integrand[i] = diff_sq[i] * r * r;
    }
    const double tau_T = trapezoid(diff_sq, dt);
    if (diag != nullptr) {
        diag->tau_T = tau_T;
        diag->tau_T_limit = ctx != nullptr ? ctx->tau_T_limit : 0.0;
    }
    return trapezoid(integrand, dt) / (tau_T * tau_T);
}

double stat_degenerate_start(const Trajectory& traj, const ModelSpec& spec) {
    check_compatible(traj, spec);
    const double sig0 = spec.diffusion.eval(spec.x0);
    if (sig0 == 0.0) {
        throw StatisticError("degenerate-start statistic requires sigma(x0) != 0");
    }
    const double scale = traj.grid.T * spec.epsilon * sig0;
    std::vector<double> integrand(traj.values.size());
    for (std::size_t i = 0; i < traj.values.size(); ++i) {
        const double r = (traj.values[i] - spec.x0) / scale;
        integrand[i] = r * r;
    }
    return trapezoid(integrand, traj.grid.dt());
}

double time_change_total(const ModelSpec& spec, const TimeGrid& grid) {
    return make_null_context(spec, grid).u_T;
}

}  // namespace smallnoise
