#include "smallnoise/composite.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "smallnoise/gof.hpp"
#include "smallnoise/ode.hpp"
#include "smallnoise/stats.hpp"

namespace smallnoise {

ModelSpec ParametricModel::at(double theta) const {
    ModelSpec spec;
    spec.trend = trend.bind_theta(theta);
    spec.diffusion = diffusion;
    spec.x0 = x0;
    spec.T = T;
    spec.epsilon = epsilon;
    return spec;
}

ParametricModel parametric_model_from_json_text(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ParametricModel pm;
    pm.trend = CoefficientFn::parse(j.at("trend").get<std::string>());
    pm.diffusion = CoefficientFn::parse(j.at("diffusion").get<std::string>());
    pm.theta_min = j.at("theta_min").get<double>();
    pm.theta_max = j.at("theta_max").get<double>();
    pm.x0 = j.at("x0").get<double>();
    pm.T = j.at("T").get<double>();
    pm.epsilon = j.at("epsilon").get<double>();
    return pm;
}

ParametricModel load_parametric_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open parametric model file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parametric_model_from_json_text(buf.str());
}

namespace {

// Per-trajectory arrays reused across theta evaluations.
struct PathSums {
    std::vector<double> x;        // X_i, left endpoints
    std::vector<double> dx;       // X_{i+1} - X_i
    std::vector<double> inv_var;  // 1 / (eps^2 sigma(X_i)^2)
    double dt = 0.0;
};

PathSums make_path_sums(const Trajectory& traj, const ParametricModel& pm) {
    const std::size_t n = traj.grid.n_steps;
    PathSums sums;
    sums.dt = traj.grid.dt();
    sums.x.resize(n);
    sums.dx.resize(n);
    sums.inv_var.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sums.x[i] = traj.values[i];
        sums.dx[i] = traj.values[i + 1] - traj.values[i];
        const double sig = pm.diffusion.eval(traj.values[i]);
        if (!(sig * sig > 0.0)) {
            throw StatisticError("loglik: diffusion vanishes on the observed range");
        }
        sums.inv_var[i] = 1.0 / (pm.epsilon * pm.epsilon * sig * sig);
    }
    return sums;
}

double loglik_on_sums(const PathSums& sums, const ParametricModel& pm, double theta) {
    double drift_term = 0.0;
    double energy_term = 0.0;
    for (std::size_t i = 0; i < sums.x.size(); ++i) {
        const double s = pm.trend.eval(sums.x[i], theta);
        drift_term += s * sums.inv_var[i] * sums.dx[i];
        energy_term += s * s * sums.inv_var[i];
    }
    return drift_term - 0.5 * energy_term * sums.dt;
}

struct ScanMaximum {
    double arg = 0.0;
    double value = 0.0;
    bool boundary = false;
};

// Deterministic maximizer: coarse scan, then golden-section refinement on
// the bracketing interval.
ScanMaximum maximize_scan_golden(const std::function<double(double)>& f, double lo, double hi,
                                 int grid_points, double tol) {
    if (grid_points < 3) {
        grid_points = 3;
    }
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double arg =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        const double value = f(arg);
        if (value > best_value) {
            best_value = value;
            best = i;
        }
    }
    const double step = (hi - lo) / static_cast<double>(grid_points - 1);
    double a = std::max(lo, lo + (best - 1) * step);
    double b = std::min(hi, lo + (best + 1) * step);

    constexpr double inv_phi = 0.61803398874989484820;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    ScanMaximum result;
    result.arg = 0.5 * (a + b);
    result.value = f(result.arg);
    result.boundary = result.arg - lo < 2.0 * tol + 1e-14 * std::abs(lo) ||
                      hi - result.arg < 2.0 * tol + 1e-14 * std::abs(hi);
    return result;
}

}  // namespace

double loglik(const Trajectory& traj, const ParametricModel& pm, double theta) {
    if (theta < pm.theta_min || theta > pm.theta_max) {
        throw std::invalid_argument("loglik: theta outside the parameter interval");
    }
    return loglik_on_sums(make_path_sums(traj, pm), pm, theta);
}

MleResult mle(const Trajectory& traj, const ParametricModel& pm, int grid_points,
              double refine_tol) {
    const PathSums sums = make_path_sums(traj, pm);
    const ScanMaximum opt = maximize_scan_golden(
        [&](double theta) { return loglik_on_sums(sums, pm, theta); }, pm.theta_min,
        pm.theta_max, grid_points, refine_tol);
    MleResult result;
    result.theta_hat = opt.arg;
    result.loglik = opt.value;
    result.boundary = opt.boundary;
    result.fisher = fisher_info(pm, result.theta_hat, traj.grid);
    return result;
}

namespace {

// h(x) for a trend linear in theta; verified by proportionality probes.
double linear_component(const ParametricModel& pm, double x) {
    return pm.trend.deriv_theta(x, 1.0);
}

void check_linear_in_theta(const ParametricModel& pm, const Trajectory& traj) {
    const double probes[] = {traj.values.front(), traj.values[traj.values.size() / 2],
                             traj.values.back()};
    for (double x : probes) {
        const double h = linear_component(pm, x);
        const double s2 = pm.trend.eval(x, 2.0);
        const double s1 = pm.trend.eval(x, 1.0);
        const double scale = 1.0 + std::abs(s2);
        if (std::abs(s2 - 2.0 * h) > 1e-8 * scale || std::abs(s1 - h) > 1e-8 * scale) {
            throw StatisticError("trend is not linear in theta");
        }
    }
}

}  // namespace

double mle_closed_form_linear(const Trajectory& traj, const ParametricModel& pm) {
    check_linear_in_theta(pm, traj);
    const PathSums sums = make_path_sums(traj, pm);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < sums.x.size(); ++i) {
        const double h = linear_component(pm, sums.x[i]);
        num += h * sums.inv_var[i] * sums.dx[i];
        den += h * h * sums.inv_var[i] * sums.dt;
    }
    if (den == 0.0) {
        throw StatisticError("mle_closed_form_linear: degenerate denominator");
    }
    return num / den;
}

MleProcess mle_process_linear(const Trajectory& traj, const ParametricModel& pm, double mu) {
    check_linear_in_theta(pm, traj);
    const PathSums sums = make_path_sums(traj, pm);
    MleProcess process;
    process.theta.assign(traj.values.size(), std::numeric_limits<double>::quiet_NaN());
    const double t_min = std::pow(pm.epsilon, mu);
    process.first_reliable = static_cast<std::size_t>(std::ceil(t_min / sums.dt));
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < sums.x.size(); ++i) {
        const double h = linear_component(pm, sums.x[i]);
        num += h * sums.inv_var[i] * sums.dx[i];
        den += h * h * sums.inv_var[i] * sums.dt;
        if (den > 0.0) {
            process.theta[i + 1] = num / den;
        }
    }
    return process;
}

double fisher_info(const ParametricModel& pm, double theta, const TimeGrid& grid) {
    const std::vector<double> path =
        rk4_path([&](double, double x) { return pm.trend.eval(x, theta); }, pm.x0, grid);
    std::vector<double> integrand(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
        const double sdot = pm.trend.deriv_theta(path[i], theta);
        const double sig = pm.diffusion.eval(path[i]);
        integrand[i] = sdot * sdot / (sig * sig);
    }
    return trapezoid(integrand, grid.dt());
}

double h_compensator(const Trajectory& traj, const ParametricModel& pm, double theta) {
    const std::size_t n = traj.values.size();
    const double dt = traj.grid.dt();

    // Spatial term int_{x0}^{X_T} Sdot/sigma^2 dy (directional).
    const int quad_nodes = 2049;
    const double x_lo = pm.x0;
    const double x_hi = traj.values.back();
    const double span = x_hi - x_lo;
    std::vector<double> spatial(quad_nodes);
    for (int i = 0; i < quad_nodes; ++i) {
        const double y =
            x_lo + span * static_cast<double>(i) / static_cast<double>(quad_nodes - 1);
        const double sig = pm.diffusion.eval(y);
        spatial[static_cast<std::size_t>(i)] = pm.trend.deriv_theta(y, theta) / (sig * sig);
    }
    const double term_spatial = trapezoid(spatial, span / (quad_nodes - 1));

    std::vector<double> ito_correction(n);
    std::vector<double> drift_term(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = traj.values[i];
        const double sig = pm.diffusion.eval(x);
        const double sig_prime = pm.diffusion.deriv_x(x);
        const double sdot = pm.trend.deriv_theta(x, theta);
        const double sdot_prime = pm.trend.deriv_x_theta(x, theta);
        ito_correction[i] = (sdot_prime * sig - 2.0 * sdot * sig_prime) / (2.0 * sig);
        drift_term[i] = sdot * pm.trend.eval(x, theta) / (sig * sig);
    }
    const double term_ito =
        pm.epsilon * pm.epsilon * trapezoid(ito_correction, dt);
    const double term_drift = trapezoid(drift_term, dt);
    return term_spatial - term_ito - term_drift;
}

double h_compensator_stochastic(const Trajectory& traj, const ParametricModel& pm,
                                double theta) {
    const double dt = traj.grid.dt();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < traj.values.size(); ++i) {
        const double x = traj.values[i];
        const double sig = pm.diffusion.eval(x);
        const double sdot = pm.trend.deriv_theta(x, theta);
        sum += sdot / (sig * sig) *
               (traj.values[i + 1] - x - pm.trend.eval(x, theta) * dt);
    }
    return sum;
}

SensitivityPath theta_sensitivity_path(const ParametricModel& pm, double theta,
                                       const TimeGrid& grid) {
    const auto joint = rk4_path2(
        [&](double, std::array<double, 2> state) {
            const double x = state[0];
            return std::array<double, 2>{
                pm.trend.eval(x, theta),
                pm.trend.deriv_x(x, theta) * state[1] + pm.trend.deriv_theta(x, theta)};
        },
        {pm.x0, 0.0}, grid);
    SensitivityPath path;
    path.x.resize(joint.size());
    path.xdot.resize(joint.size());
    for (std::size_t i = 0; i < joint.size(); ++i) {
        path.x[i] = joint[i][0];
        path.xdot[i] = joint[i][1];
    }
    return path;
}

std::vector<double> compensated_process(const Trajectory& traj, const ParametricModel& pm,
                                        const MleResult& fit) {
    const SensitivityPath sens = theta_sensitivity_path(pm, fit.theta_hat, traj.grid);
    const double h = h_compensator(traj, pm, fit.theta_hat);
    const double inv_fisher = 1.0 / fit.fisher;
    std::vector<double> y(traj.values.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = (traj.values[i] - sens.x[i]) / pm.epsilon + inv_fisher * sens.xdot[i] * h;
    }
    return y;
}

double stat_adf(const Trajectory& traj, const ParametricModel& pm, const MleResult& fit) {
    const std::vector<double> y = compensated_process(traj, pm, fit);
    const std::size_t n = traj.values.size();
    std::vector<double> ratio(n);
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = traj.values[i];
        const double s = pm.trend.eval(x, fit.theta_hat);
        if (!(s > 0.0)) {
            throw StatisticError("stat_adf: fitted trend not positive on the observed range");
        }
        const double sig = pm.diffusion.eval(x);
        ratio[i] = sig * sig / (s * s);
        integrand[i] = y[i] * y[i] * sig * sig / (s * s * s * s);
    }
    const double dt = traj.grid.dt();
    const double norm = trapezoid(ratio, dt);
    return trapezoid(integrand, dt) / (norm * norm);
}

double stat_adf(const Trajectory& traj, const ParametricModel& pm) {
    return stat_adf(traj, pm, mle(traj, pm));
}

KlProjection kl_projection(const ParametricModel& pm, const CoefficientFn& s_true,
                           const TimeGrid& grid, int grid_points, double refine_tol) {
    const std::vector<double> true_path =
        rk4_path([&](double, double x) { return s_true.eval(x); }, pm.x0, grid);
    std::vector<double> sig(true_path.size());
    std::vector<double> s_true_on_path(true_path.size());
    for (std::size_t i = 0; i < true_path.size(); ++i) {
        sig[i] = pm.diffusion.eval(true_path[i]);
        s_true_on_path[i] = s_true.eval(true_path[i]);
    }
    auto distance = [&](double theta) {
        std::vector<double> integrand(true_path.size());
        for (std::size_t i = 0; i < true_path.size(); ++i) {
            const double diff = pm.trend.eval(true_path[i], theta) - s_true_on_path[i];
            integrand[i] = diff * diff / (sig[i] * sig[i]);
        }
        return trapezoid(integrand, grid.dt());
    };
    const ScanMaximum opt = maximize_scan_golden(
        [&](double theta) { return -distance(theta); }, pm.theta_min, pm.theta_max,
        grid_points, refine_tol);
    KlProjection result;
    result.theta_star = opt.arg;
    result.boundary = opt.boundary;
    return result;
}

}  // namespace smallnoise
