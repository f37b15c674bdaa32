#include "smallnoise/localtime.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "smallnoise/gof.hpp"
#include "smallnoise/stats.hpp"

namespace smallnoise {

double LocalTimeCurve::at(double x) const {
    if (lambda.empty()) {
        return 0.0;
    }
    const double w = grid.width();
    const double pos = (x - grid.midpoint(0)) / w;
    if (pos <= 0.0) {
        return lambda.front();
    }
    if (pos >= static_cast<double>(lambda.size() - 1)) {
        return lambda.back();
    }
    const auto k = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(k);
    return lambda[k] + frac * (lambda[k + 1] - lambda[k]);
}

LocalTimeCurve local_time_occupation(const Trajectory& traj, const ModelSpec& spec,
                                     const SpaceGrid& grid, double nu) {
    if (!(nu > 0.0)) {
        throw std::invalid_argument("local_time_occupation: nu must be positive");
    }
    LocalTimeCurve curve;
    curve.grid = grid;
    curve.bandwidth = nu;
    curve.lambda.assign(static_cast<std::size_t>(grid.n_bins), 0.0);

    const double dt = traj.grid.dt();
    const double w = grid.width();
    const double scale = spec.epsilon * spec.epsilon / (2.0 * nu);
    const std::size_t n = traj.values.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double time_weight = (i == 0 || i + 1 == n) ? 0.5 * dt : dt;
        const double x = traj.values[i];
        const double sig = spec.diffusion.eval(x);
        const double contribution = scale * time_weight * sig * sig;
        // midpoints x_k with |x_k - x| <= nu
        int k_lo = static_cast<int>(std::ceil((x - nu - grid.lo) / w - 0.5));
        int k_hi = static_cast<int>(std::floor((x + nu - grid.lo) / w - 0.5));
        k_lo = std::max(k_lo, 0);
        k_hi = std::min(k_hi, grid.n_bins - 1);
        for (int k = k_lo; k <= k_hi; ++k) {
            curve.lambda[static_cast<std::size_t>(k)] += contribution;
        }
    }
    return curve;
}

LocalTimeCurve local_time_tanaka(const Trajectory& traj, const SpaceGrid& grid) {
    LocalTimeCurve curve;
    curve.grid = grid;
    curve.bandwidth = 0.0;
    curve.lambda.assign(static_cast<std::size_t>(grid.n_bins), 0.0);
    const std::size_t n = traj.values.size();
    const double x0 = traj.values.front();
    const double xT = traj.values.back();
    const double w = grid.width();

    // sum_i sgn(X_i - x_k) dX_i for every midpoint at once: bucket each
    // increment by the count of midpoints below its left endpoint, then
    // suffix-sum. Exact midpoint hits get sgn(0) = 0 via the correction row.
    std::vector<double> above(static_cast<std::size_t>(grid.n_bins) + 1, 0.0);
    std::vector<double> tie(static_cast<std::size_t>(grid.n_bins), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double dx = traj.values[i + 1] - traj.values[i];
        const double pos = (traj.values[i] - grid.lo) / w + 0.5;
        const double fl = std::floor(pos);
        long below = static_cast<long>(fl);
        if (pos == fl && below >= 1 && below <= grid.n_bins) {
            tie[static_cast<std::size_t>(below - 1)] += dx;  // X_i sits on x_{below-1}
        }
        below = std::max(0l, std::min(static_cast<long>(grid.n_bins), below));
        above[static_cast<std::size_t>(below)] += dx;
        total += dx;
    }
    // ito_sum(k) = (mass strictly above level k) - (mass at or below)
    double suffix = 0.0;
    std::vector<double> ito(static_cast<std::size_t>(grid.n_bins), 0.0);
    for (int k = grid.n_bins - 1; k >= 0; --k) {
        suffix += above[static_cast<std::size_t>(k) + 1];
        ito[static_cast<std::size_t>(k)] =
            2.0 * suffix - total + tie[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < grid.n_bins; ++k) {
        const double x = grid.midpoint(k);
        const double value = std::abs(xT - x) - std::abs(x0 - x) - ito[static_cast<std::size_t>(k)];
        curve.lambda[static_cast<std::size_t>(k)] = std::max(0.0, value);
    }
    return curve;
}

double default_bandwidth(const Trajectory& traj, const SpaceGrid& grid) {
    double mean_abs_increment = 0.0;
    for (std::size_t i = 0; i + 1 < traj.values.size(); ++i) {
        mean_abs_increment += std::abs(traj.values[i + 1] - traj.values[i]);
    }
    mean_abs_increment /= static_cast<double>(traj.values.size() - 1);
    return std::max(2.0 * mean_abs_increment, grid.width());
}

namespace {

// Integration nodes spanning [x0, x_T]: endpoints plus interior midpoints.
std::vector<double> eta_nodes(const LocalTimeCurve& lt, double x0, double x_T) {
    std::vector<double> nodes;
    nodes.push_back(x0);
    for (int k = 0; k < lt.grid.n_bins; ++k) {
        const double x = lt.grid.midpoint(k);
        if (x > x0 && x < x_T) {
            nodes.push_back(x);
        }
    }
    nodes.push_back(x_T);
    return nodes;
}

}  // namespace

EtaProcess eta_process(const LocalTimeCurve& lt, const ModelSpec& spec,
                       const LimitPath& limit) {
    const double x0 = spec.x0;
    const double x_T = limit.values.back();
    if (!(x_T > x0)) {
        throw StatisticError("eta_process: limit path must increase from x0");
    }
    EtaProcess eta;
    eta.x = eta_nodes(lt, x0, x_T);
    const std::size_t n = eta.x.size();
    // Kernel smoothing pushes local-time mass below x0, where the limiting
    // field jumps to zero; folding that mass back (boundary reflection)
    // removes an O(nu) downward bias of the occupation integral. Possible
    // only when the curve extends below x0.
    const bool reflect = lt.bandwidth > 0.0 && lt.grid.lo <= x0 - lt.bandwidth;
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = eta.x[i];
        const double s0 = spec.trend.eval(y);
        const double sig = spec.diffusion.eval(y);
        if (!(s0 > 0.0) || !(sig * sig > 0.0)) {
            throw StatisticError("eta_process: S0 or sigma^2 vanishes on [x0, x_T]");
        }
        double lambda = lt.at(y);
        if (reflect && y - x0 <= lt.bandwidth + lt.grid.width()) {
            lambda += lt.at(2.0 * x0 - y);
        }
        integrand[i] = 1.0 / s0 - lambda / (spec.epsilon * spec.epsilon * sig * sig);
    }
    eta.values.resize(n);
    eta.values[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double dx = eta.x[i] - eta.x[i - 1];
        eta.values[i] =
            eta.values[i - 1] + 0.5 * (integrand[i - 1] + integrand[i]) * dx;
    }
    for (double& v : eta.values) {
        v /= spec.epsilon;
    }
    return eta;
}

double stat_localtime(const LocalTimeCurve& lt, const ModelSpec& spec,
                      const LimitPath& limit) {
    const EtaProcess eta = eta_process(lt, spec, limit);
    const std::size_t n = eta.x.size();
    std::vector<double> weight(n);
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s0 = spec.trend.eval(eta.x[i]);
        const double sig = spec.diffusion.eval(eta.x[i]);
        weight[i] = sig * sig / (s0 * s0 * s0);
        integrand[i] = weight[i] * eta.values[i] * eta.values[i];
    }
    double g_T = 0.0;
    double value = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double dx = eta.x[i] - eta.x[i - 1];
        g_T += 0.5 * (weight[i - 1] + weight[i]) * dx;
        value += 0.5 * (integrand[i - 1] + integrand[i]) * dx;
    }
    return value / (g_T * g_T);
}

double time_change_g(const ModelSpec& spec, double x_upper, int n_nodes) {
    if (n_nodes < 2) {
        throw std::invalid_argument("time_change_g: need at least 2 nodes");
    }
    std::vector<double> integrand(static_cast<std::size_t>(n_nodes));
    const double span = x_upper - spec.x0;
    for (int i = 0; i < n_nodes; ++i) {
        const double y =
            spec.x0 + span * static_cast<double>(i) / static_cast<double>(n_nodes - 1);
        const double s0 = spec.trend.eval(y);
        const double sig = spec.diffusion.eval(y);
        integrand[static_cast<std::size_t>(i)] = sig * sig / (s0 * s0 * s0);
    }
    return trapezoid(integrand, span / static_cast<double>(n_nodes - 1));
}

void write_local_time_csv(const std::string& path, const LocalTimeCurve& curve) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    out << "x,lambda\n";
    std::array<char, 96> line{};
    for (int k = 0; k < curve.grid.n_bins; ++k) {
        std::snprintf(line.data(), line.size(), "%.17g,%.17g\n", curve.grid.midpoint(k),
                      curve.lambda[static_cast<std::size_t>(k)]);
        out << line.data();
    }
}

}  // namespace smallnoise
