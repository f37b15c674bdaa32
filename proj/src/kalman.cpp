#include "smallnoise/kalman.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "smallnoise/ode.hpp"
#include "smallnoise/rng.hpp"
#include "smallnoise/sde.hpp"
#include "smallnoise/stats.hpp"

namespace smallnoise {

namespace {

void check_spec(const LinearSystemSpec& spec, const TimeGrid& grid,
                bool require_noise = false) {
    if (!(spec.T > 0.0)) {
        throw std::invalid_argument("linear system: T must be positive");
    }
    if (spec.epsilon < 0.0 || (require_noise && spec.epsilon == 0.0)) {
        throw std::invalid_argument("linear system: epsilon must be positive");
    }
    for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
        const double sig = spec.sigma.eval(grid.node(i));
        if (!(sig * sig > 0.0)) {
            throw std::invalid_argument("linear system: sigma^2 must be positive on [0,T]");
        }
    }
}

}  // namespace

std::pair<Trajectory, Trajectory> simulate_linear_system(const LinearSystemSpec& spec,
                                                         const TimeGrid& grid,
                                                         std::uint64_t seed,
                                                         std::uint64_t replication) {
    check_spec(spec, grid);
    const RandomStream noise_w = replication_stream(seed, replication, 0);
    const RandomStream noise_v = replication_stream(seed, replication, 1);
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);

    Trajectory X;
    Trajectory Y;
    X.grid = grid;
    Y.grid = grid;
    X.seed = seed;
    Y.seed = seed;
    X.values.resize(grid.n_nodes());
    Y.values.resize(grid.n_nodes());
    double x = 0.0;
    double y = spec.y0;
    X.values[0] = x;
    Y.values[0] = y;
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double t = grid.node(i);
        const double a = spec.A.eval(t);
        const double b = spec.B.eval(t);
        const double c = spec.C.eval(t);
        const double sig = spec.sigma.eval(t);
        x += c * y * dt + spec.epsilon * sig * sqrt_dt * noise_w.normal(i);
        y += a * y * dt + spec.epsilon * b * sqrt_dt * noise_v.normal(i);
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw SimulationError("linear system state became non-finite at t=" +
                                      std::to_string(grid.node(i + 1)),
                                  grid.node(i + 1));
        }
        X.values[i + 1] = x;
        Y.values[i + 1] = y;
    }
    return {std::move(X), std::move(Y)};
}

FilterPath kalman_filter(const Trajectory& X, const LinearSystemSpec& spec) {
    const TimeGrid& grid = X.grid;
    check_spec(spec, grid);
    FilterPath fp;
    fp.grid = grid;
    fp.Gamma = rk4_path(
        [&](double t, double g) {
            const double a = spec.A.eval(t);
            const double c = spec.C.eval(t);
            const double sig = spec.sigma.eval(t);
            const double b = spec.B.eval(t);
            return 2.0 * a * g - c * c * g * g / (sig * sig) + b * b;
        },
        0.0, grid);

    fp.M.resize(grid.n_nodes());
    fp.M[0] = spec.y0;
    const double dt = grid.dt();
    double m = spec.y0;
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double t = grid.node(i);
        const double a = spec.A.eval(t);
        const double c = spec.C.eval(t);
        const double sig = spec.sigma.eval(t);
        const double innovation = X.values[i + 1] - X.values[i] - c * m * dt;
        m += a * m * dt + (c * fp.Gamma[i] / (sig * sig)) * innovation;
        if (!std::isfinite(m)) {
            throw SimulationError(
                "filter state became non-finite at t=" + std::to_string(grid.node(i + 1)),
                grid.node(i + 1));
        }
        fp.M[i + 1] = m;
    }
    return fp;
}

double stat_kalman(const Trajectory& X, const FilterPath& fp, const LinearSystemSpec& spec) {
    check_spec(spec, X.grid, true);
    const TimeGrid& grid = X.grid;
    const std::size_t n = grid.n_nodes();
    if (fp.M.size() != n) {
        throw std::invalid_argument("stat_kalman: filter path does not match trajectory grid");
    }
    const double dt = grid.dt();
    std::vector<double> cm(n);
    std::vector<double> sig_sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = grid.node(i);
        cm[i] = spec.C.eval(t) * fp.M[i];
        const double sig = spec.sigma.eval(t);
        sig_sq[i] = sig * sig;
    }
    std::vector<double> drift_integral(n);
    cumulative_trapezoid(cm, dt, drift_integral);
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = X.values[i] - drift_integral[i];
        integrand[i] = sig_sq[i] * diff * diff;
    }
    const double tau = trapezoid(sig_sq, dt);
    const double norm = spec.epsilon * tau;
    return trapezoid(integrand, dt) / (norm * norm);
}

LinearSystemSpec linear_system_from_json_text(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    LinearSystemSpec spec;
    spec.A = CoefficientFn::parse(j.at("A").get<std::string>());
    spec.B = CoefficientFn::parse(j.at("B").get<std::string>());
    spec.C = CoefficientFn::parse(j.at("C").get<std::string>());
    spec.sigma = CoefficientFn::parse(j.at("sigma").get<std::string>());
    spec.y0 = j.at("y0").get<double>();
    spec.epsilon = j.at("epsilon").get<double>();
    spec.T = j.at("T").get<double>();
    return spec;
}

LinearSystemSpec load_linear_system_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open linear system file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return linear_system_from_json_text(buf.str());
}

}  // namespace smallnoise
