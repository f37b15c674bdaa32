#include "smallnoise/sde.hpp"

#include <cmath>

#include "smallnoise/ode.hpp"
#include "smallnoise/rng.hpp"

namespace smallnoise {

LimitPath solve_limit_ode(const ModelSpec& spec, const TimeGrid& grid) {
    LimitPath path;
    path.grid = grid;
    path.values = rk4_path([&](double, double x) { return spec.trend.eval(x); }, spec.x0, grid);
    return path;
}

namespace {

template <class Drift>
Trajectory euler_maruyama(const ModelSpec& spec, const TimeGrid& grid, std::uint64_t seed,
                          std::uint64_t replication, const Drift& drift) {
    Trajectory traj;
    traj.grid = grid;
    traj.seed = seed;
    traj.model_hash = spec.hash();
    traj.values.resize(grid.n_nodes());
    traj.values[0] = spec.x0;

    const RandomStream noise = replication_stream(seed, replication, 0);
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    double x = spec.x0;
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double xi = noise.normal(i);
        x += drift(x) * dt + spec.epsilon * spec.diffusion.eval(x) * sqrt_dt * xi;
        if (!std::isfinite(x)) {
            throw SimulationError(
                "SDE state became non-finite at t=" + std::to_string(grid.node(i + 1)),
                grid.node(i + 1));
        }
        traj.values[i + 1] = x;
    }
    return traj;
}

}  // namespace

Trajectory simulate_sde(const ModelSpec& spec, const TimeGrid& grid, std::uint64_t seed,
                        std::uint64_t replication) {
    return euler_maruyama(spec, grid, seed, replication,
                          [&](double x) { return spec.trend.eval(x); });
}

std::vector<double> simulate_first_order(const ModelSpec& spec, const TimeGrid& grid,
                                         std::uint64_t seed, std::uint64_t replication) {
    const LimitPath limit = solve_limit_ode(spec, grid);
    const RandomStream noise = replication_stream(seed, replication, 0);
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    std::vector<double> first(grid.n_nodes());
    first[0] = 0.0;
    double y = 0.0;
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double xt = limit.values[i];
        y += spec.trend.deriv_x(xt) * y * dt +
             spec.diffusion.eval(xt) * sqrt_dt * noise.normal(i);
        if (!std::isfinite(y)) {
            throw SimulationError(
                "first-order state became non-finite at t=" + std::to_string(grid.node(i + 1)),
                grid.node(i + 1));
        }
        first[i + 1] = y;
    }
    return first;
}

Trajectory simulate_alternative(const ModelSpec& spec, const CoefficientFn& h,
                                const TimeGrid& grid, std::uint64_t seed,
                                AlternativeScaling scaling, std::uint64_t replication) {
    switch (scaling) {
        case AlternativeScaling::Eq7:
            return euler_maruyama(spec, grid, seed, replication, [&](double x) {
                const double s0 = spec.trend.eval(x);
                const double sig = spec.diffusion.eval(x);
                return s0 + spec.epsilon * h.eval(x) * sig * sig / s0;
            });
        case AlternativeScaling::ChiSquare:
            return euler_maruyama(spec, grid, seed, replication, [&](double x) {
                return spec.trend.eval(x) + spec.epsilon * h.eval(x) * spec.diffusion.eval(x);
            });
        case AlternativeScaling::FixedDrift:
            return euler_maruyama(spec, grid, seed, replication, [&](double x) {
                return spec.trend.eval(x) + h.eval(x);
            });
    }
    throw std::logic_error("unknown alternative scaling");
}

LimitPath limit_ode_alternative(const ModelSpec& spec, const CoefficientFn& h,
                                const TimeGrid& grid) {
    LimitPath path;
    path.grid = grid;
    path.values = rk4_path(
        [&](double, double x) {
            const double s0 = spec.trend.eval(x);
            const double sig = spec.diffusion.eval(x);
            return s0 + spec.epsilon * sig * sig * h.eval(x) / s0;
        },
        spec.x0, grid);
    return path;
}

}  // namespace smallnoise
