#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "smallnoise/grid.hpp"

namespace smallnoise {

class OdeError : public std::runtime_error {
  public:
    OdeError(const std::string& msg, double t) : std::runtime_error(msg), t_(t) {}
    double t() const { return t_; }

  private:
    double t_;
};

// Classical 4th-order Runge-Kutta for a scalar autonomous-in-form equation
// dy/dt = f(t, y) on a uniform grid; returns values at all nodes.
template <class F>
std::vector<double> rk4_path(const F& f, double y0, const TimeGrid& grid) {
    std::vector<double> y(grid.n_nodes());
    y[0] = y0;
    const double h = grid.dt();
    double state = y0;
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double t = grid.node(i);
        const double k1 = f(t, state);
        const double k2 = f(t + 0.5 * h, state + 0.5 * h * k1);
        const double k3 = f(t + 0.5 * h, state + 0.5 * h * k2);
        const double k4 = f(t + h, state + h * k3);
        state += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(state)) {
            throw OdeError("ODE state became non-finite at t=" + std::to_string(t + h),
                           t + h);
        }
        y[i + 1] = state;
    }
    return y;
}

// RK4 for a pair of coupled scalar equations; used for parameter
// sensitivities solved jointly with the base path.
template <class F>
std::vector<std::array<double, 2>> rk4_path2(const F& f, std::array<double, 2> y0,
                                             const TimeGrid& grid) {
    std::vector<std::array<double, 2>> y(grid.n_nodes());
    y[0] = y0;
    const double h = grid.dt();
    std::array<double, 2> state = y0;
    auto axpy = [](std::array<double, 2> base, double c, std::array<double, 2> k) {
        return std::array<double, 2>{base[0] + c * k[0], base[1] + c * k[1]};
    };
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double t = grid.node(i);
        const auto k1 = f(t, state);
        const auto k2 = f(t + 0.5 * h, axpy(state, 0.5 * h, k1));
        const auto k3 = f(t + 0.5 * h, axpy(state, 0.5 * h, k2));
        const auto k4 = f(t + h, axpy(state, h, k3));
        state[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        state[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        if (!std::isfinite(state[0]) || !std::isfinite(state[1])) {
            throw OdeError("ODE state became non-finite at t=" + std::to_string(t + h),
                           t + h);
        }
        y[i + 1] = state;
    }
    return y;
}

}  // namespace smallnoise
