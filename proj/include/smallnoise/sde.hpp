#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "smallnoise/expr.hpp"
#include "smallnoise/grid.hpp"
#include "smallnoise/model.hpp"

namespace smallnoise {

class SimulationError : public std::runtime_error {
  public:
    SimulationError(const std::string& msg, double t) : std::runtime_error(msg), t_(t) {}
    double t() const { return t_; }

  private:
    double t_;
};

// Drift scaling of perturbed alternatives. Eq7 perturbs by
// eps*h*sigma^2/S0, ChiSquare by eps*h*sigma, FixedDrift adds h outright.
enum class AlternativeScaling { Eq7, ChiSquare, FixedDrift };

// dx/dt = S0(x) by classical RK4 on the given grid.
LimitPath solve_limit_ode(const ModelSpec& spec, const TimeGrid& grid);

// Euler-Maruyama path of dX = S0(X)dt + eps*sigma(X)dW. The i-th Gaussian
// increment comes from the counter-based stream (seed, channel 0), so the
// path is a pure function of (spec, grid, seed).
Trajectory simulate_sde(const ModelSpec& spec, const TimeGrid& grid, std::uint64_t seed,
                        std::uint64_t replication = 0);

// First-order fluctuation process: Euler scheme for
// dx1 = S0'(x_t) x1 dt + sigma(x_t) dW, x1_0 = 0, driven by the same noise
// stream as simulate_sde for the same seed.
std::vector<double> simulate_first_order(const ModelSpec& spec, const TimeGrid& grid,
                                         std::uint64_t seed, std::uint64_t replication = 0);

// Euler-Maruyama under a perturbed drift; h == 0 reproduces simulate_sde
// bit-exactly for the same seed.
Trajectory simulate_alternative(const ModelSpec& spec, const CoefficientFn& h,
                                const TimeGrid& grid, std::uint64_t seed,
                                AlternativeScaling scaling, std::uint64_t replication = 0);

// Noise-free skeleton of the Eq7-perturbed drift:
// dx/dt = S0(x) + eps*sigma(x)^2*h(x)/S0(x).
LimitPath limit_ode_alternative(const ModelSpec& spec, const CoefficientFn& h,
                                const TimeGrid& grid);

}  // namespace smallnoise
