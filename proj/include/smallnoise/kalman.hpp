#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "smallnoise/expr.hpp"
#include "smallnoise/grid.hpp"

namespace smallnoise {

// Partially observed linear system on [0, T]:
//   dY = A_t Y dt + eps B_t dV,   Y_0 = y0   (hidden signal)
//   dX = C_t Y dt + eps sigma_t dW, X_0 = 0  (observation)
// with independent Wiener processes V, W. Coefficient curves are DSL
// expressions in the time variable t.
struct LinearSystemSpec {
    CoefficientFn A;
    CoefficientFn B;
    CoefficientFn C;
    CoefficientFn sigma;
    double y0 = 0.0;
    double epsilon = 0.1;
    double T = 1.0;
};

struct FilterPath {
    TimeGrid grid;
    std::vector<double> M;      // conditional mean of Y given X up to t
    std::vector<double> Gamma;  // normalized variance, Gamma = gamma / eps^2
};

// Joint Euler-Maruyama with channels (seed, 0) for W and (seed, 1) for V.
std::pair<Trajectory, Trajectory> simulate_linear_system(const LinearSystemSpec& spec,
                                                         const TimeGrid& grid,
                                                         std::uint64_t seed,
                                                         std::uint64_t replication = 0);

// Kalman-Bucy filter in the eps-free Riccati form:
//   dGamma/dt = 2 A Gamma - C^2 Gamma^2 / sigma^2 + B^2,  Gamma_0 = 0 (RK4)
//   dM = A M dt + (C Gamma / sigma^2)(dX - C M dt),       M_0 = y0  (Euler/Ito)
FilterPath kalman_filter(const Trajectory& X, const LinearSystemSpec& spec);

// Innovation-energy statistic
// delta = (eps int sigma^2 dt)^{-2} int sigma_t^2 (X_t - int_0^t C M ds)^2 dt;
// equals int_0^1 w^2 dv in law under the null.
double stat_kalman(const Trajectory& X, const FilterPath& fp, const LinearSystemSpec& spec);

// JSON config {A, B, C, sigma (DSL strings in t), y0, epsilon, T}.
LinearSystemSpec load_linear_system_json(const std::string& path);
LinearSystemSpec linear_system_from_json_text(const std::string& text);

}  // namespace smallnoise
