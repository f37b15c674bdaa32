#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "smallnoise/grid.hpp"
#include "smallnoise/model.hpp"
#include "smallnoise/sde.hpp"

namespace smallnoise {

class StatisticError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Quantities along the limit path that every C-vM / K-S statistic reuses.
// Building this once per (model, grid) keeps Monte Carlo loops free of
// repeated ODE solves and coefficient evaluations.
struct NullModelContext {
    LimitPath limit;
    std::vector<double> trend_on_limit;  // S0(x_t)
    std::vector<double> diff_on_limit;   // sigma(x_t)
    double u_T = 0.0;                    // int_0^T (sigma(x_t)/S0(x_t))^2 dt
    double tau_T_limit = 0.0;            // int_0^T sigma(x_t)^2 dt
};

NullModelContext make_null_context(const ModelSpec& spec, const TimeGrid& grid);

// All integrals below are trapezoid sums on the trajectory grid; suprema are
// grid maxima.

// Cramer-von Mises statistic with the deterministic path:
// delta = u_T^{-2} int ((X-x)/(eps S0(x)^2))^2 sigma(x)^2 dt.
double stat_cvm(const Trajectory& traj, const ModelSpec& spec, const NullModelContext& ctx);
double stat_cvm(const Trajectory& traj, const ModelSpec& spec);

// Kolmogorov-Smirnov statistic:
// gamma = u_T^{-1/2} sup |(X-x)/(eps S0(x))|.
double stat_ks(const Trajectory& traj, const ModelSpec& spec, const NullModelContext& ctx);
double stat_ks(const Trajectory& traj, const ModelSpec& spec);

// Plug-in variants: coefficients evaluated on the observation X instead of
// the limit path; the numerator difference X - x is unchanged.
double stat_cvm_plugin(const Trajectory& traj, const ModelSpec& spec,
                       const NullModelContext& ctx);
double stat_cvm_plugin(const Trajectory& traj, const ModelSpec& spec);
double stat_ks_plugin(const Trajectory& traj, const ModelSpec& spec,
                      const NullModelContext& ctx);
double stat_ks_plugin(const Trajectory& traj, const ModelSpec& spec);

struct IntegralStatDiagnostics {
    double tau_T = 0.0;        // int sigma(X)^2 dt
    double tau_T_limit = 0.0;  // same integral along the limit path
};

// Integrated-drift variant: Xhat_t = x0 + int_0^t S0(X_s) ds,
// delta = tau_T^{-2} int sigma(X)^2 ((X - Xhat)/eps)^2 dt.
// Does not require solving the limit equation (pass no context).
double stat_cvm_integral(const Trajectory& traj, const ModelSpec& spec,
                         IntegralStatDiagnostics* diag = nullptr,
                         const NullModelContext* ctx = nullptr);

// Degenerate-start statistic for the null dX = eps sigma(X) dW (S0(x0) = 0):
// delta = int ((X_t - x0)/(T eps sigma(x0)))^2 dt.
double stat_degenerate_start(const Trajectory& traj, const ModelSpec& spec);

// u_T of the model on a grid (diagnostic surface).
double time_change_total(const ModelSpec& spec, const TimeGrid& grid);

}  // namespace smallnoise
