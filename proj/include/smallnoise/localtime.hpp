#pragma once

#include <string>
#include <vector>

#include "smallnoise/grid.hpp"
#include "smallnoise/model.hpp"

namespace smallnoise {

// Uniform spatial bins on [lo, hi]; estimates live at bin midpoints.
struct SpaceGrid {
    double lo = 0.0;
    double hi = 1.0;
    int n_bins = 200;

    double width() const { return (hi - lo) / n_bins; }
    double midpoint(int k) const { return lo + (k + 0.5) * width(); }
};

struct LocalTimeCurve {
    SpaceGrid grid;
    std::vector<double> lambda;  // Lambda_T at midpoints, nonnegative
    double bandwidth = 0.0;      // nu used by the occupation estimator (0 for Tanaka)

    // Piecewise-linear interpolation between midpoints, clamped at the ends.
    double at(double x) const;
};

// Occupation-time estimate
// Lambda_T(x) ~ (eps^2 / 2 nu) int 1{|X_t - x| <= nu} sigma(X_t)^2 dt
// with trapezoid weights in time.
LocalTimeCurve local_time_occupation(const Trajectory& traj, const ModelSpec& spec,
                                     const SpaceGrid& grid, double nu);

// Pathwise Tanaka-Meyer form
// Lambda_T(x) = |X_T - x| - |x0 - x| - sum_i sgn(X_i - x)(X_{i+1} - X_i),
// left-endpoint stochastic sum, sgn(0) = 0; negatives are clipped to zero.
LocalTimeCurve local_time_tanaka(const Trajectory& traj, const SpaceGrid& grid);

// Bandwidth rule nu = max(2 * mean |dX|, bin width).
double default_bandwidth(const Trajectory& traj, const SpaceGrid& grid);

// Normalized local-time discrepancy integrated over space:
// eta(x) = (1/eps) int_{x0}^{x} (1/S0(y) - Lambda(y)/(eps^2 sigma(y)^2)) dy
// on nodes spanning [x0, x_T].
struct EtaProcess {
    std::vector<double> x;
    std::vector<double> values;
};

EtaProcess eta_process(const LocalTimeCurve& lt, const ModelSpec& spec,
                       const LimitPath& limit);

// C-vM statistic of the local-time discrepancy:
// delta = g_T^{-2} int (sigma^2/S0^3) eta(x)^2 dx over [x0, x_T], where
// g_T = int_{x0}^{x_T} sigma^2/S0^3 dy. Limit law: int_0^1 w^2 dv.
double stat_localtime(const LocalTimeCurve& lt, const ModelSpec& spec,
                      const LimitPath& limit);

// g(x) = int_{x0}^{x} sigma(y)^2 / S0(y)^3 dy (trapezoid on n_nodes points).
double time_change_g(const ModelSpec& spec, double x_upper, int n_nodes = 2049);

// CSV export, header "x,lambda".
void write_local_time_csv(const std::string& path, const LocalTimeCurve& curve);

}  // namespace smallnoise
