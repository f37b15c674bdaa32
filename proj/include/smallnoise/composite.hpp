#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "smallnoise/expr.hpp"
#include "smallnoise/grid.hpp"
#include "smallnoise/model.hpp"

namespace smallnoise {

// Composite null: dX = S(theta, X) dt + eps sigma(X) dW with theta unknown
// in the open interval (theta_min, theta_max).
struct ParametricModel {
    CoefficientFn trend;      // S(theta, x)
    CoefficientFn diffusion;  // sigma(x)
    double theta_min = 0.0;
    double theta_max = 1.0;
    double x0 = 0.0;
    double T = 1.0;
    double epsilon = 0.1;

    // Freeze theta into a plain model (for simulation under a fixed value).
    ModelSpec at(double theta) const;
};

ParametricModel parametric_model_from_json_text(const std::string& text);
ParametricModel load_parametric_model_json(const std::string& path);

// Discretized log-likelihood (Girsanov form, left-endpoint sums):
// l(theta) = sum_i S(theta,X_i)/(eps^2 sigma_i^2) dX_i
//          - 1/2 sum_i S(theta,X_i)^2/(eps^2 sigma_i^2) dt.
double loglik(const Trajectory& traj, const ParametricModel& pm, double theta);

struct MleResult {
    double theta_hat = 0.0;
    double loglik = 0.0;
    double fisher = 0.0;  // I_T(theta_hat)
    bool boundary = false;
};

// Deterministic grid scan over the parameter interval followed by
// golden-section refinement; boundary maxima are flagged.
MleResult mle(const Trajectory& traj, const ParametricModel& pm, int grid_points = 64,
              double refine_tol = 1e-9);

// Closed form for a trend linear in theta (S = theta h(x)):
// theta_hat = [sum h_i^2/sigma_i^2 dt]^{-1} sum h_i/sigma_i^2 dX_i.
double mle_closed_form_linear(const Trajectory& traj, const ParametricModel& pm);

// Running estimator theta_hat_t for the linear case, same sums cut at t.
// Entries before t = eps^mu are flagged unreliable via first_reliable.
struct MleProcess {
    std::vector<double> theta;  // one entry per grid node; node 0 is NaN
    std::size_t first_reliable = 0;
};
MleProcess mle_process_linear(const Trajectory& traj, const ParametricModel& pm,
                              double mu = 0.5);

// Fisher information I_T(theta) = int (Sdot(theta, x_t(theta))/sigma(x_t))^2 dt
// along the theta-limit path.
double fisher_info(const ParametricModel& pm, double theta, const TimeGrid& grid);

// Compensator H_eps(theta) in the Ito-rewritten form (no stochastic integral):
//   int_{x0}^{X_T} Sdot/sigma^2 dy
//   - eps^2 int [Sdot' sigma - 2 Sdot sigma'] / (2 sigma) dt
//   - int Sdot S / sigma^2 dt,  all evaluated along X.
double h_compensator(const Trajectory& traj, const ParametricModel& pm, double theta);

// Direct discretization of int Sdot/sigma^2 [dX - S dt] (the stochastic-
// integral route); cross-check oracle for the Ito form.
double h_compensator_stochastic(const Trajectory& traj, const ParametricModel& pm,
                                double theta);

// Limit path and its theta-sensitivity, solved jointly by RK4:
// dx/dt = S(theta,x), dv/dt = S'(theta,x) v + Sdot(theta,x), v_0 = 0.
struct SensitivityPath {
    std::vector<double> x;     // x_t(theta)
    std::vector<double> xdot;  // d x_t / d theta
};
SensitivityPath theta_sensitivity_path(const ParametricModel& pm, double theta,
                                       const TimeGrid& grid);

// Compensated process Y(t) = (X_t - x_t(theta_hat))/eps
//                          + I_T(theta_hat)^{-1} xdot_t(theta_hat) H(theta_hat).
std::vector<double> compensated_process(const Trajectory& traj, const ParametricModel& pm,
                                        const MleResult& fit);

// ADF statistic
// delta = [int sigma(X)^2/S(theta_hat,X)^2 dt]^{-2}
//         int Y^2 sigma(X)^2 / S(theta_hat,X)^4 dt.
double stat_adf(const Trajectory& traj, const ParametricModel& pm, const MleResult& fit);
double stat_adf(const Trajectory& traj, const ParametricModel& pm);

// Kullback-Leibler projection of a true trend onto the family:
// theta_* = argmin int ((S(theta, x_t(S)) - S_true(x_t(S)))/sigma(x_t(S)))^2 dt.
struct KlProjection {
    double theta_star = 0.0;
    bool boundary = false;
};
KlProjection kl_projection(const ParametricModel& pm, const CoefficientFn& s_true,
                           const TimeGrid& grid, int grid_points = 64,
                           double refine_tol = 1e-9);

}  // namespace smallnoise
