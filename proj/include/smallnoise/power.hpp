#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smallnoise/chisq.hpp"
#include "smallnoise/gof.hpp"
#include "smallnoise/localtime.hpp"
#include "smallnoise/model.hpp"
#include "smallnoise/refdist.hpp"
#include "smallnoise/sde.hpp"

namespace smallnoise {

// Statistics computable from a (trajectory, model) pair alone. The Kalman
// and composite ADF tests have their own inputs and live in their modules.
enum class StatKind {
    Cvm,
    Ks,
    CvmPlugin,
    KsPlugin,
    CvmIntegral,
    DegenerateStart,
    ChiSq,
    ChiSqWeighted,
    LocalTime,
};

std::string to_string(StatKind kind);
StatKind stat_kind_from_string(const std::string& name);

struct StatOptions {
    int m = 10;        // coefficient count for the chi-square statistics
    int k_smooth = 2;  // smoothness order of the minimax weights
    double nu = 0.0;   // local-time bandwidth; 0 = bandwidth rule
    int bins = 200;    // local-time spatial bins
};

// Limit law the statistic is calibrated against.
RefDistribution limit_law(StatKind kind);

double compute_statistic(StatKind kind, const Trajectory& traj, const ModelSpec& spec,
                         const StatOptions& opts, const NullModelContext* ctx = nullptr);

// Alternative drift family; `contrast_r` and `rho` are carried as metadata
// for m-selection and reporting.
struct AlternativeSpec {
    CoefficientFn h;
    AlternativeScaling scaling = AlternativeScaling::Eq7;
    std::optional<double> contrast_r;
    std::optional<double> rho;
};

AlternativeSpec alternative_from_json_text(const std::string& text);
AlternativeSpec load_alternative_json(const std::string& path);

// Simulates under the alternative (or the null when alt == nullptr),
// replication-indexed as everywhere else.
Trajectory simulate_under(const ModelSpec& spec, const AlternativeSpec* alt,
                          const TimeGrid& grid, std::uint64_t seed,
                          std::uint64_t replication);

// Monte Carlo sample of a statistic, one entry per replication.
std::vector<double> sample_statistics(const ModelSpec& spec, const AlternativeSpec* alt,
                                      StatKind kind, const StatOptions& opts,
                                      const TimeGrid& grid, std::uint64_t reps,
                                      std::uint64_t seed);

// Fraction of replications rejecting at the table's critical value.
// The table's distribution must match limit_law(kind).
double estimate_power(StatKind kind, const StatOptions& opts, const ModelSpec& null_spec,
                      const AlternativeSpec& alt, const QuantileTable& table, double alpha,
                      std::uint64_t reps, std::uint64_t seed, std::uint64_t n_steps = 10000);

// Time-changed signal h*(s) = u_T^{1/2} h(x(u_T s)) built from the time
// change u(x) = int_{x0}^{x} sigma^2/S0^3 dy, inverted by monotone cubic
// interpolation of the tabulated curve.
struct TimeChangedSignal {
    double u_T = 0.0;
    std::function<double(double)> h_star;  // defined on [0, 1]
};
TimeChangedSignal build_time_changed_signal(const ModelSpec& spec, const CoefficientFn& h,
                                            int table_nodes = 4097);

// Limiting power of the C-vM test: P{ int_0^1 [int_0^v h*(s) ds + w_v]^2 dv
// > c_alpha } by Monte Carlo, with the same discretization conventions as
// the reference-law calibration. When `table` is null, the threshold is
// calibrated internally from (reps, n_steps, seed + 1).
double limit_power_cvm(const std::function<double(double)>& h_star, double alpha,
                       std::uint64_t reps, std::uint64_t n_steps, std::uint64_t seed,
                       const QuantileTable* table = nullptr);

// Oscillating alternative h_n(x) = c (S0(x)^2/sigma(x)^2) cos(n (x - x0)) of
// fixed contrast but vanishing integrated effect.
AlternativeSpec degenerate_family(const ModelSpec& spec, int n, double c);

// Constant c(eps) from (c^2/4) int_{x0}^{x_T} S0/sigma^2 dx = r^2/eps^2,
// and the matching index n(eps) = c(eps)^2.
struct DegenerateScale {
    double c = 0.0;
    double n = 0.0;
};
DegenerateScale degenerate_scale_for_contrast(const ModelSpec& spec, double r);

struct PowerCurve {
    std::vector<double> x_axis;  // epsilon values or signal scales
    std::vector<double> power;
    std::vector<double> se;  // binomial standard errors
    std::uint64_t reps = 0;
    std::string test_name;
};

// CSV export, header "x,power,se".
void write_power_curve_csv(const std::string& path, const PowerCurve& curve);

}  // namespace smallnoise
