#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace smallnoise {

// Limit laws of the test statistics: the integral and supremum functionals
// of a standard Wiener path on [0,1], and the standard normal.
enum class RefDistribution { IntSquaredWiener, SupAbsWiener, StdNormal };

std::string to_string(RefDistribution dist);
RefDistribution ref_distribution_from_string(const std::string& name);

struct QuantileTable {
    RefDistribution distribution = RefDistribution::IntSquaredWiener;
    std::vector<double> alphas;           // strictly increasing, in (0,1)
    std::vector<double> critical_values;  // matching (1-alpha)-quantiles
    std::uint64_t replications = 0;
    std::uint64_t n_steps = 0;
    std::uint64_t seed = 0;

    // Critical value for a tail level alpha present in the table.
    double critical_value(double alpha) const;
};

// One replication of the discretized functional: Wiener path on [0,1] with
// n_steps increments; left Riemann sum for the integral, grid max for the
// supremum. Replication k draws from substream (seed, k).
double wiener_functional(RefDistribution dist, std::uint64_t seed, std::uint64_t replication,
                         std::uint64_t n_steps);

// Full Monte Carlo sample of the functional, replication-indexed (and hence
// identical for any worker count).
std::vector<double> sample_functional(RefDistribution dist, std::uint64_t replications,
                                      std::uint64_t n_steps, std::uint64_t seed);

// Empirical (1-alpha)-quantile of the simulated functional (type-7
// interpolation). StdNormal is answered in closed form and ignores
// replications/n_steps/seed.
double mc_critical_value(RefDistribution dist, double alpha, std::uint64_t replications,
                         std::uint64_t n_steps, std::uint64_t seed);

QuantileTable make_quantile_table(RefDistribution dist, const std::vector<double>& alphas,
                                  std::uint64_t replications, std::uint64_t n_steps,
                                  std::uint64_t seed);

// P{ sup_{0<=v<=1} |w_v| > b } by the reflection series, truncated once a
// term drops below 1e-14. Closed-form oracle for the SupAbsWiener law.
double sup_abs_wiener_tail(double b);

// Monte Carlo estimates of E int w^2 (= 1/2) and Var int w^2 (= 1/3).
struct MomentEstimate {
    double mean = 0.0;
    double variance = 0.0;
};
MomentEstimate int_sq_wiener_moments(std::uint64_t replications, std::uint64_t n_steps,
                                     std::uint64_t seed);

// --- disk cache ---

std::string quantile_table_to_json(const QuantileTable& table);
QuantileTable quantile_table_from_json(const std::string& text);

// Directory used for calibration caching: SMALLNOISE_CACHE_DIR if set,
// otherwise ".smallnoise_cache" under the working directory.
std::string default_cache_dir();

// Loads the table for exactly these parameters from `dir`, or computes and
// stores it. Files are keyed by a content hash of the parameters.
QuantileTable load_or_compute_table(const std::string& dir, RefDistribution dist,
                                    const std::vector<double>& alphas,
                                    std::uint64_t replications, std::uint64_t n_steps,
                                    std::uint64_t seed, bool use_cache = true);

}  // namespace smallnoise
