#pragma once

#include <cstdint>
#include <string>

#include "smallnoise/expr.hpp"

namespace smallnoise {

// Scalar diffusion model dX = S0(X) dt + eps * sigma(X) dW on [0, T].
struct ModelSpec {
    CoefficientFn trend;      // S0
    CoefficientFn diffusion;  // sigma
    double x0 = 0.0;
    double T = 1.0;
    double epsilon = 0.1;

    std::uint64_t hash() const;
};

struct ValidationReport {
    bool ok = false;
    double min_trend = 0.0;          // min S0 over the sampled range
    double min_trend_at = 0.0;
    double min_diffusion_sq = 0.0;   // min sigma^2 over the sampled range
    double min_diffusion_sq_at = 0.0;
    double lipschitz_estimate = 0.0;  // finite-difference bound for |dS0| + |dsigma|
    bool lipschitz_warning = false;
    double range_lo = 0.0;
    double range_hi = 0.0;
    std::string message;
};

// Solves the limit equation, samples the realized range [x0, x_T] (widened by
// `margin` on both sides), and checks positivity of S0 and sigma^2 there.
// Positivity failure is fatal (ok = false); a large Lipschitz estimate only
// raises the warning flag.
ValidationReport validate_model(const ModelSpec& spec, int grid_points,
                                double margin = 0.0,
                                double lipschitz_warn_threshold = 1e3);

// JSON model file: {"trend": ..., "diffusion": ..., "x0": ..., "T": ...,
// "epsilon": ...} with coefficient values given as DSL strings.
ModelSpec load_model_json(const std::string& path);
ModelSpec model_from_json_text(const std::string& text);
std::string model_to_json_text(const ModelSpec& spec);

}  // namespace smallnoise
