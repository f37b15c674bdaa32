#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace smallnoise {

// --- quadrature on uniform grids ---

// Trapezoid rule for samples y_0..y_n at spacing dt.
double trapezoid(std::span<const double> y, double dt);

// Left Riemann sum: sum of y_0..y_{n-2} times dt (used where a left-point
// Ito-style convention is required).
double left_riemann(std::span<const double> y, double dt);

// Cumulative trapezoid integral; out[i] = integral up to node i, out[0] = 0.
void cumulative_trapezoid(std::span<const double> y, double dt, std::span<double> out);

// --- descriptive statistics ---

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // unbiased, two-pass
double correlation(std::span<const double> x, std::span<const double> y);

// Empirical quantile with type-7 (linear) interpolation; data must be sorted.
double quantile_sorted(std::span<const double> sorted, double p);
// Convenience: copies, sorts, interpolates.
double quantile(std::vector<double> data, double p);

// --- distribution functions ---

double normal_cdf(double x);
double normal_pdf(double x);
// Inverse standard normal CDF, accurate to ~1e-13 (rational approximation
// plus one Halley refinement against erfc).
double normal_quantile(double p);

// Regularized lower incomplete gamma P(a,x).
double gamma_p(double a, double x);
double chi_square_cdf(double x, double dof);
double chi_square_quantile(double p, double dof);

// --- goodness-of-fit distances ---

// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
double ks_distance(std::vector<double> a, std::vector<double> b);
// One-sample distance against a continuous CDF.
double ks_distance_cdf(std::vector<double> sample, const std::function<double(double)>& cdf);

}  // namespace smallnoise
