#pragma once

#include <span>
#include <string>
#include <vector>

#include "smallnoise/grid.hpp"
#include "smallnoise/model.hpp"

namespace smallnoise {

// Trigonometric orthonormal system on [0, T]:
// phi_0 = 1/sqrt(T), phi_j = sqrt(2/T) cos(2 pi j t / T) for j > 0 and
// phi_{-j} = sqrt(2/T) sin(2 pi j t / T); indices |j| < m (2m - 1 terms).
struct BasisSpec {
    double T = 1.0;
    int m = 10;

    int count() const { return 2 * m - 1; }
};

double basis_value(const BasisSpec& basis, int j, double t);

// Gram matrix of the basis by trapezoid quadrature on the grid, row-major,
// indices ordered j = -(m-1), ..., m-1.
std::vector<double> basis_gram(const BasisSpec& basis, const TimeGrid& grid);

// Fourier coefficients of the normalized innovation measure,
// y_j = sum_i phi_j(t_i) (X_{i+1} - X_i - S0(X_i) dt) / (eps sigma(X_i)),
// left-endpoint (Ito) evaluation.
struct FourierCoeffs {
    int m = 0;
    std::vector<double> values;  // index j stored at position j + m - 1

    double at(int j) const { return values[static_cast<std::size_t>(j + m - 1)]; }
};

FourierCoeffs fourier_coeffs(const Trajectory& traj, const ModelSpec& spec,
                             const BasisSpec& basis);

// Left-point quadrature coefficients b_j = sum_i phi_j(t_i) f_i dt of a time
// series on the grid (the deterministic-signal counterpart of y_j).
FourierCoeffs fourier_time_coeffs(const BasisSpec& basis, const TimeGrid& grid,
                                  std::span<const double> values);

// Centered-and-scaled statistic (4m)^{-1/2} sum_{|j|<m} (y_j^2 - 1).
double stat_chisq(const FourierCoeffs& coeffs);

// Minimax weights w_i = z^2 (1 - |i/m|^{2k}) with normalizer
// z = (2 sum_{i=-m}^{m} [1 - |i/m|^{2k}]^2)^{-1/4}; returned for |i| < m.
std::vector<double> chisq_weights(int m, int k);

// Weighted centered sum sum_{|j|<m} w_j (y_j^2 - 1).
double stat_chisq_weighted(const FourierCoeffs& coeffs, int k);

// Exact finite-m threshold: c = (Q_{chi2, 2m-1}(1 - alpha) - (2m-1)) / sqrt(4m).
double chisq_exact_threshold(int m, double alpha);

// Limiting power of the test at one-sided level alpha against a contiguous
// alternative with noncentrality u: Phi(u - z_alpha).
double chisq_power_limit(double u, double alpha);

// Default coefficient count from a target contrast r: m = ceil(r^4 / (4 eps^4)).
int select_m(double contrast_r, double epsilon);

// CSV export, header "j,y", one row per index.
void write_fourier_coeffs_csv(const std::string& path, const FourierCoeffs& coeffs);

}  // namespace smallnoise
