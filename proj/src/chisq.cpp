#include "smallnoise/chisq.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "smallnoise/gof.hpp"
#include "smallnoise/stats.hpp"

namespace smallnoise {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double basis_value(const BasisSpec& basis, int j, double t) {
    if (j == 0) {
        return 1.0 / std::sqrt(basis.T);
    }
    const double amp = std::sqrt(2.0 / basis.T);
    const double phase = kTwoPi * std::abs(j) * t / basis.T;
    return j > 0 ? amp * std::cos(phase) : amp * std::sin(phase);
}

std::vector<double> basis_gram(const BasisSpec& basis, const TimeGrid& grid) {
    const int count = basis.count();
    const std::size_t n = grid.n_nodes();
    std::vector<double> table(static_cast<std::size_t>(count) * n);
    for (int j = -(basis.m - 1); j <= basis.m - 1; ++j) {
        const std::size_t row = static_cast<std::size_t>(j + basis.m - 1);
        for (std::size_t i = 0; i < n; ++i) {
            table[row * n + i] = basis_value(basis, j, grid.node(i));
        }
    }
    std::vector<double> gram(static_cast<std::size_t>(count) * count);
    std::vector<double> prod(n);
    for (int a = 0; a < count; ++a) {
        for (int b = 0; b < count; ++b) {
            for (std::size_t i = 0; i < n; ++i) {
                prod[i] = table[static_cast<std::size_t>(a) * n + i] *
                          table[static_cast<std::size_t>(b) * n + i];
            }
            gram[static_cast<std::size_t>(a) * count + b] = trapezoid(prod, grid.dt());
        }
    }
    return gram;
}

namespace {

// Accumulates sum_i phi_j(t_i) f_i for every |j| < m in m passes, using an
// incremental rotation per frequency (one pass serves +j and -j).
FourierCoeffs project_on_basis(const BasisSpec& basis, const TimeGrid& grid,
                               std::span<const double> f) {
    FourierCoeffs coeffs;
    coeffs.m = basis.m;
    coeffs.values.assign(static_cast<std::size_t>(basis.count()), 0.0);
    const std::size_t n = grid.n_steps;  // left endpoints t_0 .. t_{n-1}

    double sum0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum0 += f[i];
    }
    coeffs.values[static_cast<std::size_t>(basis.m - 1)] = sum0 / std::sqrt(basis.T);

    const double amp = std::sqrt(2.0 / basis.T);
    for (int j = 1; j < basis.m; ++j) {
        const double step = kTwoPi * j * grid.dt() / basis.T;
        const double cd = std::cos(step);
        const double sd = std::sin(step);
        double c = 1.0;  // cos at t_0 = 0
        double s = 0.0;
        double sum_cos = 0.0;
        double sum_sin = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum_cos += c * f[i];
            sum_sin += s * f[i];
            const double cn = c * cd - s * sd;
            s = s * cd + c * sd;
            c = cn;
        }
        coeffs.values[static_cast<std::size_t>(basis.m - 1 + j)] = amp * sum_cos;
        coeffs.values[static_cast<std::size_t>(basis.m - 1 - j)] = amp * sum_sin;
    }
    return coeffs;
}

}  // namespace

FourierCoeffs fourier_coeffs(const Trajectory& traj, const ModelSpec& spec,
                             const BasisSpec& basis) {
    if (basis.m < 1) {
        throw StatisticError("basis needs m >= 1");
    }
    const std::size_t n = traj.grid.n_steps;
    const double dt = traj.grid.dt();
    std::vector<double> innovations(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = traj.values[i];
        const double sig = spec.diffusion.eval(x);
        if (sig * sig <= 0.0) {
            throw StatisticError("diffusion vanishes on the observed range");
        }
        innovations[i] =
            (traj.values[i + 1] - x - spec.trend.eval(x) * dt) / (spec.epsilon * sig);
    }
    return project_on_basis(basis, traj.grid, innovations);
}

FourierCoeffs fourier_time_coeffs(const BasisSpec& basis, const TimeGrid& grid,
                                  std::span<const double> values) {
    std::vector<double> scaled(grid.n_steps);
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        scaled[i] = values[i] * grid.dt();
    }
    return project_on_basis(basis, grid, scaled);
}

double stat_chisq(const FourierCoeffs& coeffs) {
    double sum = 0.0;
    for (double y : coeffs.values) {
        sum += y * y - 1.0;
    }
    return sum / std::sqrt(4.0 * static_cast<double>(coeffs.m));
}

std::vector<double> chisq_weights(int m, int k) {
    if (m < 1 || k < 1) {
        throw std::invalid_argument("chisq_weights: need m >= 1 and k >= 1");
    }
    double norm_sum = 0.0;
    for (int i = -m; i <= m; ++i) {
        const double frac = std::abs(static_cast<double>(i)) / static_cast<double>(m);
        const double term = 1.0 - std::pow(frac, 2.0 * k);
        norm_sum += term * term;
    }
    const double z = std::pow(2.0 * norm_sum, -0.25);
    std::vector<double> weights(static_cast<std::size_t>(2 * m - 1));
    for (int j = -(m - 1); j <= m - 1; ++j) {
        const double frac = std::abs(static_cast<double>(j)) / static_cast<double>(m);
        weights[static_cast<std::size_t>(j + m - 1)] =
            z * z * (1.0 - std::pow(frac, 2.0 * k));
    }
    return weights;
}

double stat_chisq_weighted(const FourierCoeffs& coeffs, int k) {
    const std::vector<double> weights = chisq_weights(coeffs.m, k);
    double sum = 0.0;
    for (std::size_t i = 0; i < coeffs.values.size(); ++i) {
        sum += weights[i] * (coeffs.values[i] * coeffs.values[i] - 1.0);
    }
    return sum;
}

double chisq_exact_threshold(int m, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("chisq_exact_threshold: alpha must lie in (0,1)");
    }
    const double dof = 2.0 * m - 1.0;
    const double q = chi_square_quantile(1.0 - alpha, dof);
    return (q - dof) / std::sqrt(4.0 * static_cast<double>(m));
}

double chisq_power_limit(double u, double alpha) {
    if (u < 0.0) {
        throw std::invalid_argument("chisq_power_limit: u must be nonnegative");
    }
    return normal_cdf(u - normal_quantile(1.0 - alpha));
}

int select_m(double contrast_r, double epsilon) {
    const double raw = std::pow(contrast_r, 4.0) / (4.0 * std::pow(epsilon, 4.0));
    return static_cast<int>(std::ceil(raw));
}

void write_fourier_coeffs_csv(const std::string& path, const FourierCoeffs& coeffs) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    out << "j,y\n";
    std::array<char, 64> line{};
    for (int j = -(coeffs.m - 1); j <= coeffs.m - 1; ++j) {
        std::snprintf(line.data(), line.size(), "%d,%.17g\n", j, coeffs.at(j));
        out << line.data();
    }
}

}  // namespace smallnoise
