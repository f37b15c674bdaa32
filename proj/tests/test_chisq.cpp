#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "smallnoise/chisq.hpp"
#include "smallnoise/parallel.hpp"
#include "smallnoise/sde.hpp"
#include "smallnoise/stats.hpp"

using namespace smallnoise;

namespace {

ModelSpec make_spec(const std::string& trend, const std::string& diffusion, double x0,
                    double T, double eps) {
    ModelSpec spec;
    spec.trend = CoefficientFn::parse(trend);
    spec.diffusion = CoefficientFn::parse(diffusion);
    spec.x0 = x0;
    spec.T = T;
    spec.epsilon = eps;
    return spec;
}

FourierCoeffs coeffs_from(std::vector<double> values, int m) {
    FourierCoeffs coeffs;
    coeffs.m = m;
    coeffs.values = std::move(values);
    return coeffs;
}

}  // namespace

TEST_CASE("trigonometric basis is orthonormal on the working grid") {
    const BasisSpec basis{1.0, 10};
    const TimeGrid grid{1.0, 2048};
    const auto gram = basis_gram(basis, grid);
    const int count = basis.count();
    for (int a = 0; a < count; ++a) {
        for (int b = 0; b < count; ++b) {
            const double expected = a == b ? 1.0 : 0.0;
            CHECK(std::abs(gram[static_cast<std::size_t>(a) * count + b] - expected) < 1e-6);
        }
    }
}

TEST_CASE("flat trajectory with zero drift has zero coefficients") {
    const ModelSpec spec = make_spec("0", "1", 0.0, 1.0, 0.1);
    Trajectory traj;
    traj.grid = TimeGrid{1.0, 512};
    traj.values.assign(traj.grid.n_nodes(), 0.0);
    const auto coeffs = fourier_coeffs(traj, spec, BasisSpec{1.0, 6});
    for (double y : coeffs.values) {
        CHECK(y == 0.0);
    }
}

TEST_CASE("statistic arithmetic") {
    CHECK(stat_chisq(coeffs_from({1.0, 1.0, 1.0}, 2)) == doctest::Approx(0.0));
    CHECK(stat_chisq(coeffs_from({0.0}, 1)) == doctest::Approx(-0.5));
}

TEST_CASE("coefficients are standard Gaussian and uncorrelated under the null") {
    const ModelSpec spec = make_spec("1", "1", 0.0, 1.0, 0.1);
    const TimeGrid grid{1.0, 2048};
    const BasisSpec basis{1.0, 10};
    const std::uint64_t reps = 8000;
    const int count = basis.count();
    std::vector<std::vector<double>> draws(static_cast<std::size_t>(count),
                                           std::vector<double>(reps));
    {
        std::vector<std::vector<double>> rows(reps);
        parallel_for(reps, [&](std::size_t r) {
            const Trajectory traj = simulate_sde(spec, grid, 303, r);
            rows[r] = fourier_coeffs(traj, spec, basis).values;
        });
        for (std::uint64_t r = 0; r < reps; ++r) {
            for (int j = 0; j < count; ++j) {
                draws[static_cast<std::size_t>(j)][r] = rows[r][static_cast<std::size_t>(j)];
            }
        }
    }
    for (int j = 0; j < count; ++j) {
        CHECK(std::abs(mean(draws[static_cast<std::size_t>(j)])) < 0.05);
        const double v = variance(draws[static_cast<std::size_t>(j)]);
        CHECK(v > 0.9);
        CHECK(v < 1.1);
    }
    for (int a = 0; a < count; ++a) {
        for (int b = a + 1; b < count; ++b) {
            CHECK(std::abs(correlation(draws[static_cast<std::size_t>(a)],
                                       draws[static_cast<std::size_t>(b)])) < 0.05);
        }
    }
}

TEST_CASE("centered statistic approaches the standard normal for large m") {
    const ModelSpec spec = make_spec("1", "1", 0.0, 1.0, 0.1);
    const TimeGrid grid{1.0, 2048};
    const BasisSpec basis{1.0, 200};
    const std::uint64_t reps = 2000;
    std::vector<double> stat(reps);
    parallel_for(reps, [&](std::size_t r) {
        const Trajectory traj = simulate_sde(spec, grid, 404, r);
        stat[r] = stat_chisq(fourier_coeffs(traj, spec, basis));
    });
    CHECK(ks_distance_cdf(stat, [](double x) { return normal_cdf(x); }) < 0.06);
}

TEST_CASE("weighted statistic centers at zero and matches the weight-sum variance") {
    // Var = 2 sum w_i^2 with Var(y^2 - 1) = 2; with the normalizer z this
    // weight sum evaluates to 1/2, so the statistic has unit variance.
    const std::vector<double> weights = chisq_weights(200, 2);
    double sum_sq = 0.0;
    for (double w : weights) {
        sum_sq += w * w;
    }
    const double expected_var = 2.0 * sum_sq;
    CHECK(sum_sq == doctest::Approx(0.5).epsilon(1e-12));

    CHECK(stat_chisq_weighted(coeffs_from(std::vector<double>(399, 1.0), 200), 2) ==
          doctest::Approx(0.0));

    const ModelSpec spec = make_spec("1", "1", 0.0, 1.0, 0.1);
    const TimeGrid grid{1.0, 2048};
    const BasisSpec basis{1.0, 200};
    const std::uint64_t reps = 2000;
    std::vector<double> stat(reps);
    parallel_for(reps, [&](std::size_t r) {
        const Trajectory traj = simulate_sde(spec, grid, 505, r);
        stat[r] = stat_chisq_weighted(fourier_coeffs(traj, spec, basis), 2);
    });
    CHECK(std::abs(mean(stat)) < 0.05);
    CHECK(variance(stat) == doctest::Approx(expected_var).epsilon(0.15));
}

TEST_CASE("large smoothness order flattens the weights") {
    // As k grows, w_i -> z^2 for every |i| < m, so the weighted statistic
    // becomes proportional to the unweighted one.
    const int m = 5;
    const int k = 300;
    const std::vector<double> weights = chisq_weights(m, k);
    const double z_sq = weights[static_cast<std::size_t>(m - 1)];  // w_0 = z^2
    for (double w : weights) {
        CHECK(w == doctest::Approx(z_sq).epsilon(1e-10));
    }
    const FourierCoeffs fixed = coeffs_from({0.3, -1.2, 0.9, 2.0, -0.4, 1.1, 0.0, 0.7, -1.5},
                                            m);
    const double weighted = stat_chisq_weighted(fixed, k);
    const double plain = stat_chisq(fixed);
    CHECK(weighted ==
          doctest::Approx(z_sq * std::sqrt(4.0 * m) * plain).epsilon(1e-9));
}

TEST_CASE("exact chi-square threshold") {
    // chi2_1(0.95) = z_{0.975}^2 = 3.8415 gives c = (3.8415 - 1)/2.
    const double q1 = normal_quantile(0.975);
    CHECK(chisq_exact_threshold(1, 0.05) == doctest::Approx((q1 * q1 - 1.0) / 2.0).epsilon(1e-6));
    CHECK(chisq_exact_threshold(1, 0.05) == doctest::Approx(1.4207).epsilon(1e-3));
    // normal limit from above as m grows
    const double z = normal_quantile(0.95);
    const double gap_small = std::abs(chisq_exact_threshold(100, 0.05) - z);
    const double gap_large = std::abs(chisq_exact_threshold(10000, 0.05) - z);
    CHECK(gap_large < gap_small);
    CHECK(gap_large < 0.01);
    // centered statistic has median near zero
    CHECK(std::abs(chisq_exact_threshold(1000, 0.5)) < 0.02);
}

TEST_CASE("limiting power expression") {
    CHECK(chisq_power_limit(0.0, 0.05) == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(chisq_power_limit(normal_quantile(0.95), 0.05) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(chisq_power_limit(1.0, 0.05) == doctest::Approx(0.2595).epsilon(1e-3));
    CHECK_THROWS(chisq_power_limit(-0.1, 0.05));
}

TEST_CASE("coefficient-count rule") {
    CHECK(select_m(1.0, 0.1) == 2500);
    CHECK(select_m(0.5, 0.05) == 2500);
    CHECK(select_m(1.0, 0.9) == 1);  // ceil of a small positive number
}

TEST_CASE("signal energy accumulates to the L2 norm of the perturbation") {
    // Under the chisq scaling with h(x) = x, sum z_j^2 over |j| < m converges
    // to int_0^1 x_t^2 dt = 1/3 (S0 = 1, x0 = 0).
    const ModelSpec spec = make_spec("1", "1", 0.0, 1.0, 0.02);
    const TimeGrid grid{1.0, 2048};
    const CoefficientFn h = CoefficientFn::parse("x");
    const Trajectory traj =
        simulate_alternative(spec, h, grid, 606, AlternativeScaling::ChiSquare);
    std::vector<double> signal(grid.n_steps);
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        signal[i] = h.eval(traj.values[i]);
    }
    auto energy = [&](int m) {
        const auto z = fourier_time_coeffs(BasisSpec{1.0, m}, grid, signal);
        double sum = 0.0;
        for (double v : z.values) {
            sum += v * v;
        }
        return sum;
    };
    const double e5 = energy(5);
    const double e40 = energy(40);
    CHECK(std::abs(e40 - 1.0 / 3.0) < 0.1 / 3.0);
    CHECK(std::abs(e40 - 1.0 / 3.0) <= std::abs(e5 - 1.0 / 3.0));
}

TEST_CASE("statistic works without any limit-path machinery") {
    // Mean-reverting drift that is not positive: only sigma^2 > 0 matters.
    const ModelSpec spec = make_spec("0 - x", "1", 1.0, 1.0, 0.5);
    const TimeGrid grid{1.0, 1024};
    const Trajectory traj = simulate_sde(spec, grid, 707);
    const double value = stat_chisq(fourier_coeffs(traj, spec, BasisSpec{1.0, 8}));
    CHECK(std::isfinite(value));
}

TEST_CASE("coefficients export as indexed CSV") {
    FourierCoeffs coeffs;
    coeffs.m = 2;
    coeffs.values = {0.5, -1.0, 2.0};  // j = -1, 0, 1
    const auto path = std::filesystem::temp_directory_path() / "sn_coeffs_test.csv";
    write_fourier_coeffs_csv(path.string(), coeffs);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "j,y");
    std::getline(in, line);
    CHECK(line == "-1,0.5");
    std::getline(in, line);
    CHECK(line == "0,-1");
    std::filesystem::remove(path);
}

TEST_CASE("vanishing diffusion is an error") {
    const ModelSpec spec = make_spec("1", "x", 0.0, 1.0, 0.1);
    Trajectory traj;
    traj.grid = TimeGrid{1.0, 64};
    traj.values.assign(traj.grid.n_nodes(), 0.0);
    CHECK_THROWS(fourier_coeffs(traj, spec, BasisSpec{1.0, 4}));
}
