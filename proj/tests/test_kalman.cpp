#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "smallnoise/kalman.hpp"
#include "smallnoise/parallel.hpp"
#include "smallnoise/stats.hpp"

using namespace smallnoise;

namespace {

LinearSystemSpec make_linear(const std::string& A, const std::string& B, const std::string& C,
                             const std::string& sigma, double y0, double eps, double T) {
    LinearSystemSpec spec;
    spec.A = CoefficientFn::parse(A);
    spec.B = CoefficientFn::parse(B);
    spec.C = CoefficientFn::parse(C);
    spec.sigma = CoefficientFn::parse(sigma);
    spec.y0 = y0;
    spec.epsilon = eps;
    spec.T = T;
    return spec;
}

}  // namespace

TEST_CASE("Riccati solution is tanh for the unit system") {
    const LinearSystemSpec spec = make_linear("0", "1", "1", "1", 0.0, 0.01, 1.0);
    const TimeGrid grid{1.0, 10000};
    const auto [X, Y] = simulate_linear_system(spec, grid, 1);
    const FilterPath fp = kalman_filter(X, spec);
    for (std::size_t i = 0; i < grid.n_nodes(); i += 500) {
        CHECK(std::abs(fp.Gamma[i] - std::tanh(grid.node(i))) < 1e-6);
    }
    CHECK(fp.Gamma.front() == 0.0);
}

TEST_CASE("no signal noise freezes the filter") {
    const LinearSystemSpec spec = make_linear("0", "0", "1", "1", 0.7, 0.05, 1.0);
    const TimeGrid grid{1.0, 2000};
    const auto [X, Y] = simulate_linear_system(spec, grid, 2);
    for (double y : Y.values) {
        CHECK(y == 0.7);
    }
    const FilterPath fp = kalman_filter(X, spec);
    for (std::size_t i = 0; i < fp.M.size(); ++i) {
        CHECK(fp.Gamma[i] == 0.0);
        CHECK(fp.M[i] == 0.7);
    }
}

TEST_CASE("zero observation gain decouples the filter from the data") {
    // C = 0: Gamma solves the linear equation (A = 0, B = 1 gives Gamma = t),
    // M solves M' = A M and ignores X entirely.
    const LinearSystemSpec spec = make_linear("0", "1", "0", "1", 0.4, 0.05, 1.0);
    const TimeGrid grid{1.0, 4000};
    const auto [X, Y] = simulate_linear_system(spec, grid, 3);
    const FilterPath fp = kalman_filter(X, spec);
    for (std::size_t i = 0; i < fp.M.size(); i += 400) {
        CHECK(fp.Gamma[i] == doctest::Approx(grid.node(i)).epsilon(1e-10));
        CHECK(fp.M[i] == 0.4);
    }
}

TEST_CASE("noise-free system is the pair of deterministic ODEs") {
    const LinearSystemSpec spec = make_linear("1", "1", "1", "1", 1.0, 0.0, 1.0);
    const TimeGrid grid{1.0, 4000};
    const auto [X, Y] = simulate_linear_system(spec, grid, 4);
    // Y' = Y (Euler), X = int Y dt
    double y = 1.0;
    double x = 0.0;
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        x += y * grid.dt();
        y += y * grid.dt();
        CHECK(X.values[i + 1] == doctest::Approx(x).epsilon(1e-12));
        CHECK(Y.values[i + 1] == doctest::Approx(y).epsilon(1e-12));
    }
}

TEST_CASE("observation variance matches the Gaussian computation") {
    // A=0, B=C=sigma=1, y0=0: X_T = eps(int_0^T V_t dt + W_T) has variance
    // eps^2 (T^3/3 + T).
    const LinearSystemSpec spec = make_linear("0", "1", "1", "1", 0.0, 0.02, 1.0);
    const TimeGrid grid{1.0, 2000};
    const std::uint64_t reps = 5000;
    std::vector<double> terminal(reps);
    parallel_for(reps, [&](std::size_t r) {
        terminal[r] = simulate_linear_system(spec, grid, 55, r).first.values.back();
    });
    const double expected = spec.epsilon * spec.epsilon * (1.0 / 3.0 + 1.0);
    CHECK(variance(terminal) == doctest::Approx(expected).epsilon(0.1));
}

TEST_CASE("filter error matches the Riccati variance") {
    const LinearSystemSpec spec = make_linear("0", "1", "1", "1", 0.0, 0.01, 1.0);
    const TimeGrid grid{1.0, 2000};
    const std::uint64_t reps = 2000;
    const std::vector<std::size_t> probes = {500, 1000, 2000};
    std::vector<std::vector<double>> sq_err(probes.size(), std::vector<double>(reps));
    std::vector<double> gamma_at(probes.size());
    parallel_for(reps, [&](std::size_t r) {
        const auto [X, Y] = simulate_linear_system(spec, grid, 66, r);
        const FilterPath fp = kalman_filter(X, spec);
        for (std::size_t p = 0; p < probes.size(); ++p) {
            const double err = Y.values[probes[p]] - fp.M[probes[p]];
            sq_err[p][r] = err * err;
            if (r == 0) {
                gamma_at[p] = fp.Gamma[probes[p]];
            }
        }
    });
    for (std::size_t p = 0; p < probes.size(); ++p) {
        const double mse = mean(sq_err[p]) / (spec.epsilon * spec.epsilon);
        CHECK(mse == doctest::Approx(gamma_at[p]).epsilon(0.15));
    }
}

TEST_CASE("innovation increments are white") {
    const LinearSystemSpec spec = make_linear("0", "1", "1", "1", 0.0, 0.01, 1.0);
    const TimeGrid grid{1.0, 10000};
    const auto [X, Y] = simulate_linear_system(spec, grid, 77);
    const FilterPath fp = kalman_filter(X, spec);
    std::vector<double> increments(grid.n_steps);
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double t = grid.node(i);
        increments[i] = (X.values[i + 1] - X.values[i] -
                         spec.C.eval(t) * fp.M[i] * grid.dt()) /
                        (spec.epsilon * spec.sigma.eval(t));
    }
    CHECK(variance(increments) / grid.dt() == doctest::Approx(1.0).epsilon(0.05));
    std::vector<double> head(increments.begin(), increments.end() - 1);
    std::vector<double> tail(increments.begin() + 1, increments.end());
    CHECK(std::abs(correlation(head, tail)) < 0.05);
}

TEST_CASE("zero innovation gives a zero statistic") {
    // B = 0, A = 0 freezes M at y0; a path with exactly that drift and no
    // noise has zero innovation energy.
    const LinearSystemSpec spec = make_linear("0", "0", "1", "1", 0.3, 0.05, 1.0);
    const TimeGrid grid{1.0, 1000};
    Trajectory X;
    X.grid = grid;
    X.values.resize(grid.n_nodes());
    for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
        X.values[i] = 0.3 * grid.node(i);
    }
    const FilterPath fp = kalman_filter(X, spec);
    CHECK(stat_kalman(X, fp, spec) < 1e-20);
}

TEST_CASE("null law does not depend on the coefficient curves") {
    auto sample_for = [&](const char* A, const char* B, const char* C, const char* S,
                          std::uint64_t seed) {
        const LinearSystemSpec spec = make_linear(A, B, C, S, 0.3, 0.01, 1.0);
        const TimeGrid grid{1.0, 2000};
        const std::uint64_t reps = 2000;
        std::vector<double> out(reps);
        parallel_for(reps, [&](std::size_t r) {
            const auto [x, y] = simulate_linear_system(spec, grid, seed, r);
            out[r] = stat_kalman(x, kalman_filter(x, spec), spec);
        });
        return out;
    };
    const auto unit = sample_for("0", "1", "1", "1", 611);
    const auto curved = sample_for("0.5", "1 + t", "2", "1 + 0.5*t^2", 612);
    CHECK(ks_distance(unit, curved) < 0.05);
}

TEST_CASE("linear system JSON round trip") {
    const std::string text = R"({"A": "0", "B": "t", "C": "1", "sigma": "1 + t^2",
                                 "y0": 0.5, "epsilon": 0.01, "T": 2.0})";
    const LinearSystemSpec spec = linear_system_from_json_text(text);
    CHECK(spec.B.eval(3.0) == doctest::Approx(3.0));
    CHECK(spec.sigma.eval(2.0) == doctest::Approx(5.0));
    CHECK(spec.y0 == 0.5);
    CHECK(spec.T == 2.0);
}

TEST_CASE("vanishing observation noise is rejected") {
    const LinearSystemSpec spec = make_linear("0", "1", "1", "t", 0.0, 0.01, 1.0);
    CHECK_THROWS(simulate_linear_system(spec, TimeGrid{1.0, 100}, 1));
}
