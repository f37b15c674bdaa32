#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace smallnoise {

// Uniform partition of [0, T] into n_steps intervals (n_steps + 1 nodes).
struct TimeGrid {
    double T = 1.0;
    std::size_t n_steps = 10000;

    double dt() const { return T / static_cast<double>(n_steps); }
    std::size_t n_nodes() const { return n_steps + 1; }
    double node(std::size_t i) const {
        return static_cast<double>(i) * T / static_cast<double>(n_steps);
    }
};

// Observed (or simulated) path X_{t_i} on a uniform grid.
struct Trajectory {
    TimeGrid grid;
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::uint64_t model_hash = 0;
};

// Solution of the noise-free limit equation on the same kind of grid.
struct LimitPath {
    TimeGrid grid;
    std::vector<double> values;
};

// CSV exchange format: header "t,x", one row per node, full double precision.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace smallnoise
