#include "smallnoise/grid.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace smallnoise {

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    out << "t,x\n";
    std::array<char, 96> line{};
    for (std::size_t i = 0; i < traj.values.size(); ++i) {
        std::snprintf(line.data(), line.size(), "%.17g,%.17g\n", traj.grid.node(i),
                      traj.values[i]);
        out << line.data();
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open: " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,x", 0) != 0) {
        throw std::runtime_error("trajectory CSV must start with header 't,x': " + path);
    }
    std::vector<double> t;
    std::vector<double> x;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string a;
        std::string b;
        if (!std::getline(row, a, ',') || !std::getline(row, b)) {
            throw std::runtime_error("malformed trajectory row: " + line);
        }
        t.push_back(std::stod(a));
        x.push_back(std::stod(b));
    }
    if (t.size() < 2) {
        throw std::runtime_error("trajectory needs at least two rows: " + path);
    }
    Trajectory traj;
    traj.grid.T = t.back();
    traj.grid.n_steps = t.size() - 1;
    traj.values = std::move(x);
    return traj;
}

}  // namespace smallnoise
