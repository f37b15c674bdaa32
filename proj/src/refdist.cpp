#include "smallnoise/refdist.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

#include <json.hpp>

#include "smallnoise/parallel.hpp"
#include "smallnoise/rng.hpp"
#include "smallnoise/stats.hpp"

namespace smallnoise {

std::string to_string(RefDistribution dist) {
    switch (dist) {
        case RefDistribution::IntSquaredWiener:
            return "int-sq-wiener";
        case RefDistribution::SupAbsWiener:
            return "sup-abs-wiener";
        case RefDistribution::StdNormal:
            return "std-normal";
    }
    return "?";
}

RefDistribution ref_distribution_from_string(const std::string& name) {
    if (name == "int-sq-wiener") {
        return RefDistribution::IntSquaredWiener;
    }
    if (name == "sup-abs-wiener") {
        return RefDistribution::SupAbsWiener;
    }
    if (name == "std-normal") {
        return RefDistribution::StdNormal;
    }
    throw std::invalid_argument("unknown reference distribution: " + name);
}

double QuantileTable::critical_value(double alpha) const {
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (std::abs(alphas[i] - alpha) < 1e-12) {
            return critical_values[i];
        }
    }
    throw std::invalid_argument("alpha not present in quantile table");
}

double wiener_functional(RefDistribution dist, std::uint64_t seed, std::uint64_t replication,
                         std::uint64_t n_steps) {
    const RandomStream noise = replication_stream(seed, replication, 0);
    const double dt = 1.0 / static_cast<double>(n_steps);
    const double sqrt_dt = std::sqrt(dt);
    double w = 0.0;
    double int_sq = 0.0;
    double sup_abs = 0.0;
    for (std::uint64_t i = 0; i < n_steps; ++i) {
        int_sq += w * w * dt;  // left endpoint; w_0 = 0
        w += sqrt_dt * noise.normal(i);
        sup_abs = std::max(sup_abs, std::abs(w));
    }
    return dist == RefDistribution::IntSquaredWiener ? int_sq : sup_abs;
}

std::vector<double> sample_functional(RefDistribution dist, std::uint64_t replications,
                                      std::uint64_t n_steps, std::uint64_t seed) {
    if (dist == RefDistribution::StdNormal) {
        throw std::invalid_argument("sample_functional: StdNormal has a closed form");
    }
    std::vector<double> out(replications);
    parallel_for(replications, [&](std::size_t r) {
        out[r] = wiener_functional(dist, seed, r, n_steps);
    });
    return out;
}

double mc_critical_value(RefDistribution dist, double alpha, std::uint64_t replications,
                         std::uint64_t n_steps, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("mc_critical_value: alpha must lie in (0,1)");
    }
    if (dist == RefDistribution::StdNormal) {
        return normal_quantile(1.0 - alpha);
    }
    if (replications < 100) {
        throw std::invalid_argument("mc_critical_value: need at least 100 replications");
    }
    std::vector<double> sample = sample_functional(dist, replications, n_steps, seed);
    std::sort(sample.begin(), sample.end());
    return quantile_sorted(sample, 1.0 - alpha);
}

QuantileTable make_quantile_table(RefDistribution dist, const std::vector<double>& alphas,
                                  std::uint64_t replications, std::uint64_t n_steps,
                                  std::uint64_t seed) {
    QuantileTable table;
    table.distribution = dist;
    table.alphas = alphas;
    table.replications = replications;
    table.n_steps = n_steps;
    table.seed = seed;
    table.critical_values.reserve(alphas.size());
    if (dist == RefDistribution::StdNormal) {
        for (double a : alphas) {
            table.critical_values.push_back(normal_quantile(1.0 - a));
        }
        return table;
    }
    std::vector<double> sample = sample_functional(dist, replications, n_steps, seed);
    std::sort(sample.begin(), sample.end());
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) {
            throw std::invalid_argument("make_quantile_table: alpha must lie in (0,1)");
        }
        table.critical_values.push_back(quantile_sorted(sample, 1.0 - a));
    }
    return table;
}

double sup_abs_wiener_tail(double b) {
    if (!(b > 0.0)) {
        throw std::invalid_argument("sup_abs_wiener_tail: b must be positive");
    }
    constexpr double pi = 3.14159265358979323846264338327950288;
    double sum = 0.0;
    for (int k = 0;; ++k) {
        const double odd = 2.0 * k + 1.0;
        const double term = std::exp(-pi * pi * odd * odd / (8.0 * b * b)) / odd;
        sum += (k % 2 == 0 ? term : -term);
        if (term < 1e-14) {
            break;
        }
    }
    return 1.0 - 4.0 / pi * sum;
}

MomentEstimate int_sq_wiener_moments(std::uint64_t replications, std::uint64_t n_steps,
                                     std::uint64_t seed) {
    const std::vector<double> sample =
        sample_functional(RefDistribution::IntSquaredWiener, replications, n_steps, seed);
    return MomentEstimate{mean(sample), variance(sample)};
}

std::string quantile_table_to_json(const QuantileTable& table) {
    nlohmann::ordered_json j;
    j["distribution"] = to_string(table.distribution);
    j["alphas"] = table.alphas;
    j["critical_values"] = table.critical_values;
    j["replications"] = table.replications;
    j["n_steps"] = table.n_steps;
    j["seed"] = table.seed;
    return j.dump(2);
}

QuantileTable quantile_table_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    QuantileTable table;
    table.distribution = ref_distribution_from_string(j.at("distribution").get<std::string>());
    table.alphas = j.at("alphas").get<std::vector<double>>();
    table.critical_values = j.at("critical_values").get<std::vector<double>>();
    table.replications = j.at("replications").get<std::uint64_t>();
    table.n_steps = j.at("n_steps").get<std::uint64_t>();
    table.seed = j.at("seed").get<std::uint64_t>();
    return table;
}

std::string default_cache_dir() {
    if (const char* env = std::getenv("SMALLNOISE_CACHE_DIR")) {
        return env;
    }
    return ".smallnoise_cache";
}

namespace {

std::string cache_key(RefDistribution dist, const std::vector<double>& alphas,
                      std::uint64_t replications, std::uint64_t n_steps, std::uint64_t seed) {
    std::ostringstream canon;
    canon << to_string(dist) << '|' << replications << '|' << n_steps << '|' << seed;
    canon.setf(std::ios::scientific);
    canon.precision(17);
    for (double a : alphas) {
        canon << '|' << a;
    }
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon.str()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream name;
    name << to_string(dist) << '_' << std::hex << h << ".json";
    return name.str();
}

}  // namespace

QuantileTable load_or_compute_table(const std::string& dir, RefDistribution dist,
                                    const std::vector<double>& alphas,
                                    std::uint64_t replications, std::uint64_t n_steps,
                                    std::uint64_t seed, bool use_cache) {
    const std::filesystem::path file =
        std::filesystem::path(dir) / cache_key(dist, alphas, replications, n_steps, seed);
    if (use_cache && std::filesystem::exists(file)) {
        std::ifstream in(file);
        std::ostringstream buf;
        buf << in.rdbuf();
        return quantile_table_from_json(buf.str());
    }
    const QuantileTable table = make_quantile_table(dist, alphas, replications, n_steps, seed);
    if (use_cache) {
        std::filesystem::create_directories(file.parent_path());
        // write-then-rename so concurrent calibrations never expose a
        // half-written table
        std::filesystem::path tmp = file;
        tmp += "." + std::to_string(static_cast<unsigned long>(::getpid())) + ".tmp";
        {
            std::ofstream out(tmp);
            out << quantile_table_to_json(table) << '\n';
        }
        std::error_code ec;
        std::filesystem::rename(tmp, file, ec);
        if (ec) {
            std::filesystem::remove(tmp, ec);
        }
    }
    return table;
}

}  // namespace smallnoise
