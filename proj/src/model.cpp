#include "smallnoise/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "smallnoise/ode.hpp"

namespace smallnoise {

std::uint64_t ModelSpec::hash() const {
    std::ostringstream canon;
    canon << trend.print() << '|' << diffusion.print() << '|' << x0 << '|' << T << '|'
          << epsilon;
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon.str()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ValidationReport validate_model(const ModelSpec& spec, int grid_points, double margin,
                                double lipschitz_warn_threshold) {
    ValidationReport report;
    if (grid_points < 2) {
        report.message = "grid_points must be at least 2";
        return report;
    }
    if (!(spec.epsilon > 0.0)) {
        report.message = "epsilon must be positive";
        return report;
    }
    if (!(spec.T > 0.0)) {
        report.message = "T must be positive";
        return report;
    }

    // Realized range from the limit equation (solved on a fixed fine grid).
    TimeGrid grid{spec.T, 4096};
    std::vector<double> path;
    try {
        path = rk4_path([&](double, double x) { return spec.trend.eval(x); }, spec.x0, grid);
    } catch (const std::exception& e) {
        report.message = std::string("limit ODE failed: ") + e.what();
        return report;
    }
    const auto [lo_it, hi_it] = std::minmax_element(path.begin(), path.end());
    report.range_lo = *lo_it - margin;
    report.range_hi = *hi_it + margin;

    const double span = report.range_hi - report.range_lo;
    report.min_trend = std::numeric_limits<double>::infinity();
    report.min_diffusion_sq = std::numeric_limits<double>::infinity();
    double prev_s = 0.0;
    double prev_sig = 0.0;
    double lip = 0.0;
    for (int k = 0; k < grid_points; ++k) {
        const double x =
            report.range_lo + span * static_cast<double>(k) / static_cast<double>(grid_points - 1);
        double s = 0.0;
        double sig = 0.0;
        try {
            s = spec.trend.eval(x);
            sig = spec.diffusion.eval(x);
        } catch (const ExprError& e) {
            report.message = "coefficient evaluation failed at x=" + std::to_string(x) + ": " +
                             e.what();
            return report;
        }
        if (s < report.min_trend) {
            report.min_trend = s;
            report.min_trend_at = x;
        }
        if (sig * sig < report.min_diffusion_sq) {
            report.min_diffusion_sq = sig * sig;
            report.min_diffusion_sq_at = x;
        }
        if (k > 0 && span > 0.0) {
            const double dx = span / static_cast<double>(grid_points - 1);
            lip = std::max(lip, (std::abs(s - prev_s) + std::abs(sig - prev_sig)) / dx);
        }
        prev_s = s;
        prev_sig = sig;
    }
    report.lipschitz_estimate = lip;
    report.lipschitz_warning = lip > lipschitz_warn_threshold;

    if (!(report.min_trend > 0.0)) {
        report.message = "trend not positive at x=" + std::to_string(report.min_trend_at);
        return report;
    }
    if (!(report.min_diffusion_sq > 0.0)) {
        report.message =
            "diffusion^2 not positive at x=" + std::to_string(report.min_diffusion_sq_at);
        return report;
    }
    report.ok = true;
    report.message = "ok";
    return report;
}

ModelSpec model_from_json_text(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ModelSpec spec;
    spec.trend = CoefficientFn::parse(j.at("trend").get<std::string>());
    spec.diffusion = CoefficientFn::parse(j.at("diffusion").get<std::string>());
    spec.x0 = j.at("x0").get<double>();
    spec.T = j.at("T").get<double>();
    spec.epsilon = j.at("epsilon").get<double>();
    return spec;
}

ModelSpec load_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open model file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json_text(buf.str());
}

std::string model_to_json_text(const ModelSpec& spec) {
    nlohmann::ordered_json j;
    j["trend"] = spec.trend.print();
    j["diffusion"] = spec.diffusion.print();
    j["x0"] = spec.x0;
    j["T"] = spec.T;
    j["epsilon"] = spec.epsilon;
    return j.dump(2);
}

}  // namespace smallnoise
