#include "smallnoise/report.hpp"

#include <json.hpp>

namespace smallnoise {

TestReport decide(double value, const QuantileTable& table, double alpha,
                  const std::string& name) {
    TestReport report;
    report.statistic_name = name;
    report.value = value;
    report.threshold = table.critical_value(alpha);
    report.alpha = alpha;
    report.reject = value > report.threshold;
    return report;
}

std::string report_to_json(const TestReport& report) {
    nlohmann::ordered_json j;
    j["statistic_name"] = report.statistic_name;
    j["value"] = report.value;
    j["threshold"] = report.threshold;
    j["alpha"] = report.alpha;
    j["reject"] = report.reject;
    nlohmann::ordered_json diag;
    for (const auto& [key, val] : report.diagnostics) {
        diag[key] = val;
    }
    j["diagnostics"] = diag;
    return j.dump(2);
}

}  // namespace smallnoise
