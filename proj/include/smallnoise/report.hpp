#pragma once

#include <map>
#include <string>

#include "smallnoise/refdist.hpp"

namespace smallnoise {

struct TestReport {
    std::string statistic_name;
    double value = 0.0;
    double threshold = 0.0;
    double alpha = 0.0;
    bool reject = false;
    std::map<std::string, double> diagnostics;
};

// Rejects on strict exceedance only: a value equal to the threshold accepts.
TestReport decide(double value, const QuantileTable& table, double alpha,
                  const std::string& name);

std::string report_to_json(const TestReport& report);

}  // namespace smallnoise
