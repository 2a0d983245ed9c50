#pragma once

// Named end-to-end checks shared by the acceptance runner and `cbias verify`.

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace cbias::checks {

struct Measured {
    std::string name;
    double value;
    std::string tolerance;  ///< human-readable bound, empty if informational
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    std::vector<Measured> measured;
    double seconds = 0.0;

    /// One-line JSON object.
    std::string to_json() const;
};

struct CheckInfo {
    std::string name;
    std::string summary;
    std::function<CheckResult()> run;
};

/// Registered checks in a fixed order.
const std::vector<CheckInfo>& registry();

/// std::invalid_argument for an unknown name.
CheckResult run_check(const std::string& name);

}  // namespace cbias::checks
