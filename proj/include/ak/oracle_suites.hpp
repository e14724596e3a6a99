#pragma once

// Identity suites run by `ak verify-oracles`. Each suite returns a JSON report
// {"suite", "pass", "seed", "checks": [{"name", "pass", ...margins}]}.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace ak {

/// "aitken", "matern", "cauchy", "cm" and "all".
std::vector<std::string> oracle_suite_names();

/// trials only affects the aitken suite (instance count). Throws ParamError
/// for unknown suite names.
nlohmann::json run_oracle_suite(const std::string& name, std::uint64_t seed, int trials = 100);

}  // namespace ak
