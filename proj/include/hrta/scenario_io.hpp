#pragma once

#include <string>

#include "hrta/model.hpp"

namespace hrta {

/// Thrown when a scenario file cannot be parsed (bad JSON, wrong types,
/// missing keys). Validation problems are reported by validate_scenario,
/// not by the loader.
struct ScenarioParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Scenario load_scenario_json(const std::string& text);
Scenario load_scenario_file(const std::string& path);

std::string scenario_to_json(const Scenario& s);

}  // namespace hrta
