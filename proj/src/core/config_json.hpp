#ifndef ADB_CORE_CONFIG_JSON_HPP
#define ADB_CORE_CONFIG_JSON_HPP

#include <string>

#include "core/evaluation.hpp"

namespace adb {

// Config objects from/to JSON. Parsers accept a subset of keys and leave the
// rest at defaults; unknown keys are argument errors so typos fail loudly.
RepTrainConfig parse_rep_config(const std::string& config_json);
BoundaryTrainConfig parse_boundary_config(const std::string& config_json);
ExperimentConfig parse_experiment_config(const std::string& config_json);

std::string rep_config_to_json(const RepTrainConfig& cfg);
std::string boundary_config_to_json(const BoundaryTrainConfig& cfg);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

}  // namespace adb

#endif  // ADB_CORE_CONFIG_JSON_HPP
