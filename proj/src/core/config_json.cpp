#include "core/config_json.hpp"

#include <json.hpp>

#include "core/errors.hpp"

namespace adb {

using nlohmann::json;

namespace {

json parse_object(const std::string& text, const char* what) {
  if (text.empty()) return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw_argument(std::string(what) + " config: " + e.what());
  }
  if (!j.is_object()) throw_argument(std::string(what) + " config must be a JSON object");
  return j;
}

template <typename T>
void take(json& j, const char* key, T& into) {
  if (auto it = j.find(key); it != j.end()) {
    into = it->get<T>();
    j.erase(it);
  }
}

void reject_unknown(const json& j, const char* what) {
  if (!j.empty())
    throw_argument(std::string(what) + " config: unknown key \"" +
                   j.begin().key() + "\"");
}

RepTrainConfig rep_from_json(json j) {
  RepTrainConfig cfg;
  take(j, "learning_rate", cfg.learning_rate);
  take(j, "batch_size", cfg.batch_size);
  take(j, "max_epochs", cfg.max_epochs);
  take(j, "seed", cfg.seed);
  take(j, "early_stop_patience", cfg.early_stop_patience);
  take(j, "rep_dim", cfg.rep_dim);
  reject_unknown(j, "representation");
  return cfg;
}

BoundaryTrainConfig boundary_from_json(json j) {
  BoundaryTrainConfig cfg;
  take(j, "learning_rate", cfg.learning_rate);
  take(j, "batch_size", cfg.batch_size);
  take(j, "max_epochs", cfg.max_epochs);
  take(j, "convergence_tol", cfg.convergence_tol);
  take(j, "patience", cfg.patience);
  take(j, "seed", cfg.seed);
  reject_unknown(j, "boundary");
  return cfg;
}

json rep_to_json(const RepTrainConfig& cfg) {
  return json{
      {"learning_rate", cfg.learning_rate},
      {"batch_size", cfg.batch_size},
      {"max_epochs", cfg.max_epochs},
      {"seed", cfg.seed},
      {"early_stop_patience", cfg.early_stop_patience},
      {"rep_dim", cfg.rep_dim},
  };
}

json boundary_to_json(const BoundaryTrainConfig& cfg) {
  return json{
      {"learning_rate", cfg.learning_rate},
      {"batch_size", cfg.batch_size},
      {"max_epochs", cfg.max_epochs},
      {"convergence_tol", cfg.convergence_tol},
      {"patience", cfg.patience},
      {"seed", cfg.seed},
  };
}

}  // namespace

RepTrainConfig parse_rep_config(const std::string& config_json) {
  return rep_from_json(parse_object(config_json, "representation"));
}

BoundaryTrainConfig parse_boundary_config(const std::string& config_json) {
  json j = parse_object(config_json, "boundary");
  j.erase("val_calibration");  // accepted alongside training knobs, handled by caller
  return boundary_from_json(j);
}

ExperimentConfig parse_experiment_config(const std::string& config_json) {
  json j = parse_object(config_json, "experiment");
  ExperimentConfig cfg;
  take(j, "known_ratio", cfg.known_ratio);
  take(j, "labeled_ratio", cfg.labeled_ratio);
  take(j, "n_runs", cfg.n_runs);
  take(j, "base_seed", cfg.base_seed);
  take(j, "val_fraction", cfg.val_fraction);
  take(j, "test_fraction", cfg.test_fraction);
  take(j, "msp_threshold", cfg.msp_threshold);
  take(j, "skip_rep", cfg.skip_rep);
  take(j, "val_calibration", cfg.val_calibration);
  take(j, "resample_classes_per_run", cfg.resample_classes_per_run);
  take(j, "parallel", cfg.parallel);
  if (auto it = j.find("method"); it != j.end()) {
    cfg.method = parse_method(it->get<std::string>());
    j.erase(it);
  }
  if (auto it = j.find("rep"); it != j.end()) {
    if (!it->is_object()) throw_argument("experiment config: \"rep\" must be an object");
    cfg.rep = rep_from_json(*it);
    j.erase(it);
  }
  if (auto it = j.find("boundary"); it != j.end()) {
    if (!it->is_object())
      throw_argument("experiment config: \"boundary\" must be an object");
    cfg.boundary = boundary_from_json(*it);
    j.erase(it);
  }
  reject_unknown(j, "experiment");
  return cfg;
}

std::string rep_config_to_json(const RepTrainConfig& cfg) {
  return rep_to_json(cfg).dump(2);
}

std::string boundary_config_to_json(const BoundaryTrainConfig& cfg) {
  return boundary_to_json(cfg).dump(2);
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json j{
      {"known_ratio", cfg.known_ratio},
      {"labeled_ratio", cfg.labeled_ratio},
      {"n_runs", cfg.n_runs},
      {"base_seed", cfg.base_seed},
      {"val_fraction", cfg.val_fraction},
      {"test_fraction", cfg.test_fraction},
      {"method", cfg.method == Method::kAdb ? "adb" : "msp"},
      {"msp_threshold", cfg.msp_threshold},
      {"skip_rep", cfg.skip_rep},
      {"val_calibration", cfg.val_calibration},
      {"resample_classes_per_run", cfg.resample_classes_per_run},
      {"parallel", cfg.parallel},
      {"rep", rep_to_json(cfg.rep)},
      {"boundary", boundary_to_json(cfg.boundary)},
  };
  return j.dump(2);
}

}  // namespace adb
