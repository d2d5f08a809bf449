#ifndef ADB_CORE_EVALUATION_HPP
#define ADB_CORE_EVALUATION_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/boundary.hpp"
#include "core/inference.hpp"
#include "core/representation.hpp"
#include "core/types.hpp"

namespace adb {

// (K+1) x (K+1) counts over known classes plus "open"; row = gold, col = pred,
// with "open" at index K.
struct ConfusionMatrix {
  std::size_t num_known = 0;
  std::vector<std::int64_t> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t k)
      : num_known(k), counts((k + 1) * (k + 1), 0) {}

  std::size_t side() const { return num_known + 1; }
  std::int64_t& at(std::size_t gold, std::size_t pred) {
    return counts[gold * side() + pred];
  }
  std::int64_t at(std::size_t gold, std::size_t pred) const {
    return counts[gold * side() + pred];
  }
  std::int64_t total() const;
};

ConfusionMatrix confusion_matrix(const std::vector<Prediction>& preds,
                                 const std::vector<std::string>& golds,
                                 const LabelMap& labels);

// Accuracy plus per-class and aggregated macro F1. Per-class order is the
// label-map order with "open" last. Ratios with zero denominators are 0.
struct MetricsReport {
  double accuracy = 0.0;
  double f1_all = 0.0;    // macro F1 over K+1 classes
  double f1_known = 0.0;  // macro F1 over the K known classes
  double f1_open = 0.0;
  std::vector<double> per_class_f1;
  std::vector<double> per_class_precision;
  std::vector<double> per_class_recall;
  ConfusionMatrix cm;
};

MetricsReport compute_metrics(const ConfusionMatrix& cm);

enum class Method { kAdb, kMsp };

Method parse_method(const std::string& name);

struct ExperimentConfig {
  double known_ratio = 0.5;
  double labeled_ratio = 1.0;
  int n_runs = 10;
  std::uint64_t base_seed = 0;
  double val_fraction = 0.1;
  double test_fraction = 0.2;
  Method method = Method::kAdb;
  double msp_threshold = 0.5;
  bool skip_rep = false;        // train boundaries on raw vectors
  bool val_calibration = true;  // cover validation points after boundary training
  // Resample the known-class subset every run (seed = base_seed + run); when
  // false all runs share the base_seed split and vary only training noise.
  bool resample_classes_per_run = true;
  int parallel = 1;
  RepTrainConfig rep;
  BoundaryTrainConfig boundary;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t num_known = 0;
  MetricsReport metrics;
};

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

struct ExperimentReport {
  std::vector<RunResult> runs;
  MetricStats accuracy;
  MetricStats f1_all;
  MetricStats f1_known;
  MetricStats f1_open;
};

/// The full protocol, one run per seed base_seed + r: split, subsample, train
/// the representation, freeze, compute centroids, train boundaries (ADB) or
/// reuse the softmax head (MSP), classify the test set, compute metrics.
/// Deterministic given the config; runs may execute in parallel with identical
/// results. A failing run aborts with its index in the message.
ExperimentReport run_experiment(const EmbeddedDataset& dataset,
                                const ExperimentConfig& cfg);

/// Re-evaluates the model on the test set with radii scaled by each ratio;
/// the model itself is untouched and ratio 1 reproduces plain evaluation
/// bit-exactly.
std::vector<std::pair<double, MetricsReport>> boundary_ratio_sweep(
    const AdbModel& model, const EmbeddedDataset& test, std::span<const double> ratios);

/// run_experiment per labeled ratio, everything else fixed.
std::vector<std::pair<double, ExperimentReport>> labeled_ratio_sweep(
    const EmbeddedDataset& dataset, const ExperimentConfig& cfg,
    std::span<const double> ratios);

// Serialization for the report files and prediction exports.
std::string metrics_json(const MetricsReport& m, const LabelMap& labels);
std::string predictions_csv(const std::vector<Prediction>& preds,
                            const std::vector<std::string>& golds);
std::string experiment_report_json(const ExperimentReport& rep,
                                   const ExperimentConfig& cfg);
std::string experiment_report_csv(const ExperimentReport& rep);
std::string boundary_sweep_csv(
    const std::vector<std::pair<double, MetricsReport>>& rows);
std::string labeled_sweep_csv(
    const std::vector<std::pair<double, ExperimentReport>>& rows);

}  // namespace adb

#endif  // ADB_CORE_EVALUATION_HPP
