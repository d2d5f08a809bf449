#ifndef ADB_CORE_DATA_IO_HPP
#define ADB_CORE_DATA_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "core/boundary.hpp"
#include "core/representation.hpp"
#include "core/types.hpp"

namespace adb {

enum class DatasetFormat { kCsv, kJsonl };

// "csv" or "jsonl"; anything else is an argument error.
DatasetFormat parse_dataset_format(const std::string& name);

// Guess the format from the file extension; defaults to CSV.
DatasetFormat detect_dataset_format(const std::string& path);

/// Loads labeled vectors from a CSV (`label,f0,...`) or JSONL file. JSONL rows
/// may carry either a "vector" or a "tokens" field; token sequences are
/// mean-pooled at load time so downstream code only ever sees vectors. The
/// label map lists distinct non-"open" labels in first-appearance order.
EmbeddedDataset load_dataset(const std::string& path, DatasetFormat format);

void save_dataset_csv(const EmbeddedDataset& ds, const std::string& path);

/// Component-wise arithmetic mean of a non-empty, uniform-dimension sequence.
std::vector<double> mean_pool(const std::vector<std::vector<double>>& tokens);

// Known/open partition of a dataset. Train and validation hold only known
// classes; test holds the known classes' test share plus every record of the
// excluded classes relabeled "open".
struct SplitResult {
  EmbeddedDataset train;
  EmbeddedDataset validation;
  EmbeddedDataset test;
  std::vector<std::string> known_classes;  // sorted
  double known_ratio = 1.0;
  double val_fraction = 0.1;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

/// Selects round(K*known_ratio) known classes (minimum 1) uniformly at random
/// under `seed`, sampling over class names sorted lexicographically so the
/// choice is stable across ingestion orders. Each known class is split into
/// train/validation/test by the given fractions (at least one record each);
/// excluded classes contribute all their records to test as "open".
SplitResult make_known_open_split(const EmbeddedDataset& ds, double known_ratio,
                                  std::uint64_t seed, double val_fraction,
                                  double test_fraction);

/// Per class keeps round(n_k * labeled_ratio) records (minimum 1, half-up),
/// chosen uniformly under `seed`; record order is preserved.
EmbeddedDataset subsample_labeled(const EmbeddedDataset& ds, double labeled_ratio,
                                  std::uint64_t seed);

/// Gaussian blobs: class centroids uniform in [-centroid_scale, centroid_scale]^dim,
/// per_class points per class with isotropic noise_sigma noise.
EmbeddedDataset generate_synthetic(int n_classes, int per_class, int dim,
                                   double centroid_scale, double noise_sigma,
                                   std::uint64_t seed);

std::string split_manifest_json(const SplitResult& split);

// Model persistence. Decimal serialization is shortest-round-trip, so
// load(save(m)) reproduces every parameter bit-exactly.
void save_model(const AdbModel& model, const std::string& path);
AdbModel load_model(const std::string& path);

void save_representation(const RepresentationModel& model, const std::string& path);
RepresentationModel load_representation(const std::string& path);

}  // namespace adb

#endif  // ADB_CORE_DATA_IO_HPP
