#ifndef ADB_CORE_REPRESENTATION_HPP
#define ADB_CORE_REPRESENTATION_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "core/types.hpp"

namespace adb {

struct RepTrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 128;
  int max_epochs = 100;
  std::uint64_t seed = 0;
  int early_stop_patience = 10;
  int rep_dim = 0;  // output dimension; 0 means same as input
};

// Dense layer with rectifier plus a linear softmax classifier:
//   z = relu(w_h x + b_h),  logits = w_phi z + b_phi.
struct RepresentationModel {
  Matrix w_h;                  // out_dim x in_dim
  std::vector<double> b_h;     // out_dim
  Matrix w_phi;                // K x out_dim
  std::vector<double> b_phi;   // K
  LabelMap label_map;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  RepTrainConfig config;

  std::size_t num_classes() const { return label_map.size(); }
};

struct RepForward {
  std::vector<double> z;
  std::vector<double> logits;
  std::vector<double> probs;
};

/// Forward pass; softmax uses max-subtraction so logits up to 1e4 in magnitude
/// stay finite and the probabilities sum to 1 within 1e-12.
RepForward rep_forward(const RepresentationModel& model, std::span<const double> x);

/// -log(probs[label]), with the probability clamped at 1e-12 before the log.
double cross_entropy(std::span<const double> probs, std::size_t label_index);

// Mean cross-entropy loss and its gradients on a batch; the test suites check
// these against central finite differences.
struct RepGradients {
  Matrix dw_h;
  std::vector<double> db_h;
  Matrix dw_phi;
  std::vector<double> db_phi;
  double loss = 0.0;
};

RepGradients rep_loss_gradients(const RepresentationModel& model,
                                const EmbeddedDataset& data,
                                std::span<const std::size_t> indices);

/// Adam training of the head on mean cross-entropy over seeded shuffled
/// batches. Weights start uniform in [-a, a] with a = sqrt(6/(fan_in+fan_out)),
/// biases at zero. Returns the parameters with the best validation accuracy
/// seen (final parameters when `val` is empty); early-stops after
/// `early_stop_patience` epochs without improvement. Deterministic under seed.
RepresentationModel train_representation(const EmbeddedDataset& train,
                                         const EmbeddedDataset& val,
                                         const RepTrainConfig& cfg);

/// Replaces every record's vector with its hidden representation z.
EmbeddedDataset embed_dataset(const RepresentationModel& model,
                              const EmbeddedDataset& data);

double validation_accuracy(const RepresentationModel& model,
                           const EmbeddedDataset& data);

}  // namespace adb

#endif  // ADB_CORE_REPRESENTATION_HPP
