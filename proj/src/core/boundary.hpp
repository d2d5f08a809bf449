#ifndef ADB_CORE_BOUNDARY_HPP
#define ADB_CORE_BOUNDARY_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "core/types.hpp"

namespace adb {

/// Overflow-safe log(1 + exp(x)); strictly positive and increasing.
double softplus(double x);

/// Smallest x whose softplus rounds to a value >= target (target > 0).
double inverse_softplus(double target);

// Per-class mean vectors of the (frozen) training features.
struct Centroids {
  Matrix c;                        // K x D
  std::vector<std::size_t> counts; // records per class

  std::size_t num_classes() const { return c.rows; }
  std::size_t dim() const { return c.cols; }
};

// Unconstrained boundary parameters; radius_k = softplus(delta_hat_k).
struct BoundaryParams {
  std::vector<double> delta_hat;
};

struct BoundaryTrainConfig {
  double learning_rate = 0.05;
  int batch_size = 128;
  int max_epochs = 100;
  double convergence_tol = 1e-4;
  int patience = 5;
  std::uint64_t seed = 0;
};

// Deployable classifier: one ball (centroid + radius) per known class.
// radii[k] is always softplus(params.delta_hat[k]), recomputed rather than
// stored independently.
struct AdbModel {
  Matrix centroids;            // K x D
  BoundaryParams params;
  std::vector<double> radii;
  LabelMap label_map;
  std::size_t dim = 0;
  BoundaryTrainConfig config;
  bool calibrated = false;

  std::size_t num_classes() const { return centroids.rows; }
};

Centroids compute_centroids(const EmbeddedDataset& train);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Mean over the batch of delta_i*(d_i - r_i) + (1-delta_i)*(r_i - d_i) where
/// d_i is the distance to the own-class centroid, r_i the class radius and
/// delta_i = 1 iff d_i > r_i (ties count as inside). Algebraically the mean
/// absolute deviation |d_i - r_i|.
double boundary_loss(const EmbeddedDataset& data, std::span<const std::size_t> indices,
                     const Centroids& centroids, const BoundaryParams& params);

// Per-class gradients for one mini-batch. Classes absent from the batch are
// not updated at all (present[k] == false), never given a zero-gradient step.
struct ClassGradients {
  std::vector<double> grad;
  std::vector<std::uint8_t> present;
};

/// d L / d delta_hat_k = [sum over class-k samples of (-1)^delta_i, divided by
/// the class-k batch count] * sigmoid(delta_hat_k).
ClassGradients boundary_gradient(const EmbeddedDataset& data,
                                 std::span<const std::size_t> indices,
                                 const Centroids& centroids,
                                 const BoundaryParams& params);

/// Central finite differences of the per-class-normalized boundary loss;
/// test oracle for boundary_gradient. h must lie in (0, 1e-3].
ClassGradients finite_difference_loss_gradient(const EmbeddedDataset& data,
                                               std::span<const std::size_t> indices,
                                               const Centroids& centroids,
                                               const BoundaryParams& params, double h);

// Adam with bias correction, applied only to classes present in the batch;
// each class keeps its own step counter.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::vector<std::int64_t> t;

  explicit AdamState(std::size_t k) : m(k, 0.0), v(k, 0.0), t(k, 0) {}
};

void adam_step(BoundaryParams& params, const ClassGradients& grads, AdamState& state,
               double learning_rate);

struct CurvePoint {
  int epoch;
  double mean_radius;
  double loss;
};

struct BoundaryTrainResult {
  AdbModel model;
  std::vector<CurvePoint> curve;  // row 0 is the pre-training state
  int epochs_run = 0;
  bool converged = false;
};

/// Learns one radius per class over frozen features. delta_hat starts from
/// seeded standard normals, then seeded shuffled mini-batches drive
/// boundary_gradient + adam_step at the configured rate. Once every class has
/// reversed its per-epoch movement direction (its radius has crossed the
/// balance point), the loop switches to a full-batch finishing phase that
/// steps each radius by a fixed amount toward its balance point and halves
/// that amount on every direction reversal, pinning the radius at the
/// per-class distance median. Stops when the largest per-class radius change
/// stays below convergence_tol for `patience` consecutive epochs, or at
/// max_epochs.
BoundaryTrainResult train_boundaries(const EmbeddedDataset& train,
                                     const Centroids& centroids,
                                     const BoundaryTrainConfig& cfg);

/// Expands any radius that does not cover every validation point of its class
/// to the smallest value that does (never shrinks). The boundary loss balances
/// inside and outside counts on the training set, which caps known-class
/// coverage near one half; held-out known data supplies the coverage target.
void calibrate_radii(AdbModel& model, const EmbeddedDataset& validation);

std::string curve_csv(const std::vector<CurvePoint>& curve);

}  // namespace adb

#endif  // ADB_CORE_BOUNDARY_HPP
