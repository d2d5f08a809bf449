#include "core/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace adb {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<int> resolve_labels(const EmbeddedDataset& data, const LabelMap& labels) {
  std::vector<int> out;
  out.reserve(data.size());
  for (const auto& rec : data.records) {
    int idx = labels.index_of(rec.label);
    if (idx < 0)
      throw_argument("unknown label \"" + rec.label + "\" in boundary batch");
    out.push_back(idx);
  }
  return out;
}

void check_batch(const EmbeddedDataset& data, std::span<const std::size_t> indices,
                 const Centroids& centroids) {
  if (indices.empty()) throw_argument("empty batch");
  if (data.dim != centroids.dim())
    throw_argument("batch dimension " + std::to_string(data.dim) +
                   " does not match centroid dimension " +
                   std::to_string(centroids.dim()));
}

// Inside/outside tallies per class for one batch; the only inputs the
// boundary gradient needs.
struct ClassTally {
  std::vector<std::int64_t> inside;
  std::vector<std::int64_t> outside;
};

ClassTally tally(const EmbeddedDataset& data, std::span<const std::size_t> indices,
                 const Centroids& centroids, const std::vector<double>& radii) {
  ClassTally t;
  const std::size_t k = centroids.num_classes();
  t.inside.assign(k, 0);
  t.outside.assign(k, 0);
  for (std::size_t i : indices) {
    const auto& rec = data.records[i];
    int label = data.label_map.index_of(rec.label);
    if (label < 0)
      throw_argument("unknown label \"" + rec.label + "\" in boundary batch");
    std::span<const double> c(centroids.c.row(static_cast<std::size_t>(label)),
                              centroids.dim());
    double d = euclidean_distance(rec.vec, c);
    if (d > radii[static_cast<std::size_t>(label)])
      ++t.outside[static_cast<std::size_t>(label)];
    else
      ++t.inside[static_cast<std::size_t>(label)];  // ties count as inside
  }
  return t;
}

// Trainer fast path over precomputed labels and frozen distances.
ClassTally tally_batch(const std::vector<std::size_t>& order, std::size_t begin,
                       std::size_t end, const std::vector<int>& labels,
                       const std::vector<double>& dist,
                       const std::vector<double>& radii) {
  ClassTally t;
  t.inside.assign(radii.size(), 0);
  t.outside.assign(radii.size(), 0);
  for (std::size_t p = begin; p < end; ++p) {
    std::size_t i = order[p];
    auto c = static_cast<std::size_t>(labels[i]);
    if (dist[i] > radii[c])
      ++t.outside[c];
    else
      ++t.inside[c];
  }
  return t;
}

void validate_config(const BoundaryTrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw_argument("learning_rate must be > 0");
  if (cfg.batch_size < 1) throw_argument("batch_size must be >= 1");
  if (cfg.max_epochs < 1) throw_argument("max_epochs must be >= 1");
  if (!(cfg.convergence_tol > 0.0)) throw_argument("convergence_tol must be > 0");
  if (cfg.patience < 1) throw_argument("patience must be >= 1");
}

}  // namespace

double softplus(double x) {
  if (!std::isfinite(x)) throw_argument("softplus: non-finite input");
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double inverse_softplus(double target) {
  if (!(target > 0.0) || !std::isfinite(target))
    throw_argument("inverse_softplus: target must be positive and finite");
  // log(exp(y) - 1) = y + log1p(-exp(-y)), then nudge so softplus covers target.
  double x = target + std::log1p(-std::exp(-target));
  while (softplus(x) < target) x = std::nextafter(x, target + 1.0);
  return x;
}

Centroids compute_centroids(const EmbeddedDataset& train) {
  const std::size_t k = train.label_map.size();
  if (k == 0) throw_argument("compute_centroids: no known classes");
  Centroids out;
  out.c = Matrix(k, train.dim);
  out.counts.assign(k, 0);
  for (const auto& rec : train.records) {
    int label = train.label_map.index_of(rec.label);
    if (label < 0)
      throw_argument("unknown label \"" + rec.label + "\" in training set");
    auto row = static_cast<std::size_t>(label);
    ++out.counts[row];
    for (std::size_t d = 0; d < train.dim; ++d) out.c(row, d) += rec.vec[d];
  }
  for (std::size_t row = 0; row < k; ++row) {
    if (out.counts[row] == 0)
      throw Error(ErrorCode::kInsufficientData,
                  "class \"" + train.label_map.name(row) + "\" has no records");
    for (std::size_t d = 0; d < train.dim; ++d)
      out.c(row, d) /= static_cast<double>(out.counts[row]);
  }
  return out;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw_argument("euclidean_distance: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

double boundary_loss(const EmbeddedDataset& data, std::span<const std::size_t> indices,
                     const Centroids& centroids, const BoundaryParams& params) {
  check_batch(data, indices, centroids);
  std::vector<double> radii(params.delta_hat.size());
  for (std::size_t i = 0; i < radii.size(); ++i) radii[i] = softplus(params.delta_hat[i]);

  double sum = 0.0;
  for (std::size_t i : indices) {
    const auto& rec = data.records[i];
    int label = data.label_map.index_of(rec.label);
    if (label < 0)
      throw_argument("unknown label \"" + rec.label + "\" in boundary batch");
    auto row = static_cast<std::size_t>(label);
    std::span<const double> c(centroids.c.row(row), centroids.dim());
    double d = euclidean_distance(rec.vec, c);
    double r = radii[row];
    // two-branch form of the loss; equals |d - r|
    sum += d > r ? (d - r) : (r - d);
  }
  return sum / static_cast<double>(indices.size());
}

ClassGradients boundary_gradient(const EmbeddedDataset& data,
                                 std::span<const std::size_t> indices,
                                 const Centroids& centroids,
                                 const BoundaryParams& params) {
  check_batch(data, indices, centroids);
  const std::size_t k = centroids.num_classes();
  if (params.delta_hat.size() != k)
    throw_argument("boundary_gradient: parameter count does not match classes");

  std::vector<double> radii(k);
  for (std::size_t i = 0; i < k; ++i) radii[i] = softplus(params.delta_hat[i]);
  ClassTally t = tally(data, indices, centroids, radii);

  ClassGradients g;
  g.grad.assign(k, 0.0);
  g.present.assign(k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    std::int64_t n = t.inside[c] + t.outside[c];
    if (n == 0) continue;  // class absent: no update
    g.present[c] = 1;
    // (-1)^delta: +1 inside, -1 outside; normalized by the class batch count
    double mean_sign =
        static_cast<double>(t.inside[c] - t.outside[c]) / static_cast<double>(n);
    g.grad[c] = mean_sign * sigmoid(params.delta_hat[c]);
  }
  return g;
}

ClassGradients finite_difference_loss_gradient(const EmbeddedDataset& data,
                                               std::span<const std::size_t> indices,
                                               const Centroids& centroids,
                                               const BoundaryParams& params,
                                               double h) {
  if (!(h > 0.0 && h <= 1e-3))
    throw_argument("finite_difference_loss_gradient: h must lie in (0, 1e-3]");
  check_batch(data, indices, centroids);
  const std::size_t k = centroids.num_classes();

  // per-class-normalized loss: mean |d_i - softplus(dh_c)| over class-c samples
  std::vector<std::vector<double>> dists(k);
  for (std::size_t i : indices) {
    const auto& rec = data.records[i];
    int label = data.label_map.index_of(rec.label);
    if (label < 0)
      throw_argument("unknown label \"" + rec.label + "\" in boundary batch");
    auto row = static_cast<std::size_t>(label);
    std::span<const double> c(centroids.c.row(row), centroids.dim());
    dists[row].push_back(euclidean_distance(rec.vec, c));
  }

  ClassGradients g;
  g.grad.assign(k, 0.0);
  g.present.assign(k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    if (dists[c].empty()) continue;
    g.present[c] = 1;
    auto class_loss = [&](double dh) {
      double r = softplus(dh);
      double sum = 0.0;
      for (double d : dists[c]) sum += std::abs(d - r);
      return sum / static_cast<double>(dists[c].size());
    };
    g.grad[c] =
        (class_loss(params.delta_hat[c] + h) - class_loss(params.delta_hat[c] - h)) /
        (2.0 * h);
  }
  return g;
}

void adam_step(BoundaryParams& params, const ClassGradients& grads, AdamState& state,
               double learning_rate) {
  const std::size_t k = params.delta_hat.size();
  if (grads.grad.size() != k || grads.present.size() != k || state.m.size() != k)
    throw_argument("adam_step: dimension mismatch");
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (std::size_t c = 0; c < k; ++c) {
    if (!grads.present[c]) continue;  // skipped entirely: no moment decay
    ++state.t[c];
    const double g = grads.grad[c];
    state.m[c] = b1 * state.m[c] + (1.0 - b1) * g;
    state.v[c] = b2 * state.v[c] + (1.0 - b2) * g * g;
    const double mhat = state.m[c] / (1.0 - std::pow(b1, static_cast<double>(state.t[c])));
    const double vhat = state.v[c] / (1.0 - std::pow(b2, static_cast<double>(state.t[c])));
    params.delta_hat[c] -= learning_rate * mhat / (std::sqrt(vhat) + eps);
  }
}

BoundaryTrainResult train_boundaries(const EmbeddedDataset& train,
                                     const Centroids& centroids,
                                     const BoundaryTrainConfig& cfg) {
  validate_config(cfg);
  if (train.empty()) throw_argument("train_boundaries: empty training set");
  if (train.dim != centroids.dim())
    throw_argument("train_boundaries: feature dimension " + std::to_string(train.dim) +
                   " does not match centroid dimension " +
                   std::to_string(centroids.dim()));
  const std::size_t k = centroids.num_classes();
  if (train.label_map.size() != k)
    throw_argument("train_boundaries: label map does not match centroid count");

  std::vector<int> labels = resolve_labels(train, train.label_map);
  // Features are frozen, so own-centroid distances never change.
  std::vector<double> dist(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    auto row = static_cast<std::size_t>(labels[i]);
    std::span<const double> c(centroids.c.row(row), centroids.dim());
    dist[i] = euclidean_distance(train.records[i].vec, c);
  }

  Rng rng(cfg.seed);
  BoundaryParams params;
  params.delta_hat.resize(k);
  for (std::size_t c = 0; c < k; ++c) params.delta_hat[c] = rng.normal();

  AdamState adam(k);
  auto radii_of = [&](const BoundaryParams& p) {
    std::vector<double> r(k);
    for (std::size_t c = 0; c < k; ++c) r[c] = softplus(p.delta_hat[c]);
    return r;
  };
  auto full_loss = [&](const std::vector<double>& radii) {
    double sum = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i)
      sum += std::abs(dist[i] - radii[static_cast<std::size_t>(labels[i])]);
    return sum / static_cast<double>(train.size());
  };
  auto mean_of = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };

  BoundaryTrainResult result;
  std::vector<double> radii = radii_of(params);
  result.curve.push_back({0, mean_of(radii), full_loss(radii)});

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

  // Movement bookkeeping for the phase switch: a class has reached its balance
  // point once the dominant direction of its within-epoch steps reverses.
  std::vector<int> prev_dir(k, 0);
  std::vector<std::uint8_t> reversed(k, 0);
  bool finishing = false;
  std::vector<double> finish_step(k, cfg.learning_rate);
  std::vector<int> finish_dir(k, 0);

  std::vector<double> prev_radii = radii;
  int streak = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    result.epochs_run = epoch;
    if (!finishing) {
      rng.shuffle(order);
      std::vector<int> up(k, 0), down(k, 0);
      for (std::size_t s = 0; s < order.size(); s += batch) {
        std::size_t e = std::min(s + batch, order.size());
        radii = radii_of(params);
        ClassTally t = tally_batch(order, s, e, labels, dist, radii);
        ClassGradients g;
        g.grad.assign(k, 0.0);
        g.present.assign(k, 0);
        for (std::size_t c = 0; c < k; ++c) {
          std::int64_t n = t.inside[c] + t.outside[c];
          if (n == 0) continue;
          g.present[c] = 1;
          g.grad[c] = static_cast<double>(t.inside[c] - t.outside[c]) /
                      static_cast<double>(n) * sigmoid(params.delta_hat[c]);
        }
        std::vector<double> before = params.delta_hat;
        adam_step(params, g, adam, cfg.learning_rate);
        for (std::size_t c = 0; c < k; ++c) {
          if (!g.present[c]) continue;
          double move = params.delta_hat[c] - before[c];
          if (move > 0.0) ++up[c];
          if (move < 0.0) ++down[c];
        }
      }
      for (std::size_t c = 0; c < k; ++c) {
        int dir = up[c] > down[c] ? 1 : (down[c] > up[c] ? -1 : 0);
        if (dir != 0) {
          if (prev_dir[c] != 0 && dir != prev_dir[c]) reversed[c] = 1;
          prev_dir[c] = dir;
        }
      }
      if (std::all_of(reversed.begin(), reversed.end(),
                      [](std::uint8_t r) { return r != 0; })) {
        finishing = true;
      }
    } else {
      // Full-batch fixed-point finish: step toward the balance point, halve
      // the step on every direction reversal. Collapses onto the per-class
      // distance median.
      radii = radii_of(params);
      std::vector<std::int64_t> inside(k, 0), outside(k, 0);
      for (std::size_t i = 0; i < train.size(); ++i) {
        auto c = static_cast<std::size_t>(labels[i]);
        if (dist[i] > radii[c])
          ++outside[c];
        else
          ++inside[c];
      }
      for (std::size_t c = 0; c < k; ++c) {
        std::int64_t s = outside[c] - inside[c];
        int dir = s > 0 ? 1 : (s < 0 ? -1 : 0);  // grow when more samples outside
        if (dir == 0) continue;
        if (finish_dir[c] != 0 && dir != finish_dir[c]) finish_step[c] *= 0.5;
        finish_dir[c] = dir;
        params.delta_hat[c] += dir * finish_step[c];
      }
    }

    radii = radii_of(params);
    result.curve.push_back({epoch, mean_of(radii), full_loss(radii)});
    double change = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      change = std::max(change, std::abs(radii[c] - prev_radii[c]));
    prev_radii = radii;
    if (change < cfg.convergence_tol) {
      if (++streak >= cfg.patience) {
        result.converged = true;
        break;
      }
    } else {
      streak = 0;
    }
  }

  result.model.centroids = centroids.c;
  result.model.params = params;
  result.model.radii = radii_of(params);
  result.model.label_map = train.label_map;
  result.model.dim = train.dim;
  result.model.config = cfg;
  return result;
}

void calibrate_radii(AdbModel& model, const EmbeddedDataset& validation) {
  if (validation.dim != model.dim)
    throw_argument("calibrate_radii: dimension mismatch");
  std::vector<double> max_dist(model.num_classes(), 0.0);
  for (const auto& rec : validation.records) {
    int label = model.label_map.index_of(rec.label);
    if (label < 0)
      throw_argument("calibrate_radii: validation record with unknown label \"" +
                     rec.label + "\"");
    auto row = static_cast<std::size_t>(label);
    std::span<const double> c(model.centroids.row(row), model.dim);
    max_dist[row] = std::max(max_dist[row], euclidean_distance(rec.vec, c));
  }
  for (std::size_t c = 0; c < model.num_classes(); ++c) {
    if (max_dist[c] > model.radii[c]) {
      model.params.delta_hat[c] = inverse_softplus(max_dist[c]);
      model.radii[c] = softplus(model.params.delta_hat[c]);
    }
  }
  model.calibrated = true;
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out << "epoch,mean_radius,loss\n";
  for (const auto& p : curve)
    out << p.epoch << ',' << format_double(p.mean_radius) << ','
        << format_double(p.loss) << "\n";
  return out.str();
}

}  // namespace adb
