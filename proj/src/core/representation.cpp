#include "core/representation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace adb {

namespace {

constexpr double kProbFloor = 1e-12;

void validate_config(const RepTrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw_argument("learning_rate must be > 0");
  if (cfg.batch_size < 1) throw_argument("batch_size must be >= 1");
  if (cfg.max_epochs < 1) throw_argument("max_epochs must be >= 1");
  if (cfg.early_stop_patience < 0) throw_argument("early_stop_patience must be >= 0");
  if (cfg.rep_dim < 0) throw_argument("rep_dim must be >= 0");
}

std::vector<int> resolve_labels(const RepresentationModel& model,
                                const EmbeddedDataset& data) {
  std::vector<int> out;
  out.reserve(data.size());
  for (const auto& rec : data.records) {
    int idx = model.label_map.index_of(rec.label);
    if (idx < 0) throw_argument("unknown label \"" + rec.label + "\"");
    out.push_back(idx);
  }
  return out;
}

// Adam over one flat parameter vector; single shared step counter.
struct TensorAdam {
  std::vector<double> m, v;
  explicit TensorAdam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<double>& p, const std::vector<double>& g, double lr,
            std::int64_t t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
};

}  // namespace

RepForward rep_forward(const RepresentationModel& model, std::span<const double> x) {
  if (x.size() != model.in_dim)
    throw_argument("rep_forward: expected dimension " + std::to_string(model.in_dim) +
                   ", got " + std::to_string(x.size()));
  for (double v : x)
    if (!std::isfinite(v)) throw_argument("rep_forward: non-finite input");

  RepForward out;
  out.z.resize(model.out_dim);
  for (std::size_t u = 0; u < model.out_dim; ++u) {
    double a = model.b_h[u];
    for (std::size_t i = 0; i < model.in_dim; ++i) a += model.w_h(u, i) * x[i];
    out.z[u] = a > 0.0 ? a : 0.0;
  }
  const std::size_t k = model.num_classes();
  out.logits.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    double a = model.b_phi[j];
    for (std::size_t u = 0; u < model.out_dim; ++u) a += model.w_phi(j, u) * out.z[u];
    out.logits[j] = a;
  }
  // stable softmax
  out.probs.resize(k);
  double mx = *std::max_element(out.logits.begin(), out.logits.end());
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    out.probs[j] = std::exp(out.logits[j] - mx);
    sum += out.probs[j];
  }
  for (std::size_t j = 0; j < k; ++j) out.probs[j] /= sum;
  return out;
}

double cross_entropy(std::span<const double> probs, std::size_t label_index) {
  if (label_index >= probs.size())
    throw_argument("cross_entropy: label index out of range");
  return -std::log(std::max(probs[label_index], kProbFloor));
}

RepGradients rep_loss_gradients(const RepresentationModel& model,
                                const EmbeddedDataset& data,
                                std::span<const std::size_t> indices) {
  if (indices.empty()) throw_argument("rep_loss_gradients: empty batch");
  RepGradients g;
  g.dw_h = Matrix(model.out_dim, model.in_dim);
  g.db_h.assign(model.out_dim, 0.0);
  g.dw_phi = Matrix(model.num_classes(), model.out_dim);
  g.db_phi.assign(model.num_classes(), 0.0);

  const double inv_n = 1.0 / static_cast<double>(indices.size());
  std::vector<double> dz(model.out_dim);
  for (std::size_t idx : indices) {
    const auto& rec = data.records[idx];
    int label = model.label_map.index_of(rec.label);
    if (label < 0) throw_argument("unknown label \"" + rec.label + "\"");
    RepForward f = rep_forward(model, rec.vec);
    g.loss += cross_entropy(f.probs, static_cast<std::size_t>(label)) * inv_n;

    // dL/dlogit = (p - onehot)/N
    for (std::size_t j = 0; j < model.num_classes(); ++j) {
      double dl = (f.probs[j] - (static_cast<int>(j) == label ? 1.0 : 0.0)) * inv_n;
      g.db_phi[j] += dl;
      for (std::size_t u = 0; u < model.out_dim; ++u)
        g.dw_phi(j, u) += dl * f.z[u];
    }
    for (std::size_t u = 0; u < model.out_dim; ++u) {
      double acc = 0.0;
      for (std::size_t j = 0; j < model.num_classes(); ++j)
        acc += model.w_phi(j, u) *
               (f.probs[j] - (static_cast<int>(j) == label ? 1.0 : 0.0)) * inv_n;
      dz[u] = f.z[u] > 0.0 ? acc : 0.0;  // rectifier mask
    }
    for (std::size_t u = 0; u < model.out_dim; ++u) {
      g.db_h[u] += dz[u];
      for (std::size_t i = 0; i < model.in_dim; ++i)
        g.dw_h(u, i) += dz[u] * rec.vec[i];
    }
  }
  return g;
}

RepresentationModel train_representation(const EmbeddedDataset& train,
                                         const EmbeddedDataset& val,
                                         const RepTrainConfig& cfg) {
  validate_config(cfg);
  if (train.empty()) throw_argument("train_representation: empty training set");
  const std::size_t k = train.label_map.size();
  if (k == 0) throw_argument("train_representation: no known classes");

  RepresentationModel model;
  model.label_map = train.label_map;
  model.in_dim = train.dim;
  model.out_dim = cfg.rep_dim > 0 ? static_cast<std::size_t>(cfg.rep_dim) : train.dim;
  model.config = cfg;

  Rng rng(cfg.seed);
  auto init_uniform = [&](Matrix& w, std::size_t fan_in, std::size_t fan_out) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w.data) v = rng.uniform(-a, a);
  };
  model.w_h = Matrix(model.out_dim, model.in_dim);
  model.b_h.assign(model.out_dim, 0.0);
  model.w_phi = Matrix(k, model.out_dim);
  model.b_phi.assign(k, 0.0);
  init_uniform(model.w_h, model.in_dim, model.out_dim);
  init_uniform(model.w_phi, model.out_dim, k);

  resolve_labels(model, train);  // fail fast on unknown labels
  if (!val.empty()) resolve_labels(model, val);

  TensorAdam adam_wh(model.w_h.data.size());
  TensorAdam adam_bh(model.b_h.size());
  TensorAdam adam_wphi(model.w_phi.data.size());
  TensorAdam adam_bphi(model.b_phi.size());
  std::int64_t t = 0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  RepresentationModel best = model;
  double best_acc = -1.0;
  int since_improve = 0;
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t s = 0; s < order.size(); s += batch) {
      std::size_t e = std::min(s + batch, order.size());
      std::span<const std::size_t> idx(order.data() + s, e - s);
      RepGradients g = rep_loss_gradients(model, train, idx);
      ++t;
      adam_wh.step(model.w_h.data, g.dw_h.data, cfg.learning_rate, t);
      adam_bh.step(model.b_h, g.db_h, cfg.learning_rate, t);
      adam_wphi.step(model.w_phi.data, g.dw_phi.data, cfg.learning_rate, t);
      adam_bphi.step(model.b_phi, g.db_phi, cfg.learning_rate, t);
    }
    if (val.empty()) continue;
    double acc = validation_accuracy(model, val);
    if (acc > best_acc) {
      best_acc = acc;
      best = model;
      since_improve = 0;
    } else if (++since_improve > cfg.early_stop_patience) {
      break;
    }
  }
  return val.empty() ? model : best;
}

EmbeddedDataset embed_dataset(const RepresentationModel& model,
                              const EmbeddedDataset& data) {
  if (data.dim != model.in_dim)
    throw_argument("embed_dataset: dataset dimension " + std::to_string(data.dim) +
                   " does not match model input dimension " +
                   std::to_string(model.in_dim));
  EmbeddedDataset out;
  out.label_map = data.label_map;
  out.dim = model.out_dim;
  out.records.reserve(data.size());
  for (const auto& rec : data.records) {
    EmbeddingRecord r;
    r.label = rec.label;
    r.vec = rep_forward(model, rec.vec).z;
    out.records.push_back(std::move(r));
  }
  return out;
}

double validation_accuracy(const RepresentationModel& model,
                           const EmbeddedDataset& data) {
  if (data.empty()) throw_argument("validation_accuracy: empty dataset");
  std::size_t correct = 0;
  for (const auto& rec : data.records) {
    int label = model.label_map.index_of(rec.label);
    if (label < 0) throw_argument("unknown label \"" + rec.label + "\"");
    RepForward f = rep_forward(model, rec.vec);
    std::size_t argmax = 0;
    for (std::size_t j = 1; j < f.logits.size(); ++j)
      if (f.logits[j] > f.logits[argmax]) argmax = j;
    if (static_cast<int>(argmax) == label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace adb
