#include "core/inference.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace adb {

Prediction classify(const AdbModel& model, std::span<const double> z,
                    double boundary_ratio) {
  if (z.size() != model.dim)
    throw_argument("classify: expected dimension " + std::to_string(model.dim) +
                   ", got " + std::to_string(z.size()));
  for (double v : z)
    if (!std::isfinite(v)) throw_argument("classify: non-finite input");
  if (!(boundary_ratio > 0.0)) throw_argument("classify: boundary ratio must be > 0");

  const std::size_t k = model.num_classes();
  std::size_t nearest = 0;
  double nearest_dist = 0.0;
  bool all_outside = true;
  for (std::size_t c = 0; c < k; ++c) {
    std::span<const double> cent(model.centroids.row(c), model.dim);
    double d = euclidean_distance(z, cent);
    if (c == 0 || d < nearest_dist) {
      nearest = c;
      nearest_dist = d;
    }
    if (d <= model.radii[c] * boundary_ratio) all_outside = false;
  }

  Prediction p;
  p.nearest_index = static_cast<int>(nearest);
  p.nearest_class = model.label_map.name(nearest);
  p.distance = nearest_dist;
  p.margin = nearest_dist - model.radii[nearest] * boundary_ratio;
  if (all_outside) {
    p.label = std::string(kOpenLabel);
    p.label_index = -1;
  } else {
    p.label = p.nearest_class;
    p.label_index = p.nearest_index;
  }
  return p;
}

std::vector<Prediction> classify_batch(const AdbModel& model,
                                       const EmbeddedDataset& data,
                                       double boundary_ratio) {
  if (!data.empty() && data.dim != model.dim)
    throw_argument("classify_batch: dataset dimension " + std::to_string(data.dim) +
                   " does not match model dimension " + std::to_string(model.dim));
  std::vector<Prediction> out;
  out.reserve(data.size());
  for (const auto& rec : data.records)
    out.push_back(classify(model, rec.vec, boundary_ratio));
  return out;
}

Prediction msp_classify(std::span<const double> probs, double threshold,
                        const LabelMap& labels) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw_argument("msp_classify: threshold must lie in (0, 1)");
  if (probs.size() != labels.size() || probs.empty())
    throw_argument("msp_classify: probability vector does not match label count");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !(p <= 1.0) || !std::isfinite(p))
      throw_argument("msp_classify: invalid probability distribution");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw_argument("msp_classify: probabilities sum to " + format_double(sum));

  std::size_t argmax = 0;
  for (std::size_t j = 1; j < probs.size(); ++j)
    if (probs[j] > probs[argmax]) argmax = j;

  Prediction p;
  p.nearest_index = static_cast<int>(argmax);
  p.nearest_class = labels.name(argmax);
  p.distance = probs[argmax];
  p.margin = threshold - probs[argmax];
  if (probs[argmax] < threshold) {
    p.label = std::string(kOpenLabel);
    p.label_index = -1;
  } else {
    p.label = p.nearest_class;
    p.label_index = p.nearest_index;
  }
  return p;
}

}  // namespace adb
