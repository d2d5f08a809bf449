#ifndef ADB_CORE_INFERENCE_HPP
#define ADB_CORE_INFERENCE_HPP

#include <span>
#include <string>
#include <vector>

#include "core/boundary.hpp"
#include "core/types.hpp"

namespace adb {

// One classification outcome. label_index is -1 for "open", else the known
// class index. For ADB predictions distance/margin refer to the nearest
// centroid; for MSP predictions distance is the top softmax probability and
// margin is threshold - distance (positive margin means rejected, as for ADB).
struct Prediction {
  std::string label;
  std::string nearest_class;
  int label_index = -1;
  int nearest_index = -1;
  double distance = 0.0;
  double margin = 0.0;
};

/// Open classification: rejected as "open" only if d_k > ratio*radius_k for
/// every class (strict, so boundary points stay known); otherwise the class
/// with the smallest distance, ties broken by lowest index. `boundary_ratio`
/// scales every radius and is 1 for plain evaluation.
Prediction classify(const AdbModel& model, std::span<const double> z,
                    double boundary_ratio = 1.0);

/// Element-wise classify in record order.
std::vector<Prediction> classify_batch(const AdbModel& model,
                                       const EmbeddedDataset& data,
                                       double boundary_ratio = 1.0);

/// Maximum-softmax-probability baseline: rejects when max prob < threshold
/// (strict, so a max exactly at the threshold stays known); argmax ties break
/// toward the lowest index.
Prediction msp_classify(std::span<const double> probs, double threshold,
                        const LabelMap& labels);

}  // namespace adb

#endif  // ADB_CORE_INFERENCE_HPP
