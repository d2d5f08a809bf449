#include <doctest.h>

#include <cmath>

#include "core/data_io.hpp"
#include "core/evaluation.hpp"
#include "core/rng.hpp"
#include "test_util.hpp"

using namespace adb;
using adbtest::make_dataset;

namespace {

Prediction known_pred(const LabelMap& labels, int index) {
  Prediction p;
  p.label_index = index;
  p.label = index < 0 ? "open" : labels.name(static_cast<std::size_t>(index));
  p.nearest_index = std::max(index, 0);
  p.nearest_class = labels.name(static_cast<std::size_t>(p.nearest_index));
  return p;
}

}  // namespace

TEST_CASE("confusion matrix tallies gold/pred pairs") {
  LabelMap labels({"a", "b"});
  std::vector<Prediction> preds{known_pred(labels, 0), known_pred(labels, 1),
                                known_pred(labels, -1)};
  std::vector<std::string> golds{"a", "a", "open"};
  ConfusionMatrix cm = confusion_matrix(preds, golds, labels);
  CHECK(cm.at(0, 0) == 1);
  CHECK(cm.at(0, 1) == 1);
  CHECK(cm.at(2, 2) == 1);
  CHECK(cm.total() == 3);

  ConfusionMatrix empty = confusion_matrix({}, {}, labels);
  CHECK(empty.total() == 0);

  CHECK_THROWS_AS(confusion_matrix(preds, {"a", "a"}, labels), Error);
  CHECK_THROWS_AS(confusion_matrix(preds, {"a", "zz", "open"}, labels), Error);
}

TEST_CASE("perfect predictions score 1.0 everywhere") {
  LabelMap labels({"a", "b"});
  std::vector<Prediction> preds{known_pred(labels, 0), known_pred(labels, 1),
                                known_pred(labels, -1)};
  std::vector<std::string> golds{"a", "b", "open"};
  MetricsReport m = compute_metrics(confusion_matrix(preds, golds, labels));
  CHECK(m.accuracy == 1.0);
  CHECK(m.f1_all == 1.0);
  CHECK(m.f1_known == 1.0);
  CHECK(m.f1_open == 1.0);
}

TEST_CASE("hand-verified two-class matrix gives 0.8 exactly") {
  // gold a -> (pred a: 8, pred open: 2); gold open -> (pred a: 2, pred open: 8)
  ConfusionMatrix cm(1);
  cm.at(0, 0) = 8;
  cm.at(0, 1) = 2;
  cm.at(1, 0) = 2;
  cm.at(1, 1) = 8;
  MetricsReport m = compute_metrics(cm);
  CHECK(m.accuracy == 0.8);
  CHECK(m.per_class_f1[0] == 0.8);
  CHECK(m.per_class_f1[1] == 0.8);
  CHECK(m.f1_all == 0.8);
  CHECK(m.f1_open == 0.8);
  CHECK(m.f1_known == 0.8);
}

TEST_CASE("zero-denominator classes score zero") {
  ConfusionMatrix cm(2);  // class b never gold, never predicted
  cm.at(0, 0) = 5;
  cm.at(2, 2) = 5;
  MetricsReport m = compute_metrics(cm);
  CHECK(m.per_class_f1[1] == 0.0);
  CHECK(m.per_class_precision[1] == 0.0);
  CHECK(m.per_class_recall[1] == 0.0);
  CHECK(m.f1_all == doctest::Approx((1.0 + 0.0 + 1.0) / 3.0));
  CHECK_THROWS_AS(compute_metrics(ConfusionMatrix(2)), Error);
}

TEST_CASE("metric identities on random confusion matrices") {
  Rng rng(83);
  for (int trial = 0; trial < 25; ++trial) {
    std::size_t k = 1 + rng.below(5);
    ConfusionMatrix cm(k);
    for (auto& c : cm.counts) c = static_cast<std::int64_t>(rng.below(9));
    if (cm.total() == 0) cm.at(0, 0) = 1;
    MetricsReport m = compute_metrics(cm);
    std::int64_t trace = 0;
    for (std::size_t c = 0; c <= k; ++c) trace += cm.at(c, c);
    CHECK(m.accuracy == static_cast<double>(trace) / static_cast<double>(cm.total()));
    double sum = 0.0;
    for (double f : m.per_class_f1) {
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
      sum += f;
    }
    CHECK(m.f1_all == doctest::Approx(sum / static_cast<double>(k + 1)).epsilon(1e-12));
  }
}

namespace {

EmbeddedDataset blobs(std::uint64_t seed) {
  return generate_synthetic(6, 24, 4, 20.0, 1.0, seed);
}

ExperimentConfig fast_config() {
  ExperimentConfig cfg;
  cfg.n_runs = 2;
  cfg.base_seed = 5;
  cfg.known_ratio = 0.5;
  cfg.rep.max_epochs = 8;
  cfg.rep.batch_size = 32;
  cfg.boundary.max_epochs = 60;
  cfg.boundary.batch_size = 32;
  return cfg;
}

}  // namespace

TEST_CASE("run_experiment with one run reports that run's metrics") {
  ExperimentConfig cfg = fast_config();
  cfg.n_runs = 1;
  ExperimentReport rep = run_experiment(blobs(1), cfg);
  REQUIRE(rep.runs.size() == 1);
  CHECK(rep.accuracy.mean == rep.runs[0].metrics.accuracy);
  CHECK(rep.accuracy.stddev == 0.0);
  CHECK(rep.runs[0].seed == cfg.base_seed);
}

TEST_CASE("run_experiment is deterministic, also under parallel execution") {
  ExperimentConfig cfg = fast_config();
  ExperimentReport a = run_experiment(blobs(2), cfg);
  ExperimentReport b = run_experiment(blobs(2), cfg);
  cfg.parallel = 2;
  ExperimentReport c = run_experiment(blobs(2), cfg);
  REQUIRE(a.runs.size() == b.runs.size());
  for (std::size_t r = 0; r < a.runs.size(); ++r) {
    CHECK(a.runs[r].metrics.accuracy == b.runs[r].metrics.accuracy);
    CHECK(a.runs[r].metrics.f1_all == c.runs[r].metrics.f1_all);
    CHECK(a.runs[r].metrics.f1_open == c.runs[r].metrics.f1_open);
  }
  CHECK(a.accuracy.mean == c.accuracy.mean);
}

TEST_CASE("aggregate means equal arithmetic means of runs") {
  ExperimentConfig cfg = fast_config();
  cfg.n_runs = 3;
  ExperimentReport rep = run_experiment(blobs(3), cfg);
  double acc = 0.0, f1o = 0.0;
  for (const auto& run : rep.runs) {
    acc += run.metrics.accuracy;
    f1o += run.metrics.f1_open;
  }
  CHECK(rep.accuracy.mean == doctest::Approx(acc / 3.0).epsilon(1e-12));
  CHECK(rep.f1_open.mean == doctest::Approx(f1o / 3.0).epsilon(1e-12));
}

TEST_CASE("msp method runs the same protocol") {
  ExperimentConfig cfg = fast_config();
  cfg.method = Method::kMsp;
  cfg.n_runs = 1;
  ExperimentReport rep = run_experiment(blobs(4), cfg);
  CHECK(rep.runs[0].metrics.accuracy >= 0.0);
  CHECK(rep.runs[0].metrics.accuracy <= 1.0);
}

TEST_CASE("experiment config validation") {
  ExperimentConfig cfg = fast_config();
  cfg.n_runs = 0;
  CHECK_THROWS_AS(run_experiment(blobs(5), cfg), Error);
  cfg = fast_config();
  cfg.labeled_ratio = 1.5;
  CHECK_THROWS_AS(run_experiment(blobs(5), cfg), Error);
}

namespace {

struct TrainedOnBlobs {
  AdbModel model;
  EmbeddedDataset test;

  explicit TrainedOnBlobs(std::uint64_t seed) {
    EmbeddedDataset ds = blobs(seed);
    SplitResult split = make_known_open_split(ds, 0.5, seed, 0.1, 0.2);
    Centroids cents = compute_centroids(split.train);
    BoundaryTrainConfig cfg;
    cfg.seed = seed;
    cfg.batch_size = 32;
    model = train_boundaries(split.train, cents, cfg).model;
    calibrate_radii(model, split.validation);
    test = split.test;
  }
};

}  // namespace

TEST_CASE("boundary sweep at ratio 1 reproduces direct evaluation bit-exactly") {
  TrainedOnBlobs t(9);
  std::vector<double> ratios{1.0};
  auto rows = boundary_ratio_sweep(t.model, t.test, ratios);
  auto preds = classify_batch(t.model, t.test);
  std::vector<std::string> golds;
  for (const auto& r : t.test.records) golds.push_back(r.label);
  MetricsReport direct =
      compute_metrics(confusion_matrix(preds, golds, t.model.label_map));
  CHECK(rows[0].second.accuracy == direct.accuracy);
  CHECK(rows[0].second.f1_all == direct.f1_all);
  CHECK(rows[0].second.f1_open == direct.f1_open);
  CHECK(rows[0].second.cm.counts == direct.cm.counts);
}

TEST_CASE("boundary sweep limits: tiny and huge ratios") {
  TrainedOnBlobs t(10);
  std::size_t open_gold = 0;
  for (const auto& r : t.test.records)
    if (is_open_label(r.label)) ++open_gold;

  std::vector<double> ratios{1e-9, 1e6};
  auto rows = boundary_ratio_sweep(t.model, t.test, ratios);
  // everything rejected: accuracy equals the open share
  CHECK(rows[0].second.accuracy ==
        doctest::Approx(static_cast<double>(open_gold) /
                        static_cast<double>(t.test.size())));
  CHECK(rows[0].second.per_class_recall.back() == 1.0);
  // nothing rejected: open recall 0
  CHECK(rows[1].second.per_class_recall.back() == 0.0);

  std::vector<double> bad{-1.0};
  CHECK_THROWS_AS(boundary_ratio_sweep(t.model, t.test, bad), Error);
}

TEST_CASE("open recall never increases along growing ratios") {
  TrainedOnBlobs t(11);
  std::vector<double> ratios{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0};
  auto rows = boundary_ratio_sweep(t.model, t.test, ratios);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].second.per_class_recall.back() <=
          rows[i - 1].second.per_class_recall.back());
}

TEST_CASE("labeled sweep: one report per ratio, sizes non-decreasing") {
  ExperimentConfig cfg = fast_config();
  cfg.n_runs = 1;
  std::vector<double> ratios{0.2, 0.6, 1.0};
  auto rows = labeled_ratio_sweep(blobs(12), cfg, ratios);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].second.runs[0].train_size >= rows[i - 1].second.runs[0].train_size);

  std::vector<double> bad{0.0};
  CHECK_THROWS_AS(labeled_ratio_sweep(blobs(12), cfg, bad), Error);
}

TEST_CASE("serializers emit the documented headers") {
  TrainedOnBlobs t(13);
  auto preds = classify_batch(t.model, t.test);
  std::vector<std::string> golds;
  for (const auto& r : t.test.records) golds.push_back(r.label);
  CHECK(predictions_csv(preds, golds).rfind("index,gold,pred,nearest,distance,margin\n",
                                            0) == 0);
  MetricsReport m =
      compute_metrics(confusion_matrix(preds, golds, t.model.label_map));
  std::string mj = metrics_json(m, t.model.label_map);
  CHECK(mj.find("\"accuracy\"") != std::string::npos);
  CHECK(mj.find("\"confusion_matrix\"") != std::string::npos);

  ExperimentConfig cfg = fast_config();
  cfg.n_runs = 2;
  ExperimentReport rep = run_experiment(blobs(13), cfg);
  CHECK(experiment_report_csv(rep).rfind("run,accuracy,f1_all,f1_known,f1_open\n", 0) ==
        0);
  std::string rj = experiment_report_json(rep, cfg);
  CHECK(rj.find("\"aggregate\"") != std::string::npos);
  CHECK(rj.find("\"runs\"") != std::string::npos);

  std::vector<double> ratios{0.5, 1.0};
  auto rows = boundary_ratio_sweep(t.model, t.test, ratios);
  CHECK(boundary_sweep_csv(rows).rfind(
            "ratio,accuracy,f1_all,f1_known,f1_open,open_recall\n", 0) == 0);
}
