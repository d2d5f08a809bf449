#include "core/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "core/data_io.hpp"
#include "core/rng.hpp"

namespace adb {

using nlohmann::json;

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ConfusionMatrix confusion_matrix(const std::vector<Prediction>& preds,
                                 const std::vector<std::string>& golds,
                                 const LabelMap& labels) {
  if (preds.size() != golds.size())
    throw_argument("confusion_matrix: " + std::to_string(preds.size()) +
                   " predictions vs " + std::to_string(golds.size()) + " golds");
  const std::size_t k = labels.size();
  ConfusionMatrix cm(k);
  auto to_index = [&](const std::string& name) -> std::size_t {
    if (is_open_label(name)) return k;
    int idx = labels.index_of(name);
    if (idx < 0) throw_argument("confusion_matrix: unknown label \"" + name + "\"");
    return static_cast<std::size_t>(idx);
  };
  for (std::size_t i = 0; i < preds.size(); ++i) {
    std::size_t gold = to_index(golds[i]);
    std::size_t pred = preds[i].label_index < 0
                           ? k
                           : static_cast<std::size_t>(preds[i].label_index);
    if (pred > k) throw_argument("confusion_matrix: prediction index out of range");
    ++cm.at(gold, pred);
  }
  return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total == 0) throw_argument("compute_metrics: empty confusion matrix");
  const std::size_t side = cm.side();

  MetricsReport m;
  m.cm = cm;
  std::int64_t trace = 0;
  for (std::size_t c = 0; c < side; ++c) trace += cm.at(c, c);
  m.accuracy = static_cast<double>(trace) / static_cast<double>(total);

  m.per_class_f1.resize(side);
  m.per_class_precision.resize(side);
  m.per_class_recall.resize(side);
  for (std::size_t c = 0; c < side; ++c) {
    std::int64_t tp = cm.at(c, c);
    std::int64_t row = 0, col = 0;
    for (std::size_t j = 0; j < side; ++j) {
      row += cm.at(c, j);
      col += cm.at(j, c);
    }
    const std::int64_t fp = col - tp;
    const std::int64_t fn = row - tp;
    m.per_class_precision[c] =
        col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    m.per_class_recall[c] =
        row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    // integer form of 2PR/(P+R); exact when counts are exact
    const std::int64_t denom = 2 * tp + fp + fn;
    m.per_class_f1[c] =
        denom > 0 ? 2.0 * static_cast<double>(tp) / static_cast<double>(denom) : 0.0;
  }
  const std::size_t k = cm.num_known;
  m.f1_all = std::accumulate(m.per_class_f1.begin(), m.per_class_f1.end(), 0.0) /
             static_cast<double>(side);
  m.f1_known =
      k > 0 ? std::accumulate(m.per_class_f1.begin(), m.per_class_f1.end() - 1, 0.0) /
                  static_cast<double>(k)
            : 0.0;
  m.f1_open = m.per_class_f1.back();
  return m;
}

Method parse_method(const std::string& name) {
  if (name == "adb") return Method::kAdb;
  if (name == "msp") return Method::kMsp;
  throw_argument("unknown method \"" + name + "\" (expected adb or msp)");
}

namespace {

void validate_experiment_config(const ExperimentConfig& cfg) {
  if (cfg.n_runs < 1) throw_argument("n_runs must be >= 1");
  if (!(cfg.known_ratio > 0.0 && cfg.known_ratio <= 1.0))
    throw_argument("known_ratio must lie in (0, 1]");
  if (!(cfg.labeled_ratio > 0.0 && cfg.labeled_ratio <= 1.0))
    throw_argument("labeled_ratio must lie in (0, 1]");
  if (!(cfg.msp_threshold > 0.0 && cfg.msp_threshold < 1.0))
    throw_argument("msp_threshold must lie in (0, 1)");
  if (cfg.parallel < 1) throw_argument("parallel must be >= 1");
}

std::vector<std::string> gold_labels(const EmbeddedDataset& ds) {
  std::vector<std::string> out;
  out.reserve(ds.size());
  for (const auto& rec : ds.records) out.push_back(rec.label);
  return out;
}

RunResult single_run(const EmbeddedDataset& dataset, const ExperimentConfig& cfg,
                     int run_index) {
  const std::uint64_t run_seed = cfg.base_seed + static_cast<std::uint64_t>(run_index);
  const std::uint64_t split_seed =
      cfg.resample_classes_per_run ? run_seed : cfg.base_seed;

  SplitResult split = make_known_open_split(dataset, cfg.known_ratio, split_seed,
                                            cfg.val_fraction, cfg.test_fraction);
  EmbeddedDataset train = subsample_labeled(split.train, cfg.labeled_ratio,
                                            derive_seed(run_seed, kSubsampleSalt));

  RunResult run;
  run.seed = run_seed;
  run.train_size = train.size();
  run.test_size = split.test.size();
  run.num_known = split.known_classes.size();

  std::vector<Prediction> preds;
  if (cfg.method == Method::kMsp) {
    RepTrainConfig rep_cfg = cfg.rep;
    rep_cfg.seed = derive_seed(run_seed, kRepSalt);
    RepresentationModel rep = train_representation(train, split.validation, rep_cfg);
    preds.reserve(split.test.size());
    for (const auto& rec : split.test.records) {
      RepForward f = rep_forward(rep, rec.vec);
      preds.push_back(msp_classify(f.probs, cfg.msp_threshold, rep.label_map));
    }
  } else {
    EmbeddedDataset train_f = train;
    EmbeddedDataset val_f = split.validation;
    EmbeddedDataset test_f = split.test;
    if (!cfg.skip_rep) {
      RepTrainConfig rep_cfg = cfg.rep;
      rep_cfg.seed = derive_seed(run_seed, kRepSalt);
      RepresentationModel rep = train_representation(train, split.validation, rep_cfg);
      train_f = embed_dataset(rep, train);
      val_f = embed_dataset(rep, split.validation);
      test_f = embed_dataset(rep, split.test);
    }
    BoundaryTrainConfig b_cfg = cfg.boundary;
    b_cfg.seed = derive_seed(run_seed, kBoundarySalt);
    Centroids cents = compute_centroids(train_f);
    AdbModel model = train_boundaries(train_f, cents, b_cfg).model;
    if (cfg.val_calibration && !val_f.empty()) calibrate_radii(model, val_f);
    preds = classify_batch(model, test_f);
  }

  run.metrics = compute_metrics(
      confusion_matrix(preds, gold_labels(split.test), split.test.label_map));
  return run;
}

MetricStats stats_of(const std::vector<double>& xs) {
  MetricStats s;
  const double n = static_cast<double>(xs.size());
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / n);
  return s;
}

json metrics_to_json(const MetricsReport& m, const LabelMap& labels) {
  json per_class = json::object();
  std::vector<std::string> names = labels.names();
  names.push_back(std::string(kOpenLabel));
  for (std::size_t c = 0; c < names.size(); ++c) {
    per_class[names[c]] = {
        {"precision", m.per_class_precision[c]},
        {"recall", m.per_class_recall[c]},
        {"f1", m.per_class_f1[c]},
    };
  }
  json cm_rows = json::array();
  for (std::size_t g = 0; g < m.cm.side(); ++g) {
    json row = json::array();
    for (std::size_t p = 0; p < m.cm.side(); ++p) row.push_back(m.cm.at(g, p));
    cm_rows.push_back(std::move(row));
  }
  return json{
      {"accuracy", m.accuracy},
      {"f1_all", m.f1_all},
      {"f1_known", m.f1_known},
      {"f1_open", m.f1_open},
      {"per_class", per_class},
      {"confusion_matrix", {{"labels", names}, {"counts", cm_rows}}},
  };
}

const char* method_name(Method m) { return m == Method::kAdb ? "adb" : "msp"; }

}  // namespace

ExperimentReport run_experiment(const EmbeddedDataset& dataset,
                                const ExperimentConfig& cfg) {
  validate_experiment_config(cfg);

  ExperimentReport report;
  report.runs.resize(static_cast<std::size_t>(cfg.n_runs));
  auto run_one = [&](int r) {
    try {
      report.runs[static_cast<std::size_t>(r)] = single_run(dataset, cfg, r);
    } catch (const Error& e) {
      throw Error(e.code(), "run " + std::to_string(r) + ": " + e.what());
    }
  };

  if (cfg.parallel <= 1) {
    for (int r = 0; r < cfg.n_runs; ++r) run_one(r);
  } else {
    // Runs are pure functions of (dataset, cfg, r); waves of std::async give
    // the same report as the serial loop.
    for (int base = 0; base < cfg.n_runs; base += cfg.parallel) {
      std::vector<std::future<void>> wave;
      for (int r = base; r < std::min(base + cfg.parallel, cfg.n_runs); ++r)
        wave.push_back(std::async(std::launch::async, run_one, r));
      for (auto& f : wave) f.get();
    }
  }

  std::vector<double> acc, f1a, f1k, f1o;
  for (const auto& run : report.runs) {
    acc.push_back(run.metrics.accuracy);
    f1a.push_back(run.metrics.f1_all);
    f1k.push_back(run.metrics.f1_known);
    f1o.push_back(run.metrics.f1_open);
  }
  report.accuracy = stats_of(acc);
  report.f1_all = stats_of(f1a);
  report.f1_known = stats_of(f1k);
  report.f1_open = stats_of(f1o);
  return report;
}

std::vector<std::pair<double, MetricsReport>> boundary_ratio_sweep(
    const AdbModel& model, const EmbeddedDataset& test,
    std::span<const double> ratios) {
  for (double r : ratios)
    if (!(r > 0.0)) throw_argument("boundary_ratio_sweep: ratios must be positive");
  std::vector<std::string> golds = gold_labels(test);
  std::vector<std::pair<double, MetricsReport>> rows;
  rows.reserve(ratios.size());
  for (double r : ratios) {
    auto preds = classify_batch(model, test, r);
    rows.emplace_back(r,
                      compute_metrics(confusion_matrix(preds, golds, model.label_map)));
  }
  return rows;
}

std::vector<std::pair<double, ExperimentReport>> labeled_ratio_sweep(
    const EmbeddedDataset& dataset, const ExperimentConfig& cfg,
    std::span<const double> ratios) {
  for (double r : ratios)
    if (!(r > 0.0 && r <= 1.0))
      throw_argument("labeled_ratio_sweep: ratios must lie in (0, 1]");
  std::vector<std::pair<double, ExperimentReport>> rows;
  rows.reserve(ratios.size());
  for (double r : ratios) {
    ExperimentConfig c = cfg;
    c.labeled_ratio = r;
    rows.emplace_back(r, run_experiment(dataset, c));
  }
  return rows;
}

std::string metrics_json(const MetricsReport& m, const LabelMap& labels) {
  return metrics_to_json(m, labels).dump(2) + "\n";
}

std::string predictions_csv(const std::vector<Prediction>& preds,
                            const std::vector<std::string>& golds) {
  if (preds.size() != golds.size())
    throw_argument("predictions_csv: length mismatch");
  std::ostringstream out;
  out << "index,gold,pred,nearest,distance,margin\n";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i];
    out << i << ',' << golds[i] << ',' << p.label << ',' << p.nearest_class << ','
        << format_double(p.distance) << ',' << format_double(p.margin) << "\n";
  }
  return out.str();
}

std::string experiment_report_json(const ExperimentReport& rep,
                                   const ExperimentConfig& cfg) {
  json runs = json::array();
  for (const auto& run : rep.runs) {
    runs.push_back({
        {"seed", run.seed},
        {"train_size", run.train_size},
        {"test_size", run.test_size},
        {"num_known", run.num_known},
        {"accuracy", run.metrics.accuracy},
        {"f1_all", run.metrics.f1_all},
        {"f1_known", run.metrics.f1_known},
        {"f1_open", run.metrics.f1_open},
    });
  }
  json j;
  j["config"] = {
      {"known_ratio", cfg.known_ratio},
      {"labeled_ratio", cfg.labeled_ratio},
      {"n_runs", cfg.n_runs},
      {"base_seed", cfg.base_seed},
      {"val_fraction", cfg.val_fraction},
      {"test_fraction", cfg.test_fraction},
      {"method", method_name(cfg.method)},
      {"msp_threshold", cfg.msp_threshold},
      {"skip_rep", cfg.skip_rep},
      {"val_calibration", cfg.val_calibration},
      {"resample_classes_per_run", cfg.resample_classes_per_run},
      {"parallel", cfg.parallel},
      {"rep",
       {{"learning_rate", cfg.rep.learning_rate},
        {"batch_size", cfg.rep.batch_size},
        {"max_epochs", cfg.rep.max_epochs},
        {"early_stop_patience", cfg.rep.early_stop_patience},
        {"rep_dim", cfg.rep.rep_dim}}},
      {"boundary",
       {{"learning_rate", cfg.boundary.learning_rate},
        {"batch_size", cfg.boundary.batch_size},
        {"max_epochs", cfg.boundary.max_epochs},
        {"convergence_tol", cfg.boundary.convergence_tol},
        {"patience", cfg.boundary.patience}}},
  };
  j["runs"] = runs;
  j["aggregate"] = {
      {"accuracy", {{"mean", rep.accuracy.mean}, {"stddev", rep.accuracy.stddev}}},
      {"f1_all", {{"mean", rep.f1_all.mean}, {"stddev", rep.f1_all.stddev}}},
      {"f1_known", {{"mean", rep.f1_known.mean}, {"stddev", rep.f1_known.stddev}}},
      {"f1_open", {{"mean", rep.f1_open.mean}, {"stddev", rep.f1_open.stddev}}},
  };
  return j.dump(2) + "\n";
}

std::string experiment_report_csv(const ExperimentReport& rep) {
  std::ostringstream out;
  out << "run,accuracy,f1_all,f1_known,f1_open\n";
  for (std::size_t r = 0; r < rep.runs.size(); ++r) {
    const auto& m = rep.runs[r].metrics;
    out << r << ',' << format_double(m.accuracy) << ',' << format_double(m.f1_all)
        << ',' << format_double(m.f1_known) << ',' << format_double(m.f1_open)
        << "\n";
  }
  return out.str();
}

std::string boundary_sweep_csv(
    const std::vector<std::pair<double, MetricsReport>>& rows) {
  std::ostringstream out;
  out << "ratio,accuracy,f1_all,f1_known,f1_open,open_recall\n";
  for (const auto& [ratio, m] : rows) {
    out << format_double(ratio) << ',' << format_double(m.accuracy) << ','
        << format_double(m.f1_all) << ',' << format_double(m.f1_known) << ','
        << format_double(m.f1_open) << ',' << format_double(m.per_class_recall.back())
        << "\n";
  }
  return out.str();
}

std::string labeled_sweep_csv(
    const std::vector<std::pair<double, ExperimentReport>>& rows) {
  std::ostringstream out;
  out << "labeled_ratio,accuracy_mean,accuracy_std,f1_all_mean,f1_all_std,"
         "f1_known_mean,f1_known_std,f1_open_mean,f1_open_std\n";
  for (const auto& [ratio, rep] : rows) {
    out << format_double(ratio) << ',' << format_double(rep.accuracy.mean) << ','
        << format_double(rep.accuracy.stddev) << ',' << format_double(rep.f1_all.mean)
        << ',' << format_double(rep.f1_all.stddev) << ','
        << format_double(rep.f1_known.mean) << ',' << format_double(rep.f1_known.stddev)
        << ',' << format_double(rep.f1_open.mean) << ','
        << format_double(rep.f1_open.stddev) << "\n";
  }
  return out.str();
}

}  // namespace adb
