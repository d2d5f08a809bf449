// extern-C surface of the shared library; thin translation layer over the
// core. Exceptions become status codes plus a per-thread message.

#include "adb/adb.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/config_json.hpp"
#include "core/data_io.hpp"
#include "core/evaluation.hpp"

struct adb_dataset {
  adb::EmbeddedDataset ds;
};

struct adb_split {
  adb_dataset train;
  adb_dataset validation;
  adb_dataset test;
  std::string manifest;
};

struct adb_rep_model {
  adb::RepresentationModel model;
};

struct adb_model {
  adb::AdbModel model;
  std::vector<adb::CurvePoint> curve;
};

namespace {

thread_local std::string g_last_error;

adb_status code_of(const adb::Error& e) {
  switch (e.code()) {
    case adb::ErrorCode::kArgument:
      return ADB_ERR_ARGUMENT;
    case adb::ErrorCode::kParse:
      return ADB_ERR_PARSE;
    case adb::ErrorCode::kDimension:
      return ADB_ERR_DIMENSION;
    case adb::ErrorCode::kEmptyDataset:
      return ADB_ERR_EMPTY_DATASET;
    case adb::ErrorCode::kInsufficientData:
      return ADB_ERR_INSUFFICIENT_DATA;
    case adb::ErrorCode::kModelFormat:
      return ADB_ERR_MODEL_FORMAT;
    case adb::ErrorCode::kIo:
      return ADB_ERR_IO;
  }
  return ADB_ERR_INTERNAL;
}

template <typename Fn>
adb_status guarded(Fn&& fn) {
  try {
    fn();
    return ADB_OK;
  } catch (const adb::Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ADB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ADB_ERR_INTERNAL;
  }
}

adb_status fail_argument(const char* msg) {
  g_last_error = msg;
  return ADB_ERR_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

adb_prediction to_c(const adb::Prediction& p) {
  adb_prediction out;
  out.label = p.label_index;
  out.nearest = p.nearest_index;
  out.distance = p.distance;
  out.margin = p.margin;
  return out;
}

std::vector<std::string> gold_labels(const adb::EmbeddedDataset& ds) {
  std::vector<std::string> out;
  out.reserve(ds.size());
  for (const auto& rec : ds.records) out.push_back(rec.label);
  return out;
}

}  // namespace

extern "C" {

const char* adb_version(void) { return "1.0.0"; }

const char* adb_last_error(void) { return g_last_error.c_str(); }

void adb_string_free(char* s) { std::free(s); }

/* ------------------------------------------------------------------ */

adb_status adb_dataset_load(const char* path, const char* format, adb_dataset** out) {
  if (path == nullptr || out == nullptr) return fail_argument("null argument");
  return guarded([&] {
    adb::DatasetFormat f = format == nullptr ? adb::detect_dataset_format(path)
                                             : adb::parse_dataset_format(format);
    *out = new adb_dataset{adb::load_dataset(path, f)};
  });
}

adb_status adb_dataset_save_csv(const adb_dataset* ds, const char* path) {
  if (ds == nullptr || path == nullptr) return fail_argument("null argument");
  return guarded([&] { adb::save_dataset_csv(ds->ds, path); });
}

adb_status adb_dataset_synthetic(int32_t n_classes, int32_t per_class, int32_t dim,
                                 double centroid_scale, double noise_sigma,
                                 uint64_t seed, adb_dataset** out) {
  if (out == nullptr) return fail_argument("null argument");
  return guarded([&] {
    *out = new adb_dataset{adb::generate_synthetic(n_classes, per_class, dim,
                                                   centroid_scale, noise_sigma, seed)};
  });
}

adb_status adb_dataset_subsample(const adb_dataset* ds, double labeled_ratio,
                                 uint64_t seed, adb_dataset** out) {
  if (ds == nullptr || out == nullptr) return fail_argument("null argument");
  return guarded([&] {
    *out = new adb_dataset{adb::subsample_labeled(ds->ds, labeled_ratio, seed)};
  });
}

int64_t adb_dataset_size(const adb_dataset* ds) {
  return ds == nullptr ? 0 : static_cast<int64_t>(ds->ds.size());
}

int32_t adb_dataset_dim(const adb_dataset* ds) {
  return ds == nullptr ? 0 : static_cast<int32_t>(ds->ds.dim);
}

int32_t adb_dataset_num_classes(const adb_dataset* ds) {
  return ds == nullptr ? 0 : static_cast<int32_t>(ds->ds.label_map.size());
}

const char* adb_dataset_label_name(const adb_dataset* ds, int32_t index) {
  if (ds == nullptr || index < 0 ||
      static_cast<std::size_t>(index) >= ds->ds.label_map.size())
    return nullptr;
  return ds->ds.label_map.name(static_cast<std::size_t>(index)).c_str();
}

const char* adb_dataset_record_label(const adb_dataset* ds, int64_t row) {
  if (ds == nullptr || row < 0 || static_cast<std::size_t>(row) >= ds->ds.size())
    return nullptr;
  return ds->ds.records[static_cast<std::size_t>(row)].label.c_str();
}

adb_status adb_dataset_record_vector(const adb_dataset* ds, int64_t row, double* out,
                                     int32_t dim) {
  if (ds == nullptr || out == nullptr) return fail_argument("null argument");
  if (row < 0 || static_cast<std::size_t>(row) >= ds->ds.size())
    return fail_argument("record index out of range");
  if (dim < 0 || static_cast<std::size_t>(dim) != ds->ds.dim)
    return fail_argument("buffer dimension does not match dataset dimension");
  const auto& v = ds->ds.records[static_cast<std::size_t>(row)].vec;
  std::memcpy(out, v.data(), sizeof(double) * v.size());
  return ADB_OK;
}

void adb_dataset_free(adb_dataset* ds) { delete ds; }

/* ------------------------------------------------------------------ */

adb_status adb_split_make(const adb_dataset* ds, double known_ratio,
                          double val_fraction, double test_fraction, uint64_t seed,
                          adb_split** out) {
  if (ds == nullptr || out == nullptr) return fail_argument("null argument");
  return guarded([&] {
    adb::SplitResult split = adb::make_known_open_split(ds->ds, known_ratio, seed,
                                                        val_fraction, test_fraction);
    auto* s = new adb_split;
    s->manifest = adb::split_manifest_json(split);
    s->train.ds = std::move(split.train);
    s->validation.ds = std::move(split.validation);
    s->test.ds = std::move(split.test);
    *out = s;
  });
}

const adb_dataset* adb_split_train(const adb_split* s) {
  return s == nullptr ? nullptr : &s->train;
}

const adb_dataset* adb_split_validation(const adb_split* s) {
  return s == nullptr ? nullptr : &s->validation;
}

const adb_dataset* adb_split_test(const adb_split* s) {
  return s == nullptr ? nullptr : &s->test;
}

adb_status adb_split_manifest_json(const adb_split* s, char** out_json) {
  if (s == nullptr || out_json == nullptr) return fail_argument("null argument");
  *out_json = copy_string(s->manifest);
  return ADB_OK;
}

void adb_split_free(adb_split* s) { delete s; }

/* ------------------------------------------------------------------ */

adb_status adb_rep_train(const adb_dataset* train, const adb_dataset* val,
                         const char* config_json, adb_rep_model** out) {
  if (train == nullptr || out == nullptr) return fail_argument("null argument");
  return guarded([&] {
    adb::RepTrainConfig cfg =
        adb::parse_rep_config(config_json == nullptr ? "" : config_json);
    adb::EmbeddedDataset empty;
    const adb::EmbeddedDataset& v = val == nullptr ? empty : val->ds;
    *out = new adb_rep_model{adb::train_representation(train->ds, v, cfg)};
  });
}

adb_status adb_rep_embed(const adb_rep_model* rep, const adb_dataset* ds,
                         adb_dataset** out) {
  if (rep == nullptr || ds == nullptr || out == nullptr)
    return fail_argument("null argument");
  return guarded([&] {
    *out = new adb_dataset{adb::embed_dataset(rep->model, ds->ds)};
  });
}

adb_status adb_rep_save(const adb_rep_model* rep, const char* path) {
  if (rep == nullptr || path == nullptr) return fail_argument("null argument");
  return guarded([&] { adb::save_representation(rep->model, path); });
}

adb_status adb_rep_load(const char* path, adb_rep_model** out) {
  if (path == nullptr || out == nullptr) return fail_argument("null argument");
  return guarded([&] { *out = new adb_rep_model{adb::load_representation(path)}; });
}

int32_t adb_rep_num_classes(const adb_rep_model* rep) {
  return rep == nullptr ? 0 : static_cast<int32_t>(rep->model.num_classes());
}

const char* adb_rep_label_name(const adb_rep_model* rep, int32_t index) {
  if (rep == nullptr || index < 0 ||
      static_cast<std::size_t>(index) >= rep->model.label_map.size())
    return nullptr;
  return rep->model.label_map.name(static_cast<std::size_t>(index)).c_str();
}

void adb_rep_free(adb_rep_model* rep) { delete rep; }

/* ------------------------------------------------------------------ */

adb_status adb_model_train(const adb_dataset* train, const adb_dataset* val,
                           const char* config_json, adb_model** out) {
  if (train == nullptr || out == nullptr) return fail_argument("null argument");
  return guarded([&] {
    std::string text = config_json == nullptr ? "" : config_json;
    bool calibrate = true;
    if (!text.empty()) {
      nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
      if (!j.is_discarded() && j.is_object() && j.contains("val_calibration"))
        calibrate = j["val_calibration"].get<bool>();
    }
    adb::BoundaryTrainConfig cfg = adb::parse_boundary_config(text);
    adb::Centroids cents = adb::compute_centroids(train->ds);
    adb::BoundaryTrainResult res = adb::train_boundaries(train->ds, cents, cfg);
    if (val != nullptr && calibrate && !val->ds.empty())
      adb::calibrate_radii(res.model, val->ds);
    *out = new adb_model{std::move(res.model), std::move(res.curve)};
  });
}

adb_status adb_model_save(const adb_model* m, const char* path) {
  if (m == nullptr || path == nullptr) return fail_argument("null argument");
  return guarded([&] { adb::save_model(m->model, path); });
}

adb_status adb_model_load(const char* path, adb_model** out) {
  if (path == nullptr || out == nullptr) return fail_argument("null argument");
  return guarded([&] { *out = new adb_model{adb::load_model(path), {}}; });
}

adb_status adb_model_classify(const adb_model* m, const double* vec, int32_t dim,
                              adb_prediction* out) {
  if (m == nullptr || vec == nullptr || out == nullptr)
    return fail_argument("null argument");
  return guarded([&] {
    std::span<const double> z(vec, static_cast<std::size_t>(dim < 0 ? 0 : dim));
    *out = to_c(adb::classify(m->model, z));
  });
}

adb_status adb_model_classify_dataset(const adb_model* m, const adb_dataset* ds,
                                      double boundary_ratio, adb_prediction* out) {
  if (m == nullptr || ds == nullptr || out == nullptr)
    return fail_argument("null argument");
  return guarded([&] {
    auto preds = adb::classify_batch(m->model, ds->ds, boundary_ratio);
    for (std::size_t i = 0; i < preds.size(); ++i) out[i] = to_c(preds[i]);
  });
}

adb_status adb_model_curve_csv(const adb_model* m, char** out_csv) {
  if (m == nullptr || out_csv == nullptr) return fail_argument("null argument");
  return guarded([&] { *out_csv = copy_string(adb::curve_csv(m->curve)); });
}

int32_t adb_model_num_classes(const adb_model* m) {
  return m == nullptr ? 0 : static_cast<int32_t>(m->model.num_classes());
}

int32_t adb_model_dim(const adb_model* m) {
  return m == nullptr ? 0 : static_cast<int32_t>(m->model.dim);
}

const char* adb_model_label_name(const adb_model* m, int32_t index) {
  if (m == nullptr || index < 0 ||
      static_cast<std::size_t>(index) >= m->model.label_map.size())
    return nullptr;
  return m->model.label_map.name(static_cast<std::size_t>(index)).c_str();
}

adb_status adb_model_radius(const adb_model* m, int32_t index, double* out) {
  if (m == nullptr || out == nullptr) return fail_argument("null argument");
  if (index < 0 || static_cast<std::size_t>(index) >= m->model.radii.size())
    return fail_argument("class index out of range");
  *out = m->model.radii[static_cast<std::size_t>(index)];
  return ADB_OK;
}

void adb_model_free(adb_model* m) { delete m; }

/* ------------------------------------------------------------------ */

adb_status adb_evaluate(const adb_model* m, const adb_dataset* test,
                        double boundary_ratio, char** metrics_json,
                        char** predictions_csv) {
  if (m == nullptr || test == nullptr || metrics_json == nullptr)
    return fail_argument("null argument");
  return guarded([&] {
    auto preds = adb::classify_batch(m->model, test->ds, boundary_ratio);
    auto golds = gold_labels(test->ds);
    adb::MetricsReport metrics =
        adb::compute_metrics(adb::confusion_matrix(preds, golds, m->model.label_map));
    *metrics_json = copy_string(adb::metrics_json(metrics, m->model.label_map));
    if (predictions_csv != nullptr)
      *predictions_csv = copy_string(adb::predictions_csv(preds, golds));
  });
}

adb_status adb_evaluate_msp(const adb_rep_model* rep, const adb_dataset* test,
                            double threshold, char** metrics_json,
                            char** predictions_csv) {
  if (rep == nullptr || test == nullptr || metrics_json == nullptr)
    return fail_argument("null argument");
  return guarded([&] {
    std::vector<adb::Prediction> preds;
    preds.reserve(test->ds.size());
    for (const auto& rec : test->ds.records) {
      adb::RepForward f = adb::rep_forward(rep->model, rec.vec);
      preds.push_back(adb::msp_classify(f.probs, threshold, rep->model.label_map));
    }
    auto golds = gold_labels(test->ds);
    adb::MetricsReport metrics = adb::compute_metrics(
        adb::confusion_matrix(preds, golds, rep->model.label_map));
    *metrics_json = copy_string(adb::metrics_json(metrics, rep->model.label_map));
    if (predictions_csv != nullptr)
      *predictions_csv = copy_string(adb::predictions_csv(preds, golds));
  });
}

adb_status adb_experiment_run(const adb_dataset* ds, const char* config_json,
                              char** report_json, char** report_csv) {
  if (ds == nullptr) return fail_argument("null argument");
  return guarded([&] {
    adb::ExperimentConfig cfg =
        adb::parse_experiment_config(config_json == nullptr ? "" : config_json);
    adb::ExperimentReport rep = adb::run_experiment(ds->ds, cfg);
    if (report_json != nullptr)
      *report_json = copy_string(adb::experiment_report_json(rep, cfg));
    if (report_csv != nullptr)
      *report_csv = copy_string(adb::experiment_report_csv(rep));
  });
}

adb_status adb_sweep_boundary(const adb_model* m, const adb_dataset* test,
                              const double* ratios, int32_t n_ratios,
                              char** csv_out) {
  if (m == nullptr || test == nullptr || ratios == nullptr || csv_out == nullptr)
    return fail_argument("null argument");
  if (n_ratios < 1) return fail_argument("need at least one ratio");
  return guarded([&] {
    std::span<const double> rs(ratios, static_cast<std::size_t>(n_ratios));
    auto rows = adb::boundary_ratio_sweep(m->model, test->ds, rs);
    *csv_out = copy_string(adb::boundary_sweep_csv(rows));
  });
}

adb_status adb_sweep_labeled(const adb_dataset* ds, const char* config_json,
                             const double* ratios, int32_t n_ratios, char** csv_out) {
  if (ds == nullptr || ratios == nullptr || csv_out == nullptr)
    return fail_argument("null argument");
  if (n_ratios < 1) return fail_argument("need at least one ratio");
  return guarded([&] {
    adb::ExperimentConfig cfg =
        adb::parse_experiment_config(config_json == nullptr ? "" : config_json);
    std::span<const double> rs(ratios, static_cast<std::size_t>(n_ratios));
    auto rows = adb::labeled_ratio_sweep(ds->ds, cfg, rs);
    *csv_out = copy_string(adb::labeled_sweep_csv(rows));
  });
}

adb_status adb_config_resolve(const char* kind, const char* config_json,
                              char** resolved_json) {
  if (kind == nullptr || resolved_json == nullptr)
    return fail_argument("null argument");
  return guarded([&] {
    std::string text = config_json == nullptr ? "" : config_json;
    std::string k = kind;
    std::string resolved;
    if (k == "representation") {
      resolved = adb::rep_config_to_json(adb::parse_rep_config(text));
    } else if (k == "boundary") {
      resolved = adb::boundary_config_to_json(adb::parse_boundary_config(text));
    } else if (k == "experiment") {
      resolved = adb::experiment_config_to_json(adb::parse_experiment_config(text));
    } else {
      adb::throw_argument("unknown config kind \"" + k + "\"");
    }
    *resolved_json = copy_string(resolved);
  });
}

} /* extern "C" */
