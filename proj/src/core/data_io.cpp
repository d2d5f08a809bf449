#include "core/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "core/rng.hpp"

namespace adb {

using nlohmann::json;

namespace {

std::string location(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line);
}

double parse_double_token(std::string_view tok, const std::string& path,
                          std::size_t line) {
  double value = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw_parse(location(path, line) + ": invalid float \"" + std::string(tok) + "\"");
  if (!std::isfinite(value))
    throw_parse(location(path, line) + ": non-finite feature value");
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

LabelMap label_map_from_records(const std::vector<EmbeddingRecord>& records) {
  std::vector<std::string> names;
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (is_open_label(r.label)) continue;
    if (seen.insert(r.label).second) names.push_back(r.label);
  }
  return LabelMap(std::move(names));
}

EmbeddedDataset load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open " + path);

  EmbeddedDataset ds;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (!have_header) {
      if (fields.size() < 2 || fields[0] != "label")
        throw_parse(location(path, line_no) + ": expected header label,f0,...");
      dim = fields.size() - 1;
      have_header = true;
      continue;
    }
    if (fields.size() - 1 != dim)
      throw Error(ErrorCode::kDimension,
                  location(path, line_no) + ": expected " + std::to_string(dim) +
                      " features, got " + std::to_string(fields.size() - 1));
    if (fields[0].empty())
      throw_parse(location(path, line_no) + ": empty label");
    EmbeddingRecord rec;
    rec.label = std::string(fields[0]);
    rec.vec.reserve(dim);
    for (std::size_t i = 1; i < fields.size(); ++i)
      rec.vec.push_back(parse_double_token(fields[i], path, line_no));
    ds.records.push_back(std::move(rec));
  }
  if (ds.records.empty())
    throw Error(ErrorCode::kEmptyDataset, path + ": no records");
  ds.dim = dim;
  ds.label_map = label_map_from_records(ds.records);
  return ds;
}

std::vector<double> json_vector(const json& arr, const std::string& path,
                                std::size_t line) {
  if (!arr.is_array() || arr.empty())
    throw_parse(location(path, line) + ": expected non-empty number array");
  std::vector<double> v;
  v.reserve(arr.size());
  for (const auto& x : arr) {
    if (!x.is_number())
      throw_parse(location(path, line) + ": expected number array");
    double d = x.get<double>();
    if (!std::isfinite(d))
      throw_parse(location(path, line) + ": non-finite feature value");
    v.push_back(d);
  }
  return v;
}

EmbeddedDataset load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open " + path);

  EmbeddedDataset ds;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw_parse(location(path, line_no) + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("label") || !obj["label"].is_string())
      throw_parse(location(path, line_no) + ": expected object with string \"label\"");

    const bool has_vec = obj.contains("vector");
    const bool has_tok = obj.contains("tokens");
    if (has_vec == has_tok)
      throw_parse(location(path, line_no) +
                  ": expected exactly one of \"vector\" or \"tokens\"");

    EmbeddingRecord rec;
    rec.label = obj["label"].get<std::string>();
    if (rec.label.empty()) throw_parse(location(path, line_no) + ": empty label");
    if (has_vec) {
      rec.vec = json_vector(obj["vector"], path, line_no);
    } else {
      const json& toks = obj["tokens"];
      if (!toks.is_array() || toks.empty())
        throw_parse(location(path, line_no) + ": \"tokens\" must be a non-empty array");
      std::vector<std::vector<double>> tokens;
      tokens.reserve(toks.size());
      for (const auto& t : toks) tokens.push_back(json_vector(t, path, line_no));
      for (const auto& t : tokens)
        if (t.size() != tokens.front().size())
          throw Error(ErrorCode::kDimension,
                      location(path, line_no) + ": token vectors differ in dimension");
      rec.vec = mean_pool(tokens);
    }

    if (ds.records.empty()) {
      ds.dim = rec.vec.size();
    } else if (rec.vec.size() != ds.dim) {
      throw Error(ErrorCode::kDimension,
                  location(path, line_no) + ": expected dimension " +
                      std::to_string(ds.dim) + ", got " + std::to_string(rec.vec.size()));
    }
    ds.records.push_back(std::move(rec));
  }
  if (ds.records.empty())
    throw Error(ErrorCode::kEmptyDataset, path + ": no records");
  ds.label_map = label_map_from_records(ds.records);
  return ds;
}

// Record indices per class name, dataset order preserved.
std::map<std::string, std::vector<std::size_t>> group_by_label(
    const EmbeddedDataset& ds) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    groups[ds.records[i].label].push_back(i);
  return groups;
}

long long round_half_up(double x) { return std::llround(x); }

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_io("cannot open " + path + " for writing");
  out << content;
  if (!out) throw_io("failed writing " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_model_file(const std::string& path, const char* expected_kind) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kModelFormat, path + ": " + e.what());
  }
  if (!j.is_object())
    throw Error(ErrorCode::kModelFormat, path + ": expected a JSON object");
  if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
      j["format_version"].get<int>() != 1)
    throw Error(ErrorCode::kModelFormat, path + ": unsupported format_version");
  if (j.contains("kind") && j["kind"] != expected_kind)
    throw Error(ErrorCode::kModelFormat,
                path + ": expected kind \"" + expected_kind + "\"");
  return j;
}

std::vector<std::string> parse_labels(const json& j, const std::string& path) {
  if (!j.contains("labels") || !j["labels"].is_array() || j["labels"].empty())
    throw Error(ErrorCode::kModelFormat, path + ": missing labels");
  std::vector<std::string> labels;
  for (const auto& l : j["labels"]) {
    if (!l.is_string())
      throw Error(ErrorCode::kModelFormat, path + ": labels must be strings");
    labels.push_back(l.get<std::string>());
  }
  return labels;
}

std::vector<double> parse_number_array(const json& arr, std::size_t expected,
                                       const std::string& path, const char* name) {
  if (!arr.is_array() || arr.size() != expected)
    throw Error(ErrorCode::kModelFormat,
                path + ": \"" + name + "\" must be an array of length " +
                    std::to_string(expected));
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& x : arr) {
    if (!x.is_number())
      throw Error(ErrorCode::kModelFormat, path + ": \"" + name + "\" must be numeric");
    double v = x.get<double>();
    if (!std::isfinite(v))
      throw Error(ErrorCode::kModelFormat, path + ": non-finite value in \"" + name + "\"");
    out.push_back(v);
  }
  return out;
}

Matrix parse_matrix(const json& arr, std::size_t rows, std::size_t cols,
                    const std::string& path, const char* name) {
  if (!arr.is_array() || arr.size() != rows)
    throw Error(ErrorCode::kModelFormat,
                path + ": \"" + name + "\" must have " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = parse_number_array(arr[r], cols, path, name);
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

DatasetFormat parse_dataset_format(const std::string& name) {
  if (name == "csv") return DatasetFormat::kCsv;
  if (name == "jsonl") return DatasetFormat::kJsonl;
  throw_argument("unknown dataset format \"" + name + "\" (expected csv or jsonl)");
}

DatasetFormat detect_dataset_format(const std::string& path) {
  auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot + 1) == "jsonl")
    return DatasetFormat::kJsonl;
  return DatasetFormat::kCsv;
}

EmbeddedDataset load_dataset(const std::string& path, DatasetFormat format) {
  return format == DatasetFormat::kCsv ? load_csv(path) : load_jsonl(path);
}

void save_dataset_csv(const EmbeddedDataset& ds, const std::string& path) {
  std::ostringstream out;
  out << "label";
  for (std::size_t i = 0; i < ds.dim; ++i) out << ",f" << i;
  out << "\n";
  for (const auto& rec : ds.records) {
    out << rec.label;
    for (double v : rec.vec) out << ',' << format_double(v);
    out << "\n";
  }
  write_text_file(path, out.str());
}

std::vector<double> mean_pool(const std::vector<std::vector<double>>& tokens) {
  if (tokens.empty()) throw_argument("mean_pool: empty token sequence");
  const std::size_t dim = tokens.front().size();
  if (dim == 0) throw_argument("mean_pool: zero-dimension tokens");
  std::vector<double> out(dim, 0.0);
  for (const auto& t : tokens) {
    if (t.size() != dim) throw_argument("mean_pool: token dimensions differ");
    for (std::size_t i = 0; i < dim; ++i) out[i] += t[i];
  }
  const double n = static_cast<double>(tokens.size());
  for (double& v : out) v /= n;
  return out;
}

SplitResult make_known_open_split(const EmbeddedDataset& ds, double known_ratio,
                                  std::uint64_t seed, double val_fraction,
                                  double test_fraction) {
  if (!(known_ratio > 0.0 && known_ratio <= 1.0))
    throw_argument("known_ratio must lie in (0, 1]");
  if (!(val_fraction > 0.0 && test_fraction > 0.0 &&
        val_fraction + test_fraction < 1.0))
    throw_argument("val_fraction and test_fraction must be positive with sum < 1");
  const std::size_t total_classes = ds.label_map.size();
  if (total_classes == 0) throw_argument("dataset has no known classes");
  if (known_ratio < 1.0 && total_classes < 2)
    throw_argument("known_ratio < 1 requires at least 2 classes");
  for (const auto& rec : ds.records)
    if (is_open_label(rec.label))
      throw_argument("dataset to split must not contain open-labeled records");

  // Class selection over lexicographically sorted names keeps the choice
  // stable across ingestion orders.
  std::vector<std::string> names = ds.label_map.names();
  std::sort(names.begin(), names.end());
  Rng rng(seed);
  std::vector<std::string> shuffled = names;
  rng.shuffle(shuffled);
  std::size_t n_known = static_cast<std::size_t>(
      std::max<long long>(1, round_half_up(static_cast<double>(total_classes) *
                                           known_ratio)));
  n_known = std::min(n_known, total_classes);
  std::vector<std::string> known(shuffled.begin(), shuffled.begin() + n_known);
  std::sort(known.begin(), known.end());
  std::unordered_set<std::string> known_set(known.begin(), known.end());

  SplitResult split;
  split.known_classes = known;
  split.known_ratio = known_ratio;
  split.val_fraction = val_fraction;
  split.test_fraction = test_fraction;
  split.seed = seed;
  LabelMap map(known);
  split.train.label_map = map;
  split.validation.label_map = map;
  split.test.label_map = map;
  split.train.dim = split.validation.dim = split.test.dim = ds.dim;

  auto groups = group_by_label(ds);
  for (const auto& name : names) {
    const auto& idx = groups[name];
    if (known_set.count(name)) {
      if (idx.size() < 3)
        throw Error(ErrorCode::kInsufficientData,
                    "class \"" + name + "\" has " + std::to_string(idx.size()) +
                        " records; at least 3 are required for a known class");
      const std::size_t n = idx.size();
      std::size_t n_test = static_cast<std::size_t>(std::max<long long>(
          1, round_half_up(static_cast<double>(n) * test_fraction)));
      std::size_t n_val = static_cast<std::size_t>(std::max<long long>(
          1, round_half_up(static_cast<double>(n) * val_fraction)));
      while (n_test + n_val >= n) {
        if (n_test >= n_val && n_test > 1)
          --n_test;
        else if (n_val > 1)
          --n_val;
        else
          --n_test;  // unreachable with n >= 3
      }
      std::vector<std::size_t> order = idx;
      rng.shuffle(order);
      auto emit = [&](EmbeddedDataset& dst, std::size_t begin, std::size_t end) {
        std::vector<std::size_t> part(order.begin() + begin, order.begin() + end);
        std::sort(part.begin(), part.end());
        for (std::size_t i : part) dst.records.push_back(ds.records[i]);
      };
      emit(split.test, 0, n_test);
      emit(split.validation, n_test, n_test + n_val);
      emit(split.train, n_test + n_val, n);
    } else {
      for (std::size_t i : idx) {
        EmbeddingRecord rec = ds.records[i];
        rec.label = std::string(kOpenLabel);
        split.test.records.push_back(std::move(rec));
      }
    }
  }
  return split;
}

EmbeddedDataset subsample_labeled(const EmbeddedDataset& ds, double labeled_ratio,
                                  std::uint64_t seed) {
  if (!(labeled_ratio > 0.0 && labeled_ratio <= 1.0))
    throw_argument("labeled_ratio must lie in (0, 1]");

  EmbeddedDataset out;
  out.label_map = ds.label_map;
  out.dim = ds.dim;
  if (labeled_ratio == 1.0) {
    out.records = ds.records;
    return out;
  }

  Rng rng(seed);
  auto groups = group_by_label(ds);
  std::vector<std::size_t> kept;
  for (auto& [name, idx] : groups) {  // std::map iterates names sorted
    std::size_t keep = static_cast<std::size_t>(std::max<long long>(
        1, round_half_up(static_cast<double>(idx.size()) * labeled_ratio)));
    keep = std::min(keep, idx.size());
    std::vector<std::size_t> order = idx;
    rng.shuffle(order);
    kept.insert(kept.end(), order.begin(), order.begin() + keep);
  }
  std::sort(kept.begin(), kept.end());
  out.records.reserve(kept.size());
  for (std::size_t i : kept) out.records.push_back(ds.records[i]);
  return out;
}

EmbeddedDataset generate_synthetic(int n_classes, int per_class, int dim,
                                   double centroid_scale, double noise_sigma,
                                   std::uint64_t seed) {
  if (n_classes < 2) throw_argument("n_classes must be >= 2");
  if (per_class < 1) throw_argument("per_class must be >= 1");
  if (dim < 1) throw_argument("dim must be >= 1");
  if (!(noise_sigma > 0.0)) throw_argument("noise_sigma must be > 0");
  if (!(centroid_scale >= 0.0) || !std::isfinite(centroid_scale))
    throw_argument("centroid_scale must be finite and >= 0");

  Rng rng(seed);
  std::vector<std::vector<double>> centroids(static_cast<std::size_t>(n_classes));
  for (auto& c : centroids) {
    c.resize(static_cast<std::size_t>(dim));
    for (double& v : c) v = rng.uniform(-centroid_scale, centroid_scale);
  }

  EmbeddedDataset ds;
  ds.dim = static_cast<std::size_t>(dim);
  std::vector<std::string> names;
  for (int k = 0; k < n_classes; ++k) names.push_back("class_" + std::to_string(k));
  ds.label_map = LabelMap(names);
  ds.records.reserve(static_cast<std::size_t>(n_classes) * per_class);
  for (int k = 0; k < n_classes; ++k) {
    for (int p = 0; p < per_class; ++p) {
      EmbeddingRecord rec;
      rec.label = names[static_cast<std::size_t>(k)];
      rec.vec.resize(static_cast<std::size_t>(dim));
      for (int d = 0; d < dim; ++d)
        rec.vec[static_cast<std::size_t>(d)] =
            rng.normal(centroids[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)],
                       noise_sigma);
      ds.records.push_back(std::move(rec));
    }
  }
  return ds;
}

std::string split_manifest_json(const SplitResult& split) {
  std::size_t test_open = 0;
  for (const auto& r : split.test.records)
    if (is_open_label(r.label)) ++test_open;
  json j;
  j["known_classes"] = split.known_classes;
  j["known_ratio"] = split.known_ratio;
  j["seed"] = split.seed;
  j["val_fraction"] = split.val_fraction;
  j["test_fraction"] = split.test_fraction;
  j["counts"] = {
      {"train", split.train.size()},
      {"validation", split.validation.size()},
      {"test", split.test.size()},
      {"test_known", split.test.size() - test_open},
      {"test_open", test_open},
  };
  return j.dump(2) + "\n";
}

void save_model(const AdbModel& model, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "adb";
  j["dim"] = model.dim;
  j["labels"] = model.label_map.names();
  j["centroids"] = matrix_to_json(model.centroids);
  j["delta_hat"] = model.params.delta_hat;
  j["radii"] = model.radii;
  j["config"] = {
      {"learning_rate", model.config.learning_rate},
      {"batch_size", model.config.batch_size},
      {"max_epochs", model.config.max_epochs},
      {"convergence_tol", model.config.convergence_tol},
      {"patience", model.config.patience},
      {"calibrated", model.calibrated},
  };
  j["seed"] = model.config.seed;
  write_text_file(path, j.dump(2) + "\n");
}

AdbModel load_model(const std::string& path) {
  json j = parse_model_file(path, "adb");
  auto labels = parse_labels(j, path);
  const std::size_t k = labels.size();
  if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<int>() < 1)
    throw Error(ErrorCode::kModelFormat, path + ": missing or invalid dim");
  const std::size_t dim = j["dim"].get<std::size_t>();

  AdbModel model;
  try {
    model.label_map = LabelMap(labels);
  } catch (const Error& e) {
    throw Error(ErrorCode::kModelFormat, path + ": " + e.what());
  }
  model.dim = dim;
  if (!j.contains("centroids"))
    throw Error(ErrorCode::kModelFormat, path + ": missing centroids");
  model.centroids = parse_matrix(j["centroids"], k, dim, path, "centroids");
  if (!j.contains("delta_hat") || !j.contains("radii"))
    throw Error(ErrorCode::kModelFormat, path + ": missing delta_hat or radii");
  model.params.delta_hat = parse_number_array(j["delta_hat"], k, path, "delta_hat");
  auto stored_radii = parse_number_array(j["radii"], k, path, "radii");
  for (double r : stored_radii)
    if (!(r > 0.0))
      throw Error(ErrorCode::kModelFormat, path + ": radius must be positive");

  // Radii are derived values; recompute and require agreement with the file.
  model.radii.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    model.radii[i] = softplus(model.params.delta_hat[i]);
    double diff = std::abs(model.radii[i] - stored_radii[i]);
    if (diff > 1e-12 * std::max(1.0, std::abs(stored_radii[i])))
      throw Error(ErrorCode::kModelFormat,
                  path + ": radii inconsistent with delta_hat");
  }

  if (j.contains("config") && j["config"].is_object()) {
    const json& c = j["config"];
    if (c.contains("learning_rate")) model.config.learning_rate = c["learning_rate"];
    if (c.contains("batch_size")) model.config.batch_size = c["batch_size"];
    if (c.contains("max_epochs")) model.config.max_epochs = c["max_epochs"];
    if (c.contains("convergence_tol"))
      model.config.convergence_tol = c["convergence_tol"];
    if (c.contains("patience")) model.config.patience = c["patience"];
    if (c.contains("calibrated")) model.calibrated = c["calibrated"];
  }
  if (j.contains("seed")) model.config.seed = j["seed"].get<std::uint64_t>();
  return model;
}

void save_representation(const RepresentationModel& model, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "representation";
  j["dim_in"] = model.in_dim;
  j["dim_out"] = model.out_dim;
  j["labels"] = model.label_map.names();
  j["w_h"] = matrix_to_json(model.w_h);
  j["b_h"] = model.b_h;
  j["w_phi"] = matrix_to_json(model.w_phi);
  j["b_phi"] = model.b_phi;
  j["config"] = {
      {"learning_rate", model.config.learning_rate},
      {"batch_size", model.config.batch_size},
      {"max_epochs", model.config.max_epochs},
      {"early_stop_patience", model.config.early_stop_patience},
      {"rep_dim", model.config.rep_dim},
  };
  j["seed"] = model.config.seed;
  write_text_file(path, j.dump(2) + "\n");
}

RepresentationModel load_representation(const std::string& path) {
  json j = parse_model_file(path, "representation");
  auto labels = parse_labels(j, path);
  const std::size_t k = labels.size();
  if (!j.contains("dim_in") || !j.contains("dim_out"))
    throw Error(ErrorCode::kModelFormat, path + ": missing dim_in or dim_out");
  const std::size_t in_dim = j["dim_in"].get<std::size_t>();
  const std::size_t out_dim = j["dim_out"].get<std::size_t>();
  if (in_dim < 1 || out_dim < 1)
    throw Error(ErrorCode::kModelFormat, path + ": invalid dimensions");

  RepresentationModel model;
  try {
    model.label_map = LabelMap(labels);
  } catch (const Error& e) {
    throw Error(ErrorCode::kModelFormat, path + ": " + e.what());
  }
  model.in_dim = in_dim;
  model.out_dim = out_dim;
  model.w_h = parse_matrix(j.value("w_h", json()), out_dim, in_dim, path, "w_h");
  model.b_h = parse_number_array(j.value("b_h", json()), out_dim, path, "b_h");
  model.w_phi = parse_matrix(j.value("w_phi", json()), k, out_dim, path, "w_phi");
  model.b_phi = parse_number_array(j.value("b_phi", json()), k, path, "b_phi");
  if (j.contains("config") && j["config"].is_object()) {
    const json& c = j["config"];
    if (c.contains("learning_rate")) model.config.learning_rate = c["learning_rate"];
    if (c.contains("batch_size")) model.config.batch_size = c["batch_size"];
    if (c.contains("max_epochs")) model.config.max_epochs = c["max_epochs"];
    if (c.contains("early_stop_patience"))
      model.config.early_stop_patience = c["early_stop_patience"];
    if (c.contains("rep_dim")) model.config.rep_dim = c["rep_dim"];
  }
  if (j.contains("seed")) model.config.seed = j["seed"].get<std::uint64_t>();
  return model;
}

}  // namespace adb
