// adb command-line front end. Talks to the shared library exclusively through
// the C API in adb/adb.h; every subcommand echoes its fully resolved
// configuration into the output directory so a run can be reproduced from the
// echo alone.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adb/adb.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

int exit_code(adb_status st) { return st == ADB_ERR_ARGUMENT ? 2 : 1; }

[[noreturn]] void die(adb_status st) {
  std::cerr << "error: " << adb_last_error() << "\n";
  std::exit(exit_code(st));
}

[[noreturn]] void die_msg(int code, const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  std::exit(code);
}

void check(adb_status st) {
  if (st != ADB_OK) die(st);
}

// Owned C string from the API.
struct CStr {
  char* p = nullptr;
  ~CStr() { adb_string_free(p); }
  std::string str() const { return p == nullptr ? std::string() : std::string(p); }
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) die_msg(1, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out) die_msg(1, "failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) die_msg(1, "cannot create directory " + dir.string() + ": " + ec.message());
}

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path, std::ios::binary);
  if (!in) die_msg(1, "cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    die_msg(1, std::string("config file: ") + e.what());
  }
  if (!j.is_object()) die_msg(2, "config file must hold a JSON object");
  return j;
}

// Flags override config-file values; only user-provided flags overlay.
template <typename T>
void overlay(const CLI::Option* opt, json& cfg, const char* key, const T& value) {
  if (opt != nullptr && opt->count() > 0) cfg[key] = value;
}

std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t flag_value,
                           const json& cfg) {
  if (seed_opt != nullptr && seed_opt->count() > 0) return flag_value;
  if (cfg.contains("seed")) return cfg["seed"].get<std::uint64_t>();
  if (const char* env = std::getenv("ADB_SEED"); env != nullptr && *env != '\0')
    return std::strtoull(env, nullptr, 10);
  return kDefaultSeed;
}

std::string resolve_config(const char* kind, const json& partial) {
  CStr out;
  check(adb_config_resolve(kind, partial.dump().c_str(), &out.p));
  return out.str();
}

using DatasetPtr = std::unique_ptr<adb_dataset, decltype(&adb_dataset_free)>;

DatasetPtr load_data(const std::string& path, const std::string& format) {
  adb_dataset* ds = nullptr;
  check(adb_dataset_load(path.c_str(), format.empty() ? nullptr : format.c_str(), &ds));
  return DatasetPtr(ds, &adb_dataset_free);
}

// Shared flag bundle for pipelines that train the representation + boundaries.
struct TrainFlags {
  double rep_lr = 1e-3;
  int rep_batch = 128;
  int rep_epochs = 100;
  int rep_patience = 10;
  int rep_dim = 0;
  double b_lr = 0.05;
  int b_batch = 128;
  int b_epochs = 100;
  double b_tol = 1e-4;
  int b_patience = 5;

  CLI::Option* o_rep_lr = nullptr;
  CLI::Option* o_rep_batch = nullptr;
  CLI::Option* o_rep_epochs = nullptr;
  CLI::Option* o_rep_patience = nullptr;
  CLI::Option* o_rep_dim = nullptr;
  CLI::Option* o_b_lr = nullptr;
  CLI::Option* o_b_batch = nullptr;
  CLI::Option* o_b_epochs = nullptr;
  CLI::Option* o_b_tol = nullptr;
  CLI::Option* o_b_patience = nullptr;

  void attach(CLI::App* cmd) {
    o_rep_lr = cmd->add_option("--rep-lr", rep_lr, "representation learning rate");
    o_rep_batch = cmd->add_option("--rep-batch", rep_batch, "representation batch size");
    o_rep_epochs = cmd->add_option("--rep-epochs", rep_epochs, "representation epochs");
    o_rep_patience =
        cmd->add_option("--rep-patience", rep_patience, "early-stop patience");
    o_rep_dim = cmd->add_option("--rep-dim", rep_dim, "representation dimension");
    o_b_lr = cmd->add_option("--boundary-lr", b_lr, "boundary learning rate");
    o_b_batch = cmd->add_option("--boundary-batch", b_batch, "boundary batch size");
    o_b_epochs = cmd->add_option("--boundary-epochs", b_epochs, "boundary epochs");
    o_b_tol = cmd->add_option("--boundary-tol", b_tol, "radius convergence tolerance");
    o_b_patience = cmd->add_option("--boundary-patience", b_patience,
                                   "convergence patience (epochs)");
  }

  void overlay_into(json& cfg) const {
    if (!cfg.contains("rep")) cfg["rep"] = json::object();
    if (!cfg.contains("boundary")) cfg["boundary"] = json::object();
    overlay(o_rep_lr, cfg["rep"], "learning_rate", rep_lr);
    overlay(o_rep_batch, cfg["rep"], "batch_size", rep_batch);
    overlay(o_rep_epochs, cfg["rep"], "max_epochs", rep_epochs);
    overlay(o_rep_patience, cfg["rep"], "early_stop_patience", rep_patience);
    overlay(o_rep_dim, cfg["rep"], "rep_dim", rep_dim);
    overlay(o_b_lr, cfg["boundary"], "learning_rate", b_lr);
    overlay(o_b_batch, cfg["boundary"], "batch_size", b_batch);
    overlay(o_b_epochs, cfg["boundary"], "max_epochs", b_epochs);
    overlay(o_b_tol, cfg["boundary"], "convergence_tol", b_tol);
    overlay(o_b_patience, cfg["boundary"], "patience", b_patience);
  }
};

/* ------------------------------------------------------------------ */

struct SynthArgs {
  int classes = 0;
  int per_class = 100;
  int dim = 2;
  double centroid_scale = 10.0;
  double noise_sigma = 1.0;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  std::string config_path;
  CLI::Option *o_classes, *o_per_class, *o_dim, *o_scale, *o_sigma, *o_seed;
};

int cmd_synth(const SynthArgs& a) {
  json cfg = load_config_file(a.config_path);
  overlay(a.o_classes, cfg, "classes", a.classes);
  overlay(a.o_per_class, cfg, "per_class", a.per_class);
  overlay(a.o_dim, cfg, "dim", a.dim);
  overlay(a.o_scale, cfg, "centroid_scale", a.centroid_scale);
  overlay(a.o_sigma, cfg, "noise_sigma", a.noise_sigma);
  const std::uint64_t seed = resolve_seed(a.o_seed, a.seed, cfg);

  if (!cfg.contains("classes")) die_msg(2, "synth: --classes is required");
  const int classes = cfg["classes"];
  const int per_class = cfg.value("per_class", 100);
  const int dim = cfg.value("dim", 2);
  const double scale = cfg.value("centroid_scale", 10.0);
  const double sigma = cfg.value("noise_sigma", 1.0);

  adb_dataset* ds = nullptr;
  check(adb_dataset_synthetic(classes, per_class, dim, scale, sigma, seed, &ds));
  DatasetPtr owned(ds, &adb_dataset_free);
  check(adb_dataset_save_csv(ds, a.out.c_str()));

  json echo{{"subcommand", "synth"}, {"classes", classes}, {"per_class", per_class},
            {"dim", dim},            {"centroid_scale", scale},
            {"noise_sigma", sigma},  {"seed", seed},
            {"out", a.out}};
  fs::path outp(a.out);
  write_file(outp.parent_path().empty() ? fs::path("config.json")
                                        : outp.parent_path() / "config.json",
             echo.dump(2) + "\n");
  std::cout << "wrote " << a.out << ": " << adb_dataset_size(ds) << " records, "
            << adb_dataset_num_classes(ds) << " classes, dim " << adb_dataset_dim(ds)
            << "\n";
  return 0;
}

struct SplitArgs {
  std::string data, format, out, config_path;
  double known_ratio = 0.5;
  double val_fraction = 0.1;
  double test_fraction = 0.2;
  std::uint64_t seed = kDefaultSeed;
  CLI::Option *o_known, *o_val, *o_test, *o_seed;
};

int cmd_split(const SplitArgs& a) {
  json cfg = load_config_file(a.config_path);
  overlay(a.o_known, cfg, "known_ratio", a.known_ratio);
  overlay(a.o_val, cfg, "val_fraction", a.val_fraction);
  overlay(a.o_test, cfg, "test_fraction", a.test_fraction);
  const std::uint64_t seed = resolve_seed(a.o_seed, a.seed, cfg);
  const double known_ratio = cfg.value("known_ratio", 0.5);
  const double val_fraction = cfg.value("val_fraction", 0.1);
  const double test_fraction = cfg.value("test_fraction", 0.2);

  DatasetPtr ds = load_data(a.data, a.format);
  adb_split* split = nullptr;
  check(adb_split_make(ds.get(), known_ratio, val_fraction, test_fraction, seed,
                       &split));
  std::unique_ptr<adb_split, decltype(&adb_split_free)> owned(split, &adb_split_free);

  ensure_dir(a.out);
  fs::path out(a.out);
  check(adb_dataset_save_csv(adb_split_train(split), (out / "train.csv").c_str()));
  check(adb_dataset_save_csv(adb_split_validation(split),
                             (out / "validation.csv").c_str()));
  check(adb_dataset_save_csv(adb_split_test(split), (out / "test.csv").c_str()));
  CStr manifest;
  check(adb_split_manifest_json(split, &manifest.p));
  write_file(out / "manifest.json", manifest.str());

  json echo{{"subcommand", "split"},       {"data", a.data},
            {"known_ratio", known_ratio},  {"val_fraction", val_fraction},
            {"test_fraction", test_fraction}, {"seed", seed},
            {"out", a.out}};
  write_file(out / "config.json", echo.dump(2) + "\n");
  std::cout << "wrote split to " << a.out << " (train "
            << adb_dataset_size(adb_split_train(split)) << ", validation "
            << adb_dataset_size(adb_split_validation(split)) << ", test "
            << adb_dataset_size(adb_split_test(split)) << ")\n";
  return 0;
}

struct TrainArgs {
  std::string data, format, out, config_path;
  double known_ratio = 0.5;
  double labeled_ratio = 1.0;
  double val_fraction = 0.1;
  double test_fraction = 0.2;
  std::uint64_t seed = kDefaultSeed;
  bool skip_rep = false;
  bool no_calibrate = false;
  TrainFlags flags;
  CLI::Option *o_known, *o_labeled, *o_val, *o_test, *o_seed, *o_skip, *o_nocal;
};

int cmd_train(const TrainArgs& a) {
  json cfg = load_config_file(a.config_path);
  overlay(a.o_known, cfg, "known_ratio", a.known_ratio);
  overlay(a.o_labeled, cfg, "labeled_ratio", a.labeled_ratio);
  overlay(a.o_val, cfg, "val_fraction", a.val_fraction);
  overlay(a.o_test, cfg, "test_fraction", a.test_fraction);
  overlay(a.o_skip, cfg, "skip_rep", a.skip_rep);
  overlay(a.o_nocal, cfg, "val_calibration", !a.no_calibrate);
  a.flags.overlay_into(cfg);
  const std::uint64_t seed = resolve_seed(a.o_seed, a.seed, cfg);

  const double known_ratio = cfg.value("known_ratio", 0.5);
  const double labeled_ratio = cfg.value("labeled_ratio", 1.0);
  const double val_fraction = cfg.value("val_fraction", 0.1);
  const double test_fraction = cfg.value("test_fraction", 0.2);
  const bool skip_rep = cfg.value("skip_rep", false);
  const bool calibrate = cfg.value("val_calibration", true);

  // Stage seeds derive from the run seed and land in the echoed config, so a
  // rerun from the echo reproduces the run exactly.
  json rep_cfg = cfg.value("rep", json::object());
  json b_cfg = cfg.value("boundary", json::object());
  if (!rep_cfg.contains("seed")) rep_cfg["seed"] = seed + 2;
  if (!b_cfg.contains("seed")) b_cfg["seed"] = seed + 3;
  const std::uint64_t subsample_seed =
      cfg.contains("subsample_seed") ? cfg["subsample_seed"].get<std::uint64_t>()
                                     : seed + 1;

  DatasetPtr ds = load_data(a.data, a.format);
  adb_split* split_raw = nullptr;
  check(adb_split_make(ds.get(), known_ratio, val_fraction, test_fraction, seed,
                       &split_raw));
  std::unique_ptr<adb_split, decltype(&adb_split_free)> split(split_raw,
                                                              &adb_split_free);

  adb_dataset* train_raw = nullptr;
  check(adb_dataset_subsample(adb_split_train(split.get()), labeled_ratio,
                              subsample_seed, &train_raw));
  DatasetPtr train(train_raw, &adb_dataset_free);

  ensure_dir(a.out);
  fs::path out(a.out);

  std::string rep_resolved = resolve_config("representation", rep_cfg);
  std::string b_resolved = resolve_config("boundary", b_cfg);

  DatasetPtr train_f(nullptr, &adb_dataset_free);
  DatasetPtr val_f(nullptr, &adb_dataset_free);
  std::unique_ptr<adb_rep_model, decltype(&adb_rep_free)> rep(nullptr, &adb_rep_free);
  const adb_dataset* train_in = train.get();
  const adb_dataset* val_in = adb_split_validation(split.get());

  if (!skip_rep) {
    adb_rep_model* rep_raw = nullptr;
    check(adb_rep_train(train.get(), adb_split_validation(split.get()),
                        rep_resolved.c_str(), &rep_raw));
    rep.reset(rep_raw);
    adb_dataset* tf = nullptr;
    check(adb_rep_embed(rep.get(), train.get(), &tf));
    train_f.reset(tf);
    adb_dataset* vf = nullptr;
    check(adb_rep_embed(rep.get(), adb_split_validation(split.get()), &vf));
    val_f.reset(vf);
    train_in = train_f.get();
    val_in = val_f.get();
    check(adb_rep_save(rep.get(), (out / "rep.json").c_str()));
  }

  json b_with_cal = json::parse(b_resolved);
  b_with_cal["val_calibration"] = calibrate;
  adb_model* model_raw = nullptr;
  check(adb_model_train(train_in, val_in, b_with_cal.dump().c_str(), &model_raw));
  std::unique_ptr<adb_model, decltype(&adb_model_free)> model(model_raw,
                                                              &adb_model_free);

  check(adb_model_save(model.get(), (out / "model.json").c_str()));
  CStr curve;
  check(adb_model_curve_csv(model.get(), &curve.p));
  write_file(out / "curve.csv", curve.str());
  CStr manifest;
  check(adb_split_manifest_json(split.get(), &manifest.p));
  write_file(out / "manifest.json", manifest.str());
  check(adb_dataset_save_csv(adb_split_train(split.get()),
                             (out / "train.csv").c_str()));
  check(adb_dataset_save_csv(adb_split_validation(split.get()),
                             (out / "validation.csv").c_str()));
  check(adb_dataset_save_csv(adb_split_test(split.get()), (out / "test.csv").c_str()));

  json echo{{"subcommand", "train"},
            {"data", a.data},
            {"known_ratio", known_ratio},
            {"labeled_ratio", labeled_ratio},
            {"val_fraction", val_fraction},
            {"test_fraction", test_fraction},
            {"seed", seed},
            {"subsample_seed", subsample_seed},
            {"skip_rep", skip_rep},
            {"val_calibration", calibrate},
            {"rep", json::parse(rep_resolved)},
            {"boundary", json::parse(b_resolved)},
            {"out", a.out}};
  write_file(out / "config.json", echo.dump(2) + "\n");
  std::cout << "trained model with " << adb_model_num_classes(model.get())
            << " known classes (dim " << adb_model_dim(model.get()) << ") -> "
            << (out / "model.json").string() << "\n";
  return 0;
}

struct EvalArgs {
  std::string model, rep, data, format, out, config_path;
  std::string method = "adb";
  double threshold = 0.5;
  double boundary_ratio = 1.0;
  CLI::Option *o_method, *o_threshold, *o_ratio;
};

int cmd_eval(const EvalArgs& a) {
  json cfg = load_config_file(a.config_path);
  overlay(a.o_method, cfg, "method", a.method);
  overlay(a.o_threshold, cfg, "msp_threshold", a.threshold);
  overlay(a.o_ratio, cfg, "boundary_ratio", a.boundary_ratio);
  const std::string method = cfg.value("method", "adb");
  const double threshold = cfg.value("msp_threshold", 0.5);
  const double ratio = cfg.value("boundary_ratio", 1.0);
  if (method != "adb" && method != "msp") die_msg(2, "method must be adb or msp");

  DatasetPtr data = load_data(a.data, a.format);
  ensure_dir(a.out);
  fs::path out(a.out);

  CStr metrics, preds;
  if (method == "msp") {
    if (a.rep.empty()) die_msg(2, "--method msp requires --rep");
    adb_rep_model* rep_raw = nullptr;
    check(adb_rep_load(a.rep.c_str(), &rep_raw));
    std::unique_ptr<adb_rep_model, decltype(&adb_rep_free)> rep(rep_raw, &adb_rep_free);
    check(adb_evaluate_msp(rep.get(), data.get(), threshold, &metrics.p, &preds.p));
  } else {
    if (a.model.empty()) die_msg(2, "--model is required for ADB evaluation");
    adb_model* model_raw = nullptr;
    check(adb_model_load(a.model.c_str(), &model_raw));
    std::unique_ptr<adb_model, decltype(&adb_model_free)> model(model_raw,
                                                                &adb_model_free);
    DatasetPtr embedded(nullptr, &adb_dataset_free);
    const adb_dataset* test_in = data.get();
    if (!a.rep.empty()) {
      adb_rep_model* rep_raw = nullptr;
      check(adb_rep_load(a.rep.c_str(), &rep_raw));
      std::unique_ptr<adb_rep_model, decltype(&adb_rep_free)> rep(rep_raw,
                                                                  &adb_rep_free);
      adb_dataset* e = nullptr;
      check(adb_rep_embed(rep.get(), data.get(), &e));
      embedded.reset(e);
      test_in = embedded.get();
    }
    check(adb_evaluate(model.get(), test_in, ratio, &metrics.p, &preds.p));
  }

  write_file(out / "metrics.json", metrics.str());
  write_file(out / "predictions.csv", preds.str());
  json echo{{"subcommand", "eval"},   {"model", a.model},
            {"rep", a.rep},           {"data", a.data},
            {"method", method},       {"msp_threshold", threshold},
            {"boundary_ratio", ratio}, {"out", a.out}};
  write_file(out / "config.json", echo.dump(2) + "\n");
  std::cout << "wrote " << (out / "metrics.json").string() << "\n";
  return 0;
}

struct ExperimentArgs {
  std::string data, format, out, config_path;
  std::string method = "adb";
  double known_ratio = 0.5;
  double labeled_ratio = 1.0;
  int runs = 10;
  std::uint64_t base_seed = kDefaultSeed;
  double val_fraction = 0.1;
  double test_fraction = 0.2;
  double threshold = 0.5;
  bool skip_rep = false;
  bool no_calibrate = false;
  bool no_resample = false;
  int parallel = 1;
  TrainFlags flags;
  CLI::Option *o_method, *o_known, *o_labeled, *o_runs, *o_base_seed, *o_val, *o_test,
      *o_threshold, *o_skip, *o_nocal, *o_noresample, *o_parallel;
};

json experiment_config(const ExperimentArgs& a) {
  json cfg = load_config_file(a.config_path);
  // CLI-level keys from an echoed config are not experiment knobs
  for (const char* key : {"subcommand", "data", "out", "ratios", "format"})
    cfg.erase(key);
  overlay(a.o_method, cfg, "method", a.method);
  overlay(a.o_known, cfg, "known_ratio", a.known_ratio);
  overlay(a.o_labeled, cfg, "labeled_ratio", a.labeled_ratio);
  overlay(a.o_runs, cfg, "n_runs", a.runs);
  overlay(a.o_val, cfg, "val_fraction", a.val_fraction);
  overlay(a.o_test, cfg, "test_fraction", a.test_fraction);
  overlay(a.o_threshold, cfg, "msp_threshold", a.threshold);
  overlay(a.o_skip, cfg, "skip_rep", a.skip_rep);
  overlay(a.o_nocal, cfg, "val_calibration", !a.no_calibrate);
  overlay(a.o_noresample, cfg, "resample_classes_per_run", !a.no_resample);
  overlay(a.o_parallel, cfg, "parallel", a.parallel);
  a.flags.overlay_into(cfg);
  if (a.o_base_seed->count() > 0) {
    cfg["base_seed"] = a.base_seed;
  } else if (!cfg.contains("base_seed")) {
    if (const char* env = std::getenv("ADB_SEED"); env != nullptr && *env != '\0')
      cfg["base_seed"] = std::strtoull(env, nullptr, 10);
    else
      cfg["base_seed"] = kDefaultSeed;
  }
  return cfg;
}

int cmd_experiment(const ExperimentArgs& a) {
  json cfg = experiment_config(a);
  std::string resolved = resolve_config("experiment", cfg);

  DatasetPtr data = load_data(a.data, a.format);
  CStr report_json, report_csv;
  check(adb_experiment_run(data.get(), resolved.c_str(), &report_json.p,
                           &report_csv.p));

  ensure_dir(a.out);
  fs::path out(a.out);
  write_file(out / "report.json", report_json.str());
  write_file(out / "report.csv", report_csv.str());
  json echo = json::parse(resolved);
  echo["subcommand"] = "experiment";
  echo["data"] = a.data;
  echo["out"] = a.out;
  write_file(out / "config.json", echo.dump(2) + "\n");
  std::cout << "wrote " << (out / "report.json").string() << "\n";
  return 0;
}

struct SweepBoundaryArgs {
  std::string model, rep, data, format, out;
  std::vector<double> ratios;
};

int cmd_sweep_boundary(const SweepBoundaryArgs& a) {
  if (a.ratios.empty()) die_msg(2, "--ratios is required");
  adb_model* model_raw = nullptr;
  check(adb_model_load(a.model.c_str(), &model_raw));
  std::unique_ptr<adb_model, decltype(&adb_model_free)> model(model_raw,
                                                              &adb_model_free);
  DatasetPtr data = load_data(a.data, a.format);
  DatasetPtr embedded(nullptr, &adb_dataset_free);
  const adb_dataset* test_in = data.get();
  if (!a.rep.empty()) {
    adb_rep_model* rep_raw = nullptr;
    check(adb_rep_load(a.rep.c_str(), &rep_raw));
    std::unique_ptr<adb_rep_model, decltype(&adb_rep_free)> rep(rep_raw, &adb_rep_free);
    adb_dataset* e = nullptr;
    check(adb_rep_embed(rep.get(), data.get(), &e));
    embedded.reset(e);
    test_in = embedded.get();
  }

  CStr csv;
  check(adb_sweep_boundary(model.get(), test_in, a.ratios.data(),
                           static_cast<int32_t>(a.ratios.size()), &csv.p));
  ensure_dir(a.out);
  fs::path out(a.out);
  write_file(out / "sweep_boundary.csv", csv.str());
  json echo{{"subcommand", "sweep boundary"},
            {"model", a.model},
            {"rep", a.rep},
            {"data", a.data},
            {"ratios", a.ratios},
            {"out", a.out}};
  write_file(out / "config.json", echo.dump(2) + "\n");
  std::cout << "wrote " << (out / "sweep_boundary.csv").string() << "\n";
  return 0;
}

int cmd_sweep_labeled(const ExperimentArgs& a, const std::vector<double>& ratios) {
  if (ratios.empty()) die_msg(2, "--ratios is required");
  json cfg = experiment_config(a);
  std::string resolved = resolve_config("experiment", cfg);

  DatasetPtr data = load_data(a.data, a.format);
  CStr csv;
  check(adb_sweep_labeled(data.get(), resolved.c_str(), ratios.data(),
                          static_cast<int32_t>(ratios.size()), &csv.p));
  ensure_dir(a.out);
  fs::path out(a.out);
  write_file(out / "sweep_labeled.csv", csv.str());
  json echo = json::parse(resolved);
  echo["subcommand"] = "sweep labeled";
  echo["data"] = a.data;
  echo["ratios"] = ratios;
  echo["out"] = a.out;
  write_file(out / "config.json", echo.dump(2) + "\n");
  std::cout << "wrote " << (out / "sweep_labeled.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive decision boundaries for open-set classification"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth.o_classes = c_synth->add_option("--classes", synth.classes, "number of classes");
  synth.o_per_class =
      c_synth->add_option("--per-class", synth.per_class, "records per class");
  synth.o_dim = c_synth->add_option("--dim", synth.dim, "feature dimension");
  synth.o_scale = c_synth->add_option("--centroid-scale", synth.centroid_scale,
                                      "centroid coordinate range");
  synth.o_sigma =
      c_synth->add_option("--noise-sigma", synth.noise_sigma, "per-class noise sigma");
  synth.o_seed = c_synth->add_option("--seed", synth.seed, "random seed");
  c_synth->add_option("--config", synth.config_path, "JSON config file");
  c_synth->add_option("--out", synth.out, "output CSV path")->required();

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "known/open split of a dataset");
  c_split->add_option("--data", split.data, "input dataset")->required();
  c_split->add_option("--format", split.format, "csv or jsonl");
  split.o_known =
      c_split->add_option("--known-ratio", split.known_ratio, "known class fraction");
  split.o_val = c_split->add_option("--val-fraction", split.val_fraction,
                                    "validation fraction per class");
  split.o_test = c_split->add_option("--test-fraction", split.test_fraction,
                                     "test fraction per class");
  split.o_seed = c_split->add_option("--seed", split.seed, "random seed");
  c_split->add_option("--config", split.config_path, "JSON config file");
  c_split->add_option("--out", split.out, "output directory")->required();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "split, pre-train, learn boundaries");
  c_train->add_option("--data", train.data, "input dataset")->required();
  c_train->add_option("--format", train.format, "csv or jsonl");
  train.o_known =
      c_train->add_option("--known-ratio", train.known_ratio, "known class fraction");
  train.o_labeled = c_train->add_option("--labeled-ratio", train.labeled_ratio,
                                        "labeled fraction of training records");
  train.o_val = c_train->add_option("--val-fraction", train.val_fraction,
                                    "validation fraction per class");
  train.o_test = c_train->add_option("--test-fraction", train.test_fraction,
                                     "test fraction per class");
  train.o_seed = c_train->add_option("--seed", train.seed, "random seed");
  train.o_skip = c_train->add_flag("--skip-rep", train.skip_rep,
                                   "train boundaries on raw vectors");
  train.o_nocal = c_train->add_flag("--no-calibrate", train.no_calibrate,
                                    "skip validation radius calibration");
  train.flags.attach(c_train);
  c_train->add_option("--config", train.config_path, "JSON config file");
  c_train->add_option("--out", train.out, "output directory")->required();

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "evaluate a model on a dataset");
  c_eval->add_option("--model", eval.model, "model.json path");
  c_eval->add_option("--rep", eval.rep, "rep.json path (embeds inputs)");
  c_eval->add_option("--data", eval.data, "test dataset")->required();
  c_eval->add_option("--format", eval.format, "csv or jsonl");
  eval.o_method = c_eval->add_option("--method", eval.method, "adb or msp");
  eval.o_threshold =
      c_eval->add_option("--threshold", eval.threshold, "MSP confidence threshold");
  eval.o_ratio = c_eval->add_option("--boundary-ratio", eval.boundary_ratio,
                                    "radius scale at test time");
  c_eval->add_option("--config", eval.config_path, "JSON config file");
  c_eval->add_option("--out", eval.out, "output directory")->required();

  ExperimentArgs exp;
  auto* c_exp = app.add_subcommand("experiment", "multi-run protocol with aggregates");
  c_exp->add_option("--data", exp.data, "input dataset")->required();
  c_exp->add_option("--format", exp.format, "csv or jsonl");
  exp.o_method = c_exp->add_option("--method", exp.method, "adb or msp");
  exp.o_known =
      c_exp->add_option("--known-ratio", exp.known_ratio, "known class fraction");
  exp.o_labeled = c_exp->add_option("--labeled-ratio", exp.labeled_ratio,
                                    "labeled fraction of training records");
  exp.o_runs = c_exp->add_option("--runs", exp.runs, "number of runs");
  exp.o_base_seed = c_exp->add_option("--base-seed", exp.base_seed, "base seed");
  exp.o_val = c_exp->add_option("--val-fraction", exp.val_fraction,
                                "validation fraction per class");
  exp.o_test = c_exp->add_option("--test-fraction", exp.test_fraction,
                                 "test fraction per class");
  exp.o_threshold =
      c_exp->add_option("--threshold", exp.threshold, "MSP confidence threshold");
  exp.o_skip =
      c_exp->add_flag("--skip-rep", exp.skip_rep, "train boundaries on raw vectors");
  exp.o_nocal = c_exp->add_flag("--no-calibrate", exp.no_calibrate,
                                "skip validation radius calibration");
  exp.o_noresample = c_exp->add_flag("--no-resample", exp.no_resample,
                                     "keep one class split across runs");
  exp.o_parallel = c_exp->add_option("--parallel", exp.parallel, "concurrent runs");
  exp.flags.attach(c_exp);
  c_exp->add_option("--config", exp.config_path, "JSON config file");
  c_exp->add_option("--out", exp.out, "output directory")->required();

  auto* c_sweep = app.add_subcommand("sweep", "sensitivity sweeps");
  c_sweep->require_subcommand(1);

  SweepBoundaryArgs sb;
  auto* c_sb = c_sweep->add_subcommand("boundary", "scale radii at test time");
  c_sb->add_option("--model", sb.model, "model.json path")->required();
  c_sb->add_option("--rep", sb.rep, "rep.json path (embeds inputs)");
  c_sb->add_option("--data", sb.data, "test dataset")->required();
  c_sb->add_option("--format", sb.format, "csv or jsonl");
  c_sb->add_option("--ratios", sb.ratios, "comma-separated radius ratios")
      ->delimiter(',');
  c_sb->add_option("--out", sb.out, "output directory")->required();

  ExperimentArgs sl;
  std::vector<double> sl_ratios;
  auto* c_sl = c_sweep->add_subcommand("labeled", "vary the labeled ratio");
  c_sl->add_option("--data", sl.data, "input dataset")->required();
  c_sl->add_option("--format", sl.format, "csv or jsonl");
  c_sl->add_option("--ratios", sl_ratios, "comma-separated labeled ratios")
      ->delimiter(',');
  sl.o_method = c_sl->add_option("--method", sl.method, "adb or msp");
  sl.o_known = c_sl->add_option("--known-ratio", sl.known_ratio, "known class fraction");
  sl.o_labeled = c_sl->add_option("--labeled-ratio", sl.labeled_ratio,
                                  "unused for the sweep itself");
  sl.o_runs = c_sl->add_option("--runs", sl.runs, "number of runs per ratio");
  sl.o_base_seed = c_sl->add_option("--base-seed", sl.base_seed, "base seed");
  sl.o_val = c_sl->add_option("--val-fraction", sl.val_fraction,
                              "validation fraction per class");
  sl.o_test =
      c_sl->add_option("--test-fraction", sl.test_fraction, "test fraction per class");
  sl.o_threshold =
      c_sl->add_option("--threshold", sl.threshold, "MSP confidence threshold");
  sl.o_skip =
      c_sl->add_flag("--skip-rep", sl.skip_rep, "train boundaries on raw vectors");
  sl.o_nocal = c_sl->add_flag("--no-calibrate", sl.no_calibrate,
                              "skip validation radius calibration");
  sl.o_noresample = c_sl->add_flag("--no-resample", sl.no_resample,
                                   "keep one class split across runs");
  sl.o_parallel = c_sl->add_option("--parallel", sl.parallel, "concurrent runs");
  sl.flags.attach(c_sl);
  c_sl->add_option("--config", sl.config_path, "JSON config file");
  c_sl->add_option("--out", sl.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_synth->parsed()) return cmd_synth(synth);
    if (c_split->parsed()) return cmd_split(split);
    if (c_train->parsed()) return cmd_train(train);
    if (c_eval->parsed()) return cmd_eval(eval);
    if (c_exp->parsed()) return cmd_experiment(exp);
    if (c_sb->parsed()) return cmd_sweep_boundary(sb);
    if (c_sl->parsed()) return cmd_sweep_labeled(sl, sl_ratios);
  } catch (const std::exception& e) {
    die_msg(1, e.what());
  }
  return 2;
}
