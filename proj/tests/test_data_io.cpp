#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "core/data_io.hpp"
#include "core/rng.hpp"
#include "test_util.hpp"

using namespace adb;
using adbtest::make_dataset;
using adbtest::temp_dir;
using adbtest::write_file;

TEST_CASE("load_dataset reads a small CSV") {
  auto dir = temp_dir("csv_small");
  auto path = write_file(dir / "d.csv",
                         "label,f0,f1,f2\n"
                         "a,1,2,3\n"
                         "b,4.5,-1,0.25\n");
  EmbeddedDataset ds = load_dataset(path, DatasetFormat::kCsv);
  CHECK(ds.size() == 2);
  CHECK(ds.dim == 3);
  CHECK(ds.label_map.size() == 2);
  CHECK(ds.label_map.name(0) == "a");
  CHECK(ds.records[1].vec == std::vector<double>{4.5, -1.0, 0.25});
}

TEST_CASE("csv dimension mismatch names the line") {
  auto dir = temp_dir("csv_dim");
  auto path = write_file(dir / "d.csv",
                         "label,f0,f1,f2\n"
                         "a,1,2,3\n"
                         "a,1,2,3,4\n");
  try {
    load_dataset(path, DatasetFormat::kCsv);
    FAIL("expected dimension error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimension);
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
}

TEST_CASE("csv parse errors name the line") {
  auto dir = temp_dir("csv_bad");
  auto path = write_file(dir / "d.csv", "label,f0\na,1\nb,zzz\n");
  try {
    load_dataset(path, DatasetFormat::kCsv);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  auto nan_path = write_file(dir / "n.csv", "label,f0\na,nan\n");
  CHECK_THROWS_AS(load_dataset(nan_path, DatasetFormat::kCsv), Error);
}

TEST_CASE("empty files are empty-dataset errors") {
  auto dir = temp_dir("csv_empty");
  auto path = write_file(dir / "e.csv", "");
  try {
    load_dataset(path, DatasetFormat::kCsv);
    FAIL("expected empty error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyDataset);
  }
  auto header_only = write_file(dir / "h.csv", "label,f0\n");
  CHECK_THROWS_AS(load_dataset(header_only, DatasetFormat::kCsv), Error);
}

TEST_CASE("jsonl token rows are mean-pooled at load") {
  auto dir = temp_dir("jsonl_tok");
  auto path = write_file(
      dir / "d.jsonl",
      R"({"label":"a","tokens":[[1,2,3,4],[5,6,7,8],[9,10,11,12]]})"
      "\n"
      R"({"label":"b","vector":[0,0,0,0]})"
      "\n");
  EmbeddedDataset ds = load_dataset(path, DatasetFormat::kJsonl);
  CHECK(ds.size() == 2);
  CHECK(ds.dim == 4);
  CHECK(ds.records[0].vec == std::vector<double>{5.0, 6.0, 7.0, 8.0});
}

TEST_CASE("jsonl rejects malformed rows with the line number") {
  auto dir = temp_dir("jsonl_bad");
  auto path = write_file(dir / "d.jsonl",
                         R"({"label":"a","vector":[1]})"
                         "\nnot json\n");
  try {
    load_dataset(path, DatasetFormat::kJsonl);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  auto both = write_file(dir / "b.jsonl",
                         R"({"label":"a","vector":[1],"tokens":[[1]]})"
                         "\n");
  CHECK_THROWS_AS(load_dataset(both, DatasetFormat::kJsonl), Error);
  auto mismatch = write_file(dir / "m.jsonl",
                             R"({"label":"a","vector":[1,2]})"
                             "\n"
                             R"({"label":"a","vector":[1,2,3]})"
                             "\n");
  try {
    load_dataset(mismatch, DatasetFormat::kJsonl);
    FAIL("expected dimension error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimension);
  }
}

TEST_CASE("dataset csv round-trips exactly") {
  auto ds = make_dataset({{"a", {0.1, -2.5e-17, 3.0}},
                          {"b", {1e300, 0.30000000000000004, -0.0}},
                          {"open", {1, 2, 3}}});
  auto dir = temp_dir("csv_rt");
  save_dataset_csv(ds, (dir / "d.csv").string());
  EmbeddedDataset back = load_dataset((dir / "d.csv").string(), DatasetFormat::kCsv);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.records[i].label == ds.records[i].label);
    CHECK(back.records[i].vec == ds.records[i].vec);
  }
}

TEST_CASE("mean_pool examples") {
  CHECK(mean_pool({{1, 1}, {3, 3}}) == std::vector<double>{2.0, 2.0});
  CHECK(mean_pool({{7, -2}}) == std::vector<double>{7.0, -2.0});
  CHECK(mean_pool({{1, 0}, {0, 1}, {2, 2}}) == std::vector<double>{1.0, 1.0});
  CHECK_THROWS_AS(mean_pool({}), Error);
  CHECK_THROWS_AS(mean_pool({{1, 2}, {1}}), Error);
}

TEST_CASE("mean_pool doubling leaves the mean unchanged") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 1 + rng.below(6);
    std::size_t d = 1 + rng.below(5);
    std::vector<std::vector<double>> tokens(n, std::vector<double>(d));
    for (auto& t : tokens)
      for (auto& v : t) v = rng.uniform(-10, 10);
    auto doubled = tokens;
    doubled.insert(doubled.end(), tokens.begin(), tokens.end());
    auto a = mean_pool(tokens);
    auto b = mean_pool(doubled);
    for (std::size_t i = 0; i < d; ++i)
      CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-14));
  }
}

namespace {

EmbeddedDataset four_class_dataset(int per_class) {
  EmbeddedDataset ds;
  std::vector<std::string> names{"a", "b", "c", "d"};
  ds.label_map = LabelMap(names);
  ds.dim = 2;
  double tag = 0.0;
  for (const auto& name : names)
    for (int i = 0; i < per_class; ++i)
      ds.records.push_back({name, {tag, tag += 1.0}});
  return ds;
}

}  // namespace

TEST_CASE("split selects round(K*ratio) classes and relabels the rest") {
  EmbeddedDataset ds = four_class_dataset(10);
  SplitResult split = make_known_open_split(ds, 0.5, 7, 0.1, 0.2);
  CHECK(split.known_classes.size() == 2);
  CHECK(split.train.size() == 14);       // 7 per known class
  CHECK(split.validation.size() == 2);   // 1 per known class
  CHECK(split.test.size() == 24);        // 2 per known class + 2*10 open
  std::size_t open_count = 0;
  for (const auto& r : split.test.records)
    if (is_open_label(r.label)) ++open_count;
  CHECK(open_count == 20);
  for (const auto& r : split.train.records) CHECK_FALSE(is_open_label(r.label));
  for (const auto& r : split.validation.records) CHECK_FALSE(is_open_label(r.label));
}

TEST_CASE("split with ratio 1 keeps every class known") {
  EmbeddedDataset ds = four_class_dataset(10);
  SplitResult split = make_known_open_split(ds, 1.0, 3, 0.1, 0.2);
  CHECK(split.known_classes.size() == 4);
  for (const auto& r : split.test.records) CHECK_FALSE(is_open_label(r.label));
}

TEST_CASE("split partition law: each known record exactly once, no leakage") {
  EmbeddedDataset ds = four_class_dataset(9);
  SplitResult split = make_known_open_split(ds, 0.5, 11, 0.15, 0.25);
  std::set<std::pair<double, double>> seen;
  auto collect = [&](const EmbeddedDataset& part, bool known_only) {
    for (const auto& r : part.records) {
      if (known_only && is_open_label(r.label)) continue;
      auto [it, inserted] = seen.insert({r.vec[0], r.vec[1]});
      CHECK(inserted);  // no duplicates across partitions
    }
  };
  collect(split.train, false);
  collect(split.validation, false);
  collect(split.test, true);
  CHECK(seen.size() == 2 * 9);  // every record of both known classes
}

TEST_CASE("split is deterministic and ingestion-order stable") {
  EmbeddedDataset ds = four_class_dataset(10);
  SplitResult a = make_known_open_split(ds, 0.5, 7, 0.1, 0.2);
  SplitResult b = make_known_open_split(ds, 0.5, 7, 0.1, 0.2);
  CHECK(a.known_classes == b.known_classes);
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train.records[i].label == b.train.records[i].label);
    CHECK(a.train.records[i].vec == b.train.records[i].vec);
  }
  // reversed ingestion order: same classes chosen
  EmbeddedDataset rev = ds;
  std::reverse(rev.records.begin(), rev.records.end());
  SplitResult c = make_known_open_split(rev, 0.5, 7, 0.1, 0.2);
  CHECK(c.known_classes == a.known_classes);
}

TEST_CASE("split argument and data errors") {
  EmbeddedDataset ds = four_class_dataset(10);
  CHECK_THROWS_AS(make_known_open_split(ds, 0.0, 1, 0.1, 0.2), Error);
  CHECK_THROWS_AS(make_known_open_split(ds, 1.5, 1, 0.1, 0.2), Error);
  CHECK_THROWS_AS(make_known_open_split(ds, 0.5, 1, 0.5, 0.5), Error);
  auto tiny = make_dataset({{"a", {0, 0}}, {"a", {1, 1}}, {"b", {2, 2}},
                            {"b", {3, 3}}, {"b", {4, 4}}});
  try {
    make_known_open_split(tiny, 1.0, 1, 0.1, 0.2);
    FAIL("expected insufficient-data error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientData);
  }
  auto with_open = make_dataset({{"a", {0, 0}}, {"open", {1, 1}}, {"b", {2, 2}},
                                 {"a", {0, 1}}, {"a", {0, 2}}, {"b", {2, 3}},
                                 {"b", {2, 4}}});
  CHECK_THROWS_AS(make_known_open_split(with_open, 1.0, 1, 0.1, 0.2), Error);
}

TEST_CASE("subsample keeps per-class minimums and preserves order") {
  EmbeddedDataset ds;
  ds.label_map = LabelMap({"a", "b"});
  ds.dim = 1;
  for (int i = 0; i < 10; ++i) ds.records.push_back({"a", {double(i)}});
  for (int i = 0; i < 3; ++i) ds.records.push_back({"b", {double(100 + i)}});

  EmbeddedDataset s = subsample_labeled(ds, 0.2, 5);
  std::size_t na = 0, nb = 0;
  for (const auto& r : s.records) (r.label == "a" ? na : nb)++;
  CHECK(na == 2);  // round(10 * 0.2)
  CHECK(nb == 1);  // floor at one record
  // original relative order preserved
  for (std::size_t i = 1; i < s.records.size(); ++i)
    if (s.records[i - 1].label == s.records[i].label)
      CHECK(s.records[i - 1].vec[0] < s.records[i].vec[0]);

  EmbeddedDataset all = subsample_labeled(ds, 1.0, 5);
  REQUIRE(all.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    CHECK(all.records[i].vec == ds.records[i].vec);

  CHECK_THROWS_AS(subsample_labeled(ds, 0.0, 1), Error);
  CHECK_THROWS_AS(subsample_labeled(ds, 1.1, 1), Error);

  EmbeddedDataset s2 = subsample_labeled(ds, 0.2, 5);
  REQUIRE(s2.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(s2.records[i].vec == s.records[i].vec);
}

TEST_CASE("generate_synthetic counts and determinism") {
  EmbeddedDataset ds = generate_synthetic(3, 50, 2, 10.0, 1.0, 99);
  CHECK(ds.size() == 150);
  CHECK(ds.label_map.size() == 3);
  CHECK(ds.dim == 2);
  EmbeddedDataset again = generate_synthetic(3, 50, 2, 10.0, 1.0, 99);
  for (std::size_t i = 0; i < ds.size(); ++i)
    CHECK(ds.records[i].vec == again.records[i].vec);
  CHECK_THROWS_AS(generate_synthetic(3, 50, 2, 10.0, 0.0, 1), Error);
  CHECK_THROWS_AS(generate_synthetic(1, 50, 2, 10.0, 1.0, 1), Error);
  CHECK_THROWS_AS(generate_synthetic(3, 0, 2, 10.0, 1.0, 1), Error);
}

namespace {

AdbModel tiny_model() {
  AdbModel m;
  m.label_map = LabelMap({"a", "b"});
  m.dim = 2;
  m.centroids = Matrix(2, 2);
  m.centroids(0, 0) = 0.25;
  m.centroids(1, 0) = -3.5;
  m.centroids(1, 1) = 1e-9;
  m.params.delta_hat = {0.7, -1.3};
  m.radii = {softplus(0.7), softplus(-1.3)};
  m.config.seed = 77;
  m.calibrated = true;
  return m;
}

}  // namespace

TEST_CASE("model save/load round-trips bit-exactly") {
  auto dir = temp_dir("model_rt");
  AdbModel m = tiny_model();
  save_model(m, (dir / "m.json").string());
  AdbModel back = load_model((dir / "m.json").string());
  CHECK(back.label_map == m.label_map);
  CHECK(back.dim == m.dim);
  CHECK(back.centroids == m.centroids);
  CHECK(back.params.delta_hat == m.params.delta_hat);
  CHECK(back.radii == m.radii);
  CHECK(back.calibrated == m.calibrated);
  CHECK(back.config.seed == m.config.seed);
}

TEST_CASE("model schema violations are model-format errors") {
  auto dir = temp_dir("model_bad");
  auto good = [&] {
    AdbModel m = tiny_model();
    save_model(m, (dir / "m.json").string());
    return adbtest::slurp(dir / "m.json");
  }();

  auto expect_bad = [&](const std::string& content) {
    auto path = write_file(dir / "bad.json", content);
    try {
      load_model(path);
      FAIL("expected model-format error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kModelFormat);
    }
  };

  // radii array shorter than the label list
  std::string trimmed = good;
  auto pos = trimmed.find("\"radii\"");
  REQUIRE(pos != std::string::npos);
  expect_bad(trimmed.replace(pos, trimmed.find(']', pos) - pos + 1,
                             "\"radii\": [1.0]"));
  // negative radius
  std::string negative = good;
  pos = negative.find("\"radii\"");
  expect_bad(negative.replace(pos, negative.find(']', pos) - pos + 1,
                              "\"radii\": [-1.0, 1.0]"));
  // unsupported version
  std::string version = good;
  pos = version.find("\"format_version\": 1");
  REQUIRE(pos != std::string::npos);
  expect_bad(version.replace(pos, std::string("\"format_version\": 1").size(),
                             "\"format_version\": 2"));
  // radii not matching softplus(delta_hat)
  std::string skewed = good;
  pos = skewed.find("\"radii\"");
  expect_bad(skewed.replace(pos, skewed.find(']', pos) - pos + 1,
                            "\"radii\": [2.25, 1.0]"));
}

TEST_CASE("representation save/load round-trips") {
  RepresentationModel m;
  m.label_map = LabelMap({"x", "y", "z"});
  m.in_dim = 2;
  m.out_dim = 3;
  m.w_h = Matrix(3, 2);
  m.w_h(0, 0) = 0.1;
  m.w_h(2, 1) = -7.25;
  m.b_h = {0.0, 1e-7, 2.0};
  m.w_phi = Matrix(3, 3);
  m.w_phi(1, 2) = 42.0;
  m.b_phi = {-1.0, 0.0, 1.0};
  m.config.seed = 5;
  auto dir = temp_dir("rep_rt");
  save_representation(m, (dir / "r.json").string());
  RepresentationModel back = load_representation((dir / "r.json").string());
  CHECK(back.w_h == m.w_h);
  CHECK(back.b_h == m.b_h);
  CHECK(back.w_phi == m.w_phi);
  CHECK(back.b_phi == m.b_phi);
  CHECK(back.label_map == m.label_map);
  // wrong kind is rejected
  auto dir2 = temp_dir("rep_kind");
  AdbModel adb_model = tiny_model();
  save_model(adb_model, (dir2 / "m.json").string());
  CHECK_THROWS_AS(load_representation((dir2 / "m.json").string()), Error);
}

TEST_CASE("split manifest lists classes, seed and counts") {
  EmbeddedDataset ds = four_class_dataset(10);
  SplitResult split = make_known_open_split(ds, 0.5, 7, 0.1, 0.2);
  std::string manifest = split_manifest_json(split);
  CHECK(manifest.find("\"known_classes\"") != std::string::npos);
  CHECK(manifest.find("\"seed\": 7") != std::string::npos);
  CHECK(manifest.find("\"test_open\": 20") != std::string::npos);
}
