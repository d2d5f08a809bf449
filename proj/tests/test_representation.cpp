#include <doctest.h>

#include <cmath>
#include <numeric>

#include "core/representation.hpp"
#include "core/rng.hpp"
#include "test_util.hpp"

using namespace adb;
using adbtest::make_dataset;

namespace {

RepresentationModel identity_model(std::size_t dim) {
  RepresentationModel m;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < dim; ++i) names.push_back("c" + std::to_string(i));
  m.label_map = LabelMap(names);
  m.in_dim = m.out_dim = dim;
  m.w_h = Matrix(dim, dim);
  m.w_phi = Matrix(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    m.w_h(i, i) = 1.0;
    m.w_phi(i, i) = 1.0;
  }
  m.b_h.assign(dim, 0.0);
  m.b_phi.assign(dim, 0.0);
  return m;
}

RepresentationModel random_model(Rng& rng, std::size_t in, std::size_t out,
                                 std::size_t k) {
  RepresentationModel m;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) names.push_back("c" + std::to_string(i));
  m.label_map = LabelMap(names);
  m.in_dim = in;
  m.out_dim = out;
  m.w_h = Matrix(out, in);
  for (auto& v : m.w_h.data) v = rng.uniform(-0.8, 0.8);
  m.b_h.resize(out);
  for (auto& v : m.b_h) v = rng.uniform(-0.5, 0.5);
  m.w_phi = Matrix(k, out);
  for (auto& v : m.w_phi.data) v = rng.uniform(-0.8, 0.8);
  m.b_phi.resize(k);
  for (auto& v : m.b_phi) v = rng.uniform(-0.5, 0.5);
  return m;
}

EmbeddedDataset random_batch_dataset(Rng& rng, std::size_t n, std::size_t dim,
                                     std::size_t k) {
  EmbeddedDataset ds;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) names.push_back("c" + std::to_string(i));
  ds.label_map = LabelMap(names);
  ds.dim = dim;
  for (std::size_t i = 0; i < n; ++i) {
    EmbeddingRecord rec;
    rec.label = names[rng.below(k)];
    rec.vec.resize(dim);
    for (auto& v : rec.vec) v = rng.uniform(-2, 2);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

std::vector<std::size_t> all_indices(const EmbeddedDataset& ds) {
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

TEST_CASE("rectifier zeroes negative pre-activations") {
  auto m = identity_model(2);
  auto f = rep_forward(m, std::vector<double>{-1.0, -3.5});
  CHECK(f.z == std::vector<double>{0.0, 0.0});
  CHECK(f.probs == std::vector<double>{0.5, 0.5});
}

TEST_CASE("softmax of equal logits is uniform") {
  auto m = identity_model(4);
  auto f = rep_forward(m, std::vector<double>{0, 0, 0, 0});
  for (double p : f.probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("hand-computed softmax for logits (2, 0)") {
  auto m = identity_model(2);
  auto f = rep_forward(m, std::vector<double>{2.0, 0.0});
  const double e2 = std::exp(2.0);  // direct exponentiation oracle
  CHECK(f.probs[0] == doctest::Approx(e2 / (e2 + 1.0)).epsilon(1e-14));
  CHECK(f.probs[1] == doctest::Approx(1.0 / (e2 + 1.0)).epsilon(1e-14));
  CHECK(f.probs[0] == doctest::Approx(0.8808).epsilon(1e-4));
  CHECK(cross_entropy(f.probs, 1) == doctest::Approx(2.126928).epsilon(1e-6));
}

TEST_CASE("rep_forward rejects bad inputs") {
  auto m = identity_model(2);
  CHECK_THROWS_AS(rep_forward(m, std::vector<double>{1.0}), Error);
  CHECK_THROWS_AS(rep_forward(m, std::vector<double>{1.0, std::nan("")}), Error);
}

TEST_CASE("cross_entropy basics") {
  CHECK(cross_entropy(std::vector<double>{1.0, 0.0}, 0) == 0.0);
  CHECK(cross_entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 2) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-14));
  CHECK_THROWS_AS(cross_entropy(std::vector<double>{0.5, 0.5}, 2), Error);
  // clamp keeps saturated predictions finite
  CHECK(std::isfinite(cross_entropy(std::vector<double>{1.0, 0.0}, 1)));
}

TEST_CASE("softmax stays normalized at extreme logits") {
  RepresentationModel m = identity_model(2);
  m.b_phi = {1e4, -1e4};
  m.w_phi = Matrix(2, 2);  // zero weights: logits = b_phi
  auto f = rep_forward(m, std::vector<double>{0.0, 0.0});
  double sum = f.probs[0] + f.probs[1];
  CHECK(std::isfinite(f.probs[0]));
  CHECK(std::isfinite(f.probs[1]));
  CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("analytic gradients match finite differences on all four tensors") {
  double worst = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    std::size_t in = 3 + rng.below(3);
    std::size_t out = 3 + rng.below(2);
    std::size_t k = 2 + rng.below(3);
    RepresentationModel m = random_model(rng, in, out, k);
    EmbeddedDataset ds = random_batch_dataset(rng, 6, in, k);
    auto idx = all_indices(ds);
    RepGradients g = rep_loss_gradients(m, ds, idx);

    const double h = 1e-5;
    auto loss_of = [&](RepresentationModel& model) {
      return rep_loss_gradients(model, ds, idx).loss;
    };
    auto check_tensor = [&](std::vector<double>& p, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        double keep = p[i];
        p[i] = keep + h;
        double up = loss_of(m);
        p[i] = keep - h;
        double down = loss_of(m);
        p[i] = keep;
        double numeric = (up - down) / (2.0 * h);
        double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-4});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
      }
    };
    check_tensor(m.w_h.data, g.dw_h.data);
    check_tensor(m.b_h, g.db_h);
    check_tensor(m.w_phi.data, g.dw_phi.data);
    check_tensor(m.b_phi, g.db_phi);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("a small full-batch step never increases the loss") {
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(2000 + seed);
    RepresentationModel m = random_model(rng, 4, 3, 3);
    EmbeddedDataset ds = random_batch_dataset(rng, 12, 4, 3);
    auto idx = all_indices(ds);
    RepGradients g = rep_loss_gradients(m, ds, idx);
    const double lr = 1e-5;
    RepresentationModel stepped = m;
    for (std::size_t i = 0; i < stepped.w_h.data.size(); ++i)
      stepped.w_h.data[i] -= lr * g.dw_h.data[i];
    for (std::size_t i = 0; i < stepped.b_h.size(); ++i)
      stepped.b_h[i] -= lr * g.db_h[i];
    for (std::size_t i = 0; i < stepped.w_phi.data.size(); ++i)
      stepped.w_phi.data[i] -= lr * g.dw_phi.data[i];
    for (std::size_t i = 0; i < stepped.b_phi.size(); ++i)
      stepped.b_phi[i] -= lr * g.db_phi[i];
    double after = rep_loss_gradients(stepped, ds, idx).loss;
    CHECK(after <= g.loss + 1e-12);
  }
}

namespace {

EmbeddedDataset separable_two_class(std::uint64_t seed) {
  Rng rng(seed);
  EmbeddedDataset ds;
  ds.label_map = LabelMap({"left", "right"});
  ds.dim = 2;
  for (int i = 0; i < 30; ++i)
    ds.records.push_back({"left", {rng.normal(0.0, 0.5), rng.normal(0.0, 0.5)}});
  for (int i = 0; i < 30; ++i)
    ds.records.push_back({"right", {rng.normal(10.0, 0.5), rng.normal(10.0, 0.5)}});
  return ds;
}

}  // namespace

TEST_CASE("training separable data reaches train accuracy 1.0") {
  EmbeddedDataset train = separable_two_class(31);
  RepTrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 16;
  cfg.max_epochs = 60;
  cfg.seed = 4;
  RepresentationModel m = train_representation(train, {}, cfg);
  CHECK(validation_accuracy(m, train) == 1.0);
}

TEST_CASE("training is deterministic under the seed") {
  EmbeddedDataset train = separable_two_class(32);
  EmbeddedDataset val = separable_two_class(33);
  RepTrainConfig cfg;
  cfg.max_epochs = 10;
  cfg.batch_size = 8;
  cfg.seed = 9;
  RepresentationModel a = train_representation(train, val, cfg);
  RepresentationModel b = train_representation(train, val, cfg);
  CHECK(a.w_h.data == b.w_h.data);
  CHECK(a.b_h == b.b_h);
  CHECK(a.w_phi.data == b.w_phi.data);
  CHECK(a.b_phi == b.b_phi);
}

TEST_CASE("training rejects bad configs and empty data") {
  EmbeddedDataset train = separable_two_class(34);
  RepTrainConfig cfg;
  cfg.max_epochs = 0;
  CHECK_THROWS_AS(train_representation(train, {}, cfg), Error);
  RepTrainConfig ok;
  EmbeddedDataset empty;
  empty.label_map = train.label_map;
  empty.dim = 2;
  CHECK_THROWS_AS(train_representation(empty, {}, ok), Error);
}

TEST_CASE("embed_dataset applies the representation") {
  auto m = identity_model(2);
  auto nonneg = make_dataset({{"a", {1.0, 2.0}}, {"b", {0.0, 3.0}}});
  EmbeddedDataset e = embed_dataset(m, nonneg);
  REQUIRE(e.size() == 2);
  CHECK(e.dim == 2);
  CHECK(e.records[0].vec == nonneg.records[0].vec);
  CHECK(e.records[1].label == "b");

  auto neg = make_dataset({{"a", {-1.0, -2.0}}});
  EmbeddedDataset z = embed_dataset(m, neg);
  CHECK(z.records[0].vec == std::vector<double>{0.0, 0.0});

  auto wrong = make_dataset({{"a", {1.0, 2.0, 3.0}}});
  CHECK_THROWS_AS(embed_dataset(m, wrong), Error);
}
