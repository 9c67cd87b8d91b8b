#include <cmath>
#include <random>
#include <set>

#include "chatter/classifier.hpp"
#include "chatter/errors.hpp"
#include "doctest.h"

using namespace chatter;

namespace {

Dataset noisy_two_class(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> n01;
  Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.chatter = i % 2 == 0;
    for (std::size_t k = 0; k < kFeatureCount; ++k) s.x[k] = n01(rng) + (s.chatter ? 0.7 : -0.4) * (k % 3 == 0);
    s.speed_index = i;
    data.push_back(s);
  }
  return data;
}

LogisticModel random_model(std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  LogisticModel m;
  for (double& w : m.weights) w = n01(rng);
  m.bias = n01(rng);
  return m;
}

}  // namespace

TEST_CASE("train/test split") {
  Dataset data(10000);
  for (std::size_t i = 0; i < data.size(); ++i) data[i].speed_index = i;
  const auto [train, test] = train_test_split(data, 0.2, 42);
  CHECK(train.size() == 8000);
  CHECK(test.size() == 2000);
  std::set<std::size_t> seen;
  for (const auto& s : train) seen.insert(s.speed_index);
  for (const auto& s : test) CHECK(seen.insert(s.speed_index).second);
  CHECK(seen.size() == data.size());

  const auto again = train_test_split(data, 0.2, 42);
  CHECK(again.second.size() == test.size());
  bool identical = true;
  for (std::size_t i = 0; i < test.size(); ++i) identical &= again.second[i].speed_index == test[i].speed_index;
  CHECK(identical);
  const auto other = train_test_split(data, 0.2, 43);
  bool differs = false;
  for (std::size_t i = 0; i < test.size(); ++i) differs |= other.second[i].speed_index != test[i].speed_index;
  CHECK(differs);
  CHECK_THROWS_AS(train_test_split(Dataset(4), 0.2, 1), DomainError);
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(1);
  const Dataset data = noisy_two_class(rng, 60);
  for (int trial = 0; trial < 20; ++trial) {
    const LogisticModel m = random_model(rng);
    const ModelGradient g = logistic_gradient(data, m, 0.7);
    for (std::size_t k = 0; k <= kFeatureCount; ++k) {
      const double h = 1e-5;
      LogisticModel up = m;
      LogisticModel down = m;
      if (k < kFeatureCount) {
        up.weights[k] += h;
        down.weights[k] -= h;
      } else {
        up.bias += h;
        down.bias -= h;
      }
      const double fd = (logistic_objective(data, up, 0.7) - logistic_objective(data, down, 0.7)) / (2 * h);
      CHECK(std::abs(fd - g[k]) <= 1e-6 * std::max(1.0, std::abs(g[k])));
    }
  }
}

TEST_CASE("separable data with strong regularization") {
  Dataset data;
  for (int i = -10; i <= 10; ++i) {
    if (i == 0) continue;
    Sample s;
    s.x[0] = i;
    s.chatter = i > 0;
    data.push_back(s);
  }
  TrainOptions opts;
  opts.l2_strength = 5.0;
  const TrainResult r = train_logistic(data, opts);
  CHECK(r.converged);
  CHECK(r.gradient_norm < opts.tol);
  CHECK(evaluate(r.model, data).accuracy == 1.0);
  CHECK(std::isfinite(r.model.weights[0]));
  CHECK(std::abs(r.model.weights[0]) < 10.0);
}

TEST_CASE("symmetric data gives a zero bias") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  Dataset data;
  for (int i = 0; i < 100; ++i) {
    Sample s;
    for (double& x : s.x) x = n01(rng) + 0.5;
    s.chatter = true;
    Sample mirror = s;
    for (double& x : mirror.x) x = -x;
    mirror.chatter = false;
    data.push_back(s);
    data.push_back(mirror);
  }
  const TrainResult r = train_logistic(data);
  CHECK(r.converged);
  CHECK(std::abs(r.model.bias) < 1e-8);
}

TEST_CASE("single class is rejected") {
  Dataset data(10);
  CHECK_THROWS_AS(train_logistic(data), SingleClass);
}

TEST_CASE("non-convergence is reported, not thrown") {
  std::mt19937_64 rng(2);
  const Dataset data = noisy_two_class(rng, 200);
  TrainOptions opts;
  opts.max_iter = 1;
  const TrainResult r = train_logistic(data, opts);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 1);
}

TEST_CASE("objective is convex: different starts agree") {
  std::mt19937_64 rng(3);
  const Dataset data = noisy_two_class(rng, 400);
  const TrainOptions opts;
  const TrainResult a = train_logistic(data, opts);
  const TrainResult b = train_logistic(data, opts, random_model(rng));
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(std::abs(logistic_objective(data, a.model, 1.0) - logistic_objective(data, b.model, 1.0)) < 10 * opts.tol);
  for (const auto& s : data) CHECK(predict(a.model, s.x).chatter == predict(b.model, s.x).chatter);

  const TrainResult again = train_logistic(data, opts);
  CHECK(again.model.weights == a.model.weights);
  CHECK(again.model.bias == a.model.bias);
}

TEST_CASE("prediction") {
  const LogisticModel zero;
  const Prediction p = predict(zero, FeatureVector{});
  CHECK(p.probability == 0.5);
  CHECK(p.chatter);

  LogisticModel m;
  m.weights[0] = 1.0;
  FeatureVector v{};
  v[0] = 800.0;
  CHECK(predict(m, v).probability == 1.0);
  v[0] = -800.0;
  CHECK(predict(m, v).probability == 0.0);
  CHECK_FALSE(predict(m, v).chatter);
  double last = 0.0;
  for (double s = -5.0; s <= 5.0; s += 0.5) {
    v[0] = s;
    const double prob = predict(m, v).probability;
    CHECK(prob > last);
    last = prob;
  }
}

TEST_CASE("evaluation counts") {
  std::mt19937_64 rng(4);
  Dataset data = noisy_two_class(rng, 101);
  LogisticModel always;
  always.bias = 10.0;
  const Evaluation e = evaluate(always, data);
  CHECK(e.confusion.total() == data.size());
  CHECK(e.confusion.false_negative == 0);
  CHECK(e.confusion.true_negative == 0);
  CHECK(e.accuracy == doctest::Approx(51.0 / 101.0));

  // A model that reads the label off a planted feature is perfect.
  for (auto& s : data) s.x[7] = s.chatter ? 1.0 : -1.0;
  LogisticModel oracle;
  oracle.weights[7] = 5.0;
  const Evaluation perfect = evaluate(oracle, data);
  CHECK(perfect.confusion.false_positive == 0);
  CHECK(perfect.confusion.false_negative == 0);
  CHECK(perfect.accuracy == 1.0);
  CHECK_THROWS_AS(evaluate(oracle, {}), DomainError);
}

TEST_CASE("normalizer composes affinely into the model") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<FeatureVector> raw(50);
  for (auto& v : raw)
    for (double& x : v) x = u(rng) * 100.0 + 7.0;
  raw[0][2] = raw[1][2];
  for (auto& v : raw) v[2] = raw[0][2];  // one degenerate column
  const Normalizer norm = fit_normalizer(raw);
  REQUIRE(norm.degenerate(2));
  const LogisticModel model = random_model(rng);
  const LogisticModel composed = compose_with_normalizer(model, norm);
  for (int trial = 0; trial < 200; ++trial) {
    FeatureVector v;
    for (double& x : v) x = u(rng) * 150.0;
    const double direct = model.score(norm.apply(v));
    CHECK(composed.score(v) == doctest::Approx(direct).epsilon(1e-9));
    if (std::abs(direct) > 1e-6) CHECK(predict(composed, v).chatter == predict(model, norm.apply(v)).chatter);
  }
}

TEST_CASE("transfer classification fills the grid by index") {
  Normalizer norm;
  norm.stds.fill(1.0);
  LogisticModel model;
  model.weights[0] = 1.0;
  Dataset samples;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      Sample s;
      s.speed_index = i;
      s.depth_index = j;
      s.x[0] = j >= 1 ? 1.0 : -1.0;
      samples.push_back(s);
    }
  }
  const LabelGrid grid = transfer_classify(model, norm, samples, {0.5, 1.0}, {0.01, 0.02, 0.03});
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK_FALSE(grid.labels[i][0]);
    CHECK(grid.labels[i][1]);
    CHECK(grid.labels[i][2]);
  }
  samples[0].depth_index = 7;
  CHECK_THROWS_AS(transfer_classify(model, norm, samples, {0.5, 1.0}, {0.01, 0.02, 0.03}), DomainError);
}
