#include "chatter/classifier.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "chatter/errors.hpp"

namespace chatter {

namespace {

constexpr std::size_t kParams = kFeatureCount + 1;

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double label_sign(const Sample& s) { return s.chatter ? 1.0 : -1.0; }

double inf_norm(const ModelGradient& g) {
  double m = 0.0;
  for (double v : g) m = std::max(m, std::abs(v));
  return m;
}

LogisticModel step_model(const LogisticModel& m, const Eigen::VectorXd& dir, double t) {
  LogisticModel out = m;
  for (std::size_t i = 0; i < kFeatureCount; ++i) out.weights[i] += t * dir[static_cast<Eigen::Index>(i)];
  out.bias += t * dir[kFeatureCount];
  return out;
}

}  // namespace

double LogisticModel::score(const FeatureVector& x) const noexcept {
  double s = bias;
  for (std::size_t i = 0; i < kFeatureCount; ++i) s += weights[i] * x[i];
  return s;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_fraction,
                                             std::uint64_t seed) {
  if (data.size() < 5) throw DomainError("train_test_split needs at least 5 rows");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw DomainError("test_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto test_count =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(data.size())));
  std::vector<std::size_t> test_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_count));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(test_count), order.end());
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  std::pair<Dataset, Dataset> out;
  out.first.reserve(train_idx.size());
  out.second.reserve(test_idx.size());
  for (auto i : train_idx) out.first.push_back(data[i]);
  for (auto i : test_idx) out.second.push_back(data[i]);
  return out;
}

double logistic_objective(const Dataset& data, const LogisticModel& model, double l2_strength) {
  double loss = 0.0;
  for (const auto& s : data) loss += softplus(-label_sign(s) * model.score(s.x));
  double w2 = 0.0;
  for (double w : model.weights) w2 += w * w;
  return loss + 0.5 * l2_strength * w2;
}

ModelGradient logistic_gradient(const Dataset& data, const LogisticModel& model,
                                double l2_strength) {
  ModelGradient g{};
  for (const auto& s : data) {
    const double z = label_sign(s);
    const double coef = -z * sigmoid(-z * model.score(s.x));
    for (std::size_t i = 0; i < kFeatureCount; ++i) g[i] += coef * s.x[i];
    g[kFeatureCount] += coef;
  }
  for (std::size_t i = 0; i < kFeatureCount; ++i) g[i] += l2_strength * model.weights[i];
  return g;
}

TrainResult train_logistic(const Dataset& train, const TrainOptions& options,
                           const LogisticModel& start) {
  const bool has_pos = std::any_of(train.begin(), train.end(), [](const Sample& s) { return s.chatter; });
  const bool has_neg = std::any_of(train.begin(), train.end(), [](const Sample& s) { return !s.chatter; });
  if (!has_pos || !has_neg) throw SingleClass("training set contains a single label");
  if (!(options.l2_strength >= 0.0)) throw DomainError("l2_strength must be >= 0");

  const double lambda = options.l2_strength;
  TrainResult result{start, 0, false, 0.0};
  double objective = logistic_objective(train, result.model, lambda);

  for (;;) {
    const ModelGradient grad = logistic_gradient(train, result.model, lambda);
    result.gradient_norm = inf_norm(grad);
    if (result.gradient_norm < options.tol) {
      result.converged = true;
      break;
    }
    if (result.iterations >= options.max_iter) break;
    ++result.iterations;

    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(kParams, kParams);
    Eigen::VectorXd row(kParams);
    for (const auto& s : train) {
      const double p = sigmoid(result.model.score(s.x));
      for (std::size_t i = 0; i < kFeatureCount; ++i) row[static_cast<Eigen::Index>(i)] = s.x[i];
      row[kFeatureCount] = 1.0;
      hess.selfadjointView<Eigen::Lower>().rankUpdate(row, p * (1.0 - p));
    }
    hess = hess.selfadjointView<Eigen::Lower>();
    for (std::size_t i = 0; i < kFeatureCount; ++i) hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += lambda;
    hess.diagonal().array() += 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());

    Eigen::VectorXd g(kParams);
    for (std::size_t i = 0; i < kParams; ++i) g[static_cast<Eigen::Index>(i)] = grad[i];
    Eigen::VectorXd dir = -hess.ldlt().solve(g);
    double slope = g.dot(dir);
    if (!(slope < 0.0) || !dir.allFinite()) {
      dir = -g;
      slope = -g.squaredNorm();
    }

    // Armijo backtracking.
    double t = 1.0;
    LogisticModel candidate = step_model(result.model, dir, t);
    double cand_obj = logistic_objective(train, candidate, lambda);
    while (cand_obj > objective + 1e-4 * t * slope && t > 1e-12) {
      t *= 0.5;
      candidate = step_model(result.model, dir, t);
      cand_obj = logistic_objective(train, candidate, lambda);
    }
    if (cand_obj > objective) {
      // No descent possible at working precision.
      break;
    }
    result.model = candidate;
    objective = cand_obj;
  }
  return result;
}

Prediction predict(const LogisticModel& model, const FeatureVector& v) {
  const double p = sigmoid(model.score(v));
  return {p, p >= 0.5};
}

Evaluation evaluate(const LogisticModel& model, const Dataset& test) {
  if (test.empty()) throw DomainError("evaluate needs a non-empty test set");
  ConfusionMatrix cm;
  for (const auto& s : test) {
    const bool predicted = predict(model, s.x).chatter;
    if (predicted && s.chatter) ++cm.true_positive;
    if (predicted && !s.chatter) ++cm.false_positive;
    if (!predicted && s.chatter) ++cm.false_negative;
    if (!predicted && !s.chatter) ++cm.true_negative;
  }
  return {cm, cm.accuracy()};
}

LogisticModel compose_with_normalizer(const LogisticModel& model, const Normalizer& norm) {
  LogisticModel raw;
  raw.bias = model.bias;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (norm.degenerate(i)) continue;
    raw.weights[i] = model.weights[i] / norm.stds[i];
    raw.bias -= model.weights[i] * norm.means[i] / norm.stds[i];
  }
  return raw;
}

LabelGrid transfer_classify(const LogisticModel& model, const Normalizer& norm,
                            const Dataset& samples, const std::vector<double>& speed_axis,
                            const std::vector<double>& depth_axis) {
  LabelGrid grid{speed_axis, depth_axis, {}};
  grid.labels.assign(speed_axis.size(), std::vector<bool>(depth_axis.size(), false));
  for (const auto& s : samples) {
    if (s.speed_index >= speed_axis.size() || s.depth_index >= depth_axis.size()) {
      throw DomainError("sample grid index outside the label grid");
    }
    grid.labels[s.speed_index][s.depth_index] = predict(model, norm.apply(s.x)).chatter;
  }
  return grid;
}

}  // namespace chatter
