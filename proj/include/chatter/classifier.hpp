#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "chatter/features.hpp"
#include "chatter/stability_oracle.hpp"

namespace chatter {

struct Sample {
  FeatureVector x{};
  bool chatter = false;
  double speed_ratio = 0.0;
  double b = 0.0;
  std::size_t speed_index = 0;
  std::size_t depth_index = 0;
};

using Dataset = std::vector<Sample>;

struct LogisticModel {
  FeatureVector weights{};
  double bias = 0.0;

  double score(const FeatureVector& x) const noexcept;
};

// Gradient layout: 8 weight components followed by the bias.
using ModelGradient = std::array<double, kFeatureCount + 1>;

struct TrainOptions {
  double l2_strength = 1.0;
  double tol = 1e-8;
  int max_iter = 100;
};

struct TrainResult {
  LogisticModel model;
  int iterations = 0;
  bool converged = false;  // false: max_iter reached, model still usable
  double gradient_norm = 0.0;
};

struct Prediction {
  double probability;
  bool chatter;
};

struct ConfusionMatrix {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  std::size_t true_negative = 0;

  std::size_t total() const noexcept {
    return true_positive + false_positive + false_negative + true_negative;
  }
  double accuracy() const noexcept {
    return total() == 0 ? 0.0
                        : static_cast<double>(true_positive + true_negative) /
                              static_cast<double>(total());
  }
};

struct Evaluation {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
};

// Uniform random partition; |test| = round(test_fraction * |data|).
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_fraction,
                                             std::uint64_t seed);

// sum log(1 + exp(-z (w.x + c))) + l2/2 |w|^2, z = +1 for chatter.
double logistic_objective(const Dataset& data, const LogisticModel& model, double l2_strength);
ModelGradient logistic_gradient(const Dataset& data, const LogisticModel& model,
                                double l2_strength);

// Damped Newton iterations until the gradient infinity-norm drops below tol.
// Throws SingleClass if only one label is present.
TrainResult train_logistic(const Dataset& train, const TrainOptions& options = {},
                           const LogisticModel& start = {});

// Ties at p = 0.5 count as chatter.
Prediction predict(const LogisticModel& model, const FeatureVector& v);

Evaluation evaluate(const LogisticModel& model, const Dataset& test);

// Model acting on raw features equivalent to normalizing first.
LogisticModel compose_with_normalizer(const LogisticModel& model, const Normalizer& norm);

// Classifies raw features of every grid point with the frozen normalizer and
// model. Grid points without a sample stay non-chatter.
LabelGrid transfer_classify(const LogisticModel& model, const Normalizer& norm,
                            const Dataset& samples, const std::vector<double>& speed_axis,
                            const std::vector<double>& depth_axis);

}  // namespace chatter
