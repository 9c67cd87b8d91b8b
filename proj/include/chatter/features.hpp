#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "chatter/persistence.hpp"

namespace chatter {

inline constexpr std::size_t kFeatureCount = 8;

using FeatureVector = std::array<double, kFeatureCount>;

// Column names in FeatureVector order.
const std::array<std::string, kFeatureCount>& feature_names();

// Polynomial diagram features with ybar the maximum death:
//   f1 = sum x (y - x)            f2 = sum (ybar - y)(y - x)
//   f3 = sum x^2 (y - x)^4        f4 = sum (ybar - y)^2 (y - x)^4
//   f5 = max (y - x)
// All zero for an empty diagram.
struct DiagramFeatures {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
  double f4 = 0.0;
  double f5 = 0.0;
};

DiagramFeatures diagram_features(const PersistenceDiagram& pd);

// [H0 f2, H0 f4, H0 f5, H1 f1..f5]; H0 f1 and f3 vanish identically.
// Throws InvalidDiagram if pd0 has a nonzero birth.
FeatureVector feature_vector(const PersistenceDiagram& pd0, const PersistenceDiagram& pd1);

// z-score standardization fitted on a training set.
struct Normalizer {
  FeatureVector means{};
  FeatureVector stds{};

  bool degenerate(std::size_t i) const noexcept { return !(stds[i] > 0.0); }
  FeatureVector apply(const FeatureVector& v) const;
  FeatureVector invert(const FeatureVector& z) const;
};

Normalizer fit_normalizer(const std::vector<FeatureVector>& train);

inline FeatureVector apply_normalizer(const Normalizer& norm, const FeatureVector& v) {
  return norm.apply(v);
}

}  // namespace chatter
