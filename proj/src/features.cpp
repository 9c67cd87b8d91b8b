#include "chatter/features.hpp"

#include <algorithm>
#include <cmath>

#include "chatter/errors.hpp"

namespace chatter {

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "h0_f2", "h0_f4", "h0_f5", "h1_f1", "h1_f2", "h1_f3", "h1_f4", "h1_f5"};
  return names;
}

DiagramFeatures diagram_features(const PersistenceDiagram& pd) {
  DiagramFeatures f;
  if (pd.empty()) return f;
  double ybar = pd.pairs.front().death;
  for (const auto& p : pd.pairs) ybar = std::max(ybar, p.death);

  for (const auto& [x, y] : pd.pairs) {
    const double life = y - x;
    const double life4 = (life * life) * (life * life);
    const double gap = ybar - y;
    f.f1 += x * life;
    f.f2 += gap * life;
    f.f3 += x * x * life4;
    f.f4 += gap * gap * life4;
    f.f5 = std::max(f.f5, life);
  }
  return f;
}

FeatureVector feature_vector(const PersistenceDiagram& pd0, const PersistenceDiagram& pd1) {
  for (const auto& p : pd0.pairs) {
    if (p.birth != 0.0) throw InvalidDiagram("dimension-0 diagram has a nonzero birth");
  }
  const DiagramFeatures h0 = diagram_features(pd0);
  const DiagramFeatures h1 = diagram_features(pd1);
  return {h0.f2, h0.f4, h0.f5, h1.f1, h1.f2, h1.f3, h1.f4, h1.f5};
}

FeatureVector Normalizer::apply(const FeatureVector& v) const {
  FeatureVector z{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    z[i] = degenerate(i) ? 0.0 : (v[i] - means[i]) / stds[i];
  }
  return z;
}

FeatureVector Normalizer::invert(const FeatureVector& z) const {
  FeatureVector v{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    v[i] = degenerate(i) ? means[i] : z[i] * stds[i] + means[i];
  }
  return v;
}

Normalizer fit_normalizer(const std::vector<FeatureVector>& train) {
  if (train.empty()) throw DomainError("fit_normalizer needs a non-empty training set");
  Normalizer norm;
  const auto count = static_cast<double>(train.size());
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    double mean = 0.0;
    for (const auto& v : train) mean += v[i];
    mean /= count;
    double var = 0.0;
    for (const auto& v : train) var += (v[i] - mean) * (v[i] - mean);
    norm.means[i] = mean;
    const double sd = std::sqrt(var / count);
    // Relative cutoff so rounding noise on a constant column is not mistaken
    // for spread.
    norm.stds[i] = sd > 1e-12 * std::abs(mean) ? sd : 0.0;
  }
  return norm;
}

}  // namespace chatter
