#include "chatter/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chatter/errors.hpp"

namespace chatter {

PointCloud::PointCloud(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0) throw DomainError("point cloud dimension must be positive");
  if (coords_.size() % dim_ != 0) throw DomainError("coordinate count not a multiple of dim");
}

void EmbeddingConfig::validate() const {
  if (embed_dim == 0) throw DomainError("embed_dim must be positive");
  if (subsample_count < 2 || subsample_count <= embed_dim - 1) {
    throw DomainError("subsample_count too small for the embedding dimension");
  }
}

TimeSeries truncate_and_subsample(const TimeSeries& ts, const EmbeddingConfig& config) {
  config.validate();
  const std::size_t count = config.subsample_count;
  const std::size_t n = ts.size();
  if (n < 2 * count) {
    throw InsufficientSamples("need at least " + std::to_string(2 * count) + " samples, got " +
                              std::to_string(n));
  }

  // Index (n-1)/2 corresponds to T/2; the last index to T.
  const double first = 0.5 * static_cast<double>(n - 1);
  const double last = static_cast<double>(n - 1);
  const double step = (last - first) / static_cast<double>(count - 1);

  TimeSeries out;
  out.values.reserve(count);
  std::size_t first_index = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(std::lround(first + step * static_cast<double>(i)));
    if (i == 0) first_index = idx;
    out.values.push_back(ts.values[std::min(idx, n - 1)]);
  }
  out.t0 = ts.time(first_index);
  out.dt = 0.5 * (ts.end_time() - ts.t0) / static_cast<double>(count - 1);
  return out;
}

std::vector<double> autocorrelation(const TimeSeries& ts, std::size_t max_lag) {
  const std::size_t n = ts.size();
  if (max_lag >= n) throw DomainError("max_lag must be below the series length");
  const auto& y = ts.values;
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = y[i] - mean;
  double denom = 0.0;
  for (double c : centered) denom += c * c;
  if (!(denom > 0.0)) throw ZeroVariance("series is constant");

  std::vector<double> acf(max_lag + 1);
  acf[0] = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) sum += centered[i] * centered[i + k];
    acf[k] = sum / denom;
  }
  return acf;
}

std::size_t first_zero_lag(const std::vector<double>& acf) {
  if (acf.size() < 2) throw DomainError("autocorrelation needs at least one positive lag");
  std::size_t argmin = 1;
  for (std::size_t k = 1; k < acf.size(); ++k) {
    if (acf[k] <= 0.0) return k;
    if (acf[k] < acf[argmin]) argmin = k;
  }
  return argmin;
}

std::size_t select_delay(const TimeSeries& ts) {
  const std::size_t max_lag = std::max<std::size_t>(1, ts.size() / 3);
  return first_zero_lag(autocorrelation(ts, max_lag));
}

PointCloud takens_embed(const TimeSeries& ts, std::size_t eta, std::size_t m) {
  if (eta == 0) throw DomainError("delay must be at least one sample");
  if (m == 0) throw DomainError("embedding dimension must be positive");
  const std::size_t n = ts.size();
  const std::size_t span = (m - 1) * eta;
  if (n < span + 2) throw InsufficientSamples("series too short for the requested embedding");

  const std::size_t count = n - span;
  std::vector<double> coords;
  coords.reserve(count * m);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t d = 0; d < m; ++d) coords.push_back(ts.values[i + d * eta]);
  }
  return PointCloud(m, std::move(coords));
}

}  // namespace chatter
