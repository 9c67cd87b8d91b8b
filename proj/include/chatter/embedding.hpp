#pragma once

#include <cstddef>
#include <vector>

#include "chatter/turning_models.hpp"

namespace chatter {

// Row-major list of points, all of dimension `dim`.
class PointCloud {
 public:
  PointCloud(std::size_t dim, std::vector<double> coords);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return coords_.size() / dim_; }
  double operator()(std::size_t point, std::size_t axis) const {
    return coords_[point * dim_ + axis];
  }
  const std::vector<double>& coords() const noexcept { return coords_; }

 private:
  std::size_t dim_;
  std::vector<double> coords_;
};

struct EmbeddingConfig {
  std::size_t subsample_count = 264;
  std::size_t embed_dim = 3;

  void validate() const;
};

// Keeps [T/2, T] and picks subsample_count evenly spaced samples from it.
TimeSeries truncate_and_subsample(const TimeSeries& ts, const EmbeddingConfig& config);

// Biased sample autocorrelation r(0..max_lag), r(0) = 1. Throws ZeroVariance
// on a constant series.
std::vector<double> autocorrelation(const TimeSeries& ts, std::size_t max_lag);

// Smallest k >= 1 with acf[k] <= 0, else the argmin of acf over k >= 1.
std::size_t first_zero_lag(const std::vector<double>& acf);

// Delay lag used by the pipeline: first zero of the acf up to floor(N/3).
std::size_t select_delay(const TimeSeries& ts);

// Points (y_n, y_{n+eta}, ..., y_{n+(m-1)eta}).
PointCloud takens_embed(const TimeSeries& ts, std::size_t eta, std::size_t m);

}  // namespace chatter
