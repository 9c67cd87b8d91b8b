#pragma once

#include <cstddef>
#include <vector>

#include "chatter/embedding.hpp"

namespace chatter {

class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t n) : n_(n), entries_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double d) noexcept {
    entries_[i * n_ + j] = d;
    entries_[j * n_ + i] = d;
  }

 private:
  std::size_t n_;
  std::vector<double> entries_;
};

struct PersistencePair {
  double birth;
  double death;

  double persistence() const noexcept { return death - birth; }
  friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

struct PersistenceDiagram {
  int dim = 0;
  std::vector<PersistencePair> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
  // Copy with pairs sorted by (birth, death), for multiset comparison.
  PersistenceDiagram sorted() const;
};

struct RipsOptions {
  std::size_t max_points = 400;
};

DistanceMatrix pairwise_distances(const PointCloud& cloud);

// Deaths of the 0-dimensional classes: minimum spanning tree edge lengths,
// essential class dropped, zero-length merges discarded.
PersistenceDiagram rips_h0(const DistanceMatrix& dmat);

// Finite 1-dimensional pairs of the Rips filtration up to triangles, with
// simplices entering at their diameter. Throws CapacityExceeded above
// options.max_points.
PersistenceDiagram rips_h1(const DistanceMatrix& dmat, const RipsOptions& options = {});

struct RipsDiagrams {
  PersistenceDiagram h0{0, {}};
  PersistenceDiagram h1{1, {}};
};

// Both diagrams from a single pass over the sorted edges.
RipsDiagrams rips_diagrams(const DistanceMatrix& dmat, const RipsOptions& options = {});

double max_persistence(const PersistenceDiagram& pd);

}  // namespace chatter
