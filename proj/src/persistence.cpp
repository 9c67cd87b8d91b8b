#include "chatter/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <tuple>
#include <unordered_map>

#include "chatter/errors.hpp"
#include "chatter/union_find.hpp"

namespace chatter {

namespace {

struct Edge {
  double length;
  std::uint32_t u;  // u < v
  std::uint32_t v;
};

bool edge_before(const Edge& a, const Edge& b) {
  return std::tie(a.length, a.u, a.v) < std::tie(b.length, b.u, b.v);
}

// Edges of the complete graph in filtration order: length, then vertex pair.
std::vector<Edge> sorted_edges(const DistanceMatrix& dmat) {
  const std::size_t n = dmat.size();
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) edges.push_back({dmat(i, j), i, j});
  }
  std::sort(edges.begin(), edges.end(), edge_before);
  return edges;
}

// A triangle keyed by diameter and its lexicographic vertex code.
struct Triangle {
  double diameter;
  std::uint64_t code;

  friend bool operator==(const Triangle& a, const Triangle& b) { return a.code == b.code; }
};

struct LaterTriangle {
  bool operator()(const Triangle& a, const Triangle& b) const {
    return std::tie(a.diameter, a.code) > std::tie(b.diameter, b.code);
  }
};

using Column = std::priority_queue<Triangle, std::vector<Triangle>, LaterTriangle>;

class CoboundaryReducer {
 public:
  explicit CoboundaryReducer(const DistanceMatrix& dmat) : dmat_(dmat), n_(dmat.size()) {}

  Triangle cofacet(const Edge& e, std::uint32_t c) const {
    const double diameter = std::max({e.length, dmat_(e.u, c), dmat_(e.v, c)});
    std::uint32_t a = e.u;
    std::uint32_t b = e.v;
    std::uint32_t x = c;
    if (x < a) std::swap(a, x);
    if (x < b) std::swap(b, x);
    if (b < a) std::swap(a, b);
    return {diameter, (static_cast<std::uint64_t>(a) * n_ + b) * n_ + x};
  }

  // With u < v fixed, the lexicographic order of {u, v, c} is increasing in c,
  // so the tie-break among equal diameters is the smallest c.
  Triangle earliest_cofacet(const Edge& e) const {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_c = 0;
    for (std::uint32_t c = 0; c < n_; ++c) {
      if (c == e.u || c == e.v) continue;
      const double diameter = std::max({e.length, dmat_(e.u, c), dmat_(e.v, c)});
      if (diameter < best) {
        best = diameter;
        best_c = c;
        if (diameter == e.length) break;
      }
    }
    return cofacet(e, best_c);
  }

  void push_coboundary(const Edge& e, Column& column) const {
    for (std::uint32_t c = 0; c < n_; ++c) {
      if (c != e.u && c != e.v) column.push(cofacet(e, c));
    }
  }

 private:
  const DistanceMatrix& dmat_;
  std::size_t n_;
};

// Removes cancelling duplicates from the top of the column and returns the
// surviving pivot, leaving it in the column.
bool get_pivot(Column& column, Triangle& pivot) {
  while (!column.empty()) {
    pivot = column.top();
    column.pop();
    if (!column.empty() && column.top() == pivot) {
      column.pop();
      continue;
    }
    column.push(pivot);
    return true;
  }
  return false;
}

// Sorts and drops entries occurring an even number of times (sum over Z/2).
void reduce_mod2(std::vector<std::uint32_t>& entries) {
  std::sort(entries.begin(), entries.end());
  std::size_t out = 0;
  for (std::size_t i = 0; i < entries.size();) {
    std::size_t j = i;
    while (j < entries.size() && entries[j] == entries[i]) ++j;
    if ((j - i) % 2 == 1) entries[out++] = entries[i];
    i = j;
  }
  entries.resize(out);
}

}  // namespace

PersistenceDiagram PersistenceDiagram::sorted() const {
  PersistenceDiagram out = *this;
  std::sort(out.pairs.begin(), out.pairs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.birth, a.death) < std::tie(b.birth, b.death);
  });
  return out;
}

DistanceMatrix pairwise_distances(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  const std::size_t m = cloud.dim();
  DistanceMatrix dmat(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t d = 0; d < m; ++d) {
        const double diff = cloud(i, d) - cloud(j, d);
        sum += diff * diff;
      }
      dmat.set(i, j, std::sqrt(sum));
    }
  }
  return dmat;
}

namespace {

// Shared core: merges recorded during the union-find sweep double as the
// cleared columns of the coboundary reduction.
RipsDiagrams compute_diagrams(const DistanceMatrix& dmat, bool want_h1) {
  const std::size_t n = dmat.size();
  RipsDiagrams out;
  if (n < 2) return out;

  const std::vector<Edge> edges = sorted_edges(dmat);
  std::vector<bool> merges(edges.size(), false);
  {
    UnionFind components(n);
    out.h0.pairs.reserve(n - 1);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      merges[k] = components.unite(edges[k].u, edges[k].v);
      if (merges[k] && edges[k].length > 0.0) out.h0.pairs.push_back({0.0, edges[k].length});
    }
  }
  if (!want_h1 || n < 3) return out;

  CoboundaryReducer reducer(dmat);
  std::unordered_map<std::uint64_t, std::uint32_t> pivot_owner;
  // Reduction columns as edge combinations, only for non-trivial columns.
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> reduction;
  pivot_owner.reserve(edges.size());

  auto record = [&](const Edge& e, const Triangle& t) {
    if (t.diameter > e.length) out.h1.pairs.push_back({e.length, t.diameter});
  };

  Column column;
  std::vector<std::uint32_t> combination;
  // Cohomology: edge columns in decreasing filtration order, pivot = earliest
  // cofacet.
  for (std::size_t k = edges.size(); k-- > 0;) {
    if (merges[k]) continue;
    const auto index = static_cast<std::uint32_t>(k);
    const Edge& e = edges[k];

    const Triangle first = reducer.earliest_cofacet(e);
    if (!pivot_owner.contains(first.code)) {
      pivot_owner.emplace(first.code, index);
      record(e, first);
      continue;
    }

    column = Column();
    combination.assign(1, index);
    reducer.push_coboundary(e, column);
    Triangle pivot{};
    while (get_pivot(column, pivot)) {
      auto owner = pivot_owner.find(pivot.code);
      if (owner == pivot_owner.end()) {
        pivot_owner.emplace(pivot.code, index);
        reduce_mod2(combination);
        reduction.emplace(index, combination);
        record(e, pivot);
        break;
      }
      const std::uint32_t other = owner->second;
      auto stored = reduction.find(other);
      if (stored == reduction.end()) {
        reducer.push_coboundary(edges[other], column);
        combination.push_back(other);
      } else {
        for (std::uint32_t x : stored->second) {
          reducer.push_coboundary(edges[x], column);
          combination.push_back(x);
        }
      }
    }
  }
  return out;
}

void check_capacity(const DistanceMatrix& dmat, const RipsOptions& options) {
  if (dmat.size() > options.max_points) {
    throw CapacityExceeded("rips_h1 supports at most " + std::to_string(options.max_points) +
                           " points, got " + std::to_string(dmat.size()));
  }
}

}  // namespace

PersistenceDiagram rips_h0(const DistanceMatrix& dmat) {
  return compute_diagrams(dmat, false).h0;
}

PersistenceDiagram rips_h1(const DistanceMatrix& dmat, const RipsOptions& options) {
  check_capacity(dmat, options);
  return compute_diagrams(dmat, true).h1;
}

RipsDiagrams rips_diagrams(const DistanceMatrix& dmat, const RipsOptions& options) {
  check_capacity(dmat, options);
  return compute_diagrams(dmat, true);
}

double max_persistence(const PersistenceDiagram& pd) {
  double best = 0.0;
  for (const auto& p : pd.pairs) best = std::max(best, p.persistence());
  return best;
}

}  // namespace chatter
