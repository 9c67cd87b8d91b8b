#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "../support/brute_force_persistence.hpp"
#include "chatter/errors.hpp"
#include "chatter/persistence.hpp"
#include "doctest.h"

using namespace chatter;

namespace {

PointCloud cloud_of(std::size_t dim, std::vector<double> coords) { return PointCloud(dim, std::move(coords)); }

PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, std::size_t dim = 3) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> coords(n * dim);
  for (double& c : coords) c = u(rng);
  return PointCloud(dim, std::move(coords));
}

// Dyadic coordinates keep translated distances bit-identical.
PointCloud dyadic_cloud(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> u(-64, 64);
  std::vector<double> coords(n * 3);
  for (double& c : coords) c = u(rng) / 16.0;
  return PointCloud(3, std::move(coords));
}

bool same_pairs(const PersistenceDiagram& a, const PersistenceDiagram& b) {
  return a.sorted().pairs == b.sorted().pairs;
}

bool close_pairs(const PersistenceDiagram& a, const PersistenceDiagram& b, double tol) {
  const auto sa = a.sorted().pairs;
  const auto sb = b.sorted().pairs;
  if (sa.size() != sb.size()) return false;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (std::abs(sa[i].birth - sb[i].birth) > tol || std::abs(sa[i].death - sb[i].death) > tol) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("pairwise distances") {
  const DistanceMatrix d = pairwise_distances(cloud_of(3, {0, 0, 0, 3, 4, 0, 3, 4, 0}));
  CHECK(d(0, 1) == 5.0);
  CHECK(d(1, 2) == 0.0);
  std::mt19937_64 rng(1);
  const DistanceMatrix r = pairwise_distances(random_cloud(rng, 10));
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(r(i, i) == 0.0);
    for (std::size_t j = 0; j < 10; ++j) {
      CHECK(r(i, j) == r(j, i));
      for (std::size_t k = 0; k < 10; ++k) CHECK(r(i, k) <= r(i, j) + r(j, k) + 1e-12);
    }
  }
}

TEST_CASE("H0 of small configurations") {
  const auto two = rips_h0(pairwise_distances(cloud_of(1, {0.0, 2.5})));
  REQUIRE(two.size() == 1);
  CHECK(two.pairs[0] == PersistencePair{0.0, 2.5});

  const auto line = rips_h0(pairwise_distances(cloud_of(1, {0.0, 1.0, 3.0}))).sorted();
  REQUIRE(line.size() == 2);
  CHECK(line.pairs[0] == PersistencePair{0.0, 1.0});
  CHECK(line.pairs[1] == PersistencePair{0.0, 2.0});

  std::mt19937_64 rng(3);
  for (std::size_t n : {2u, 5u, 40u}) CHECK(rips_h0(pairwise_distances(random_cloud(rng, n))).size() == n - 1);
}

TEST_CASE("H1 of small configurations") {
  SUBCASE("unit square") {
    const auto pd = rips_h1(pairwise_distances(cloud_of(2, {0, 0, 1, 0, 1, 1, 0, 1})));
    REQUIRE(pd.size() == 1);
    CHECK(std::abs(pd.pairs[0].birth - 1.0) < 1e-12);
    CHECK(std::abs(pd.pairs[0].death - std::sqrt(2.0)) < 1e-12);
    CHECK(max_persistence(pd) == doctest::Approx(std::sqrt(2.0) - 1.0));
  }
  SUBCASE("equilateral triangle") {
    const double h = std::sqrt(3.0) / 2.0;
    CHECK(rips_h1(pairwise_distances(cloud_of(2, {0, 0, 1, 0, 0.5, h}))).empty());
  }
  SUBCASE("collinear points") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<double> xs(30);
    for (double& x : xs) x = u(rng);
    CHECK(rips_h1(pairwise_distances(cloud_of(1, xs))).empty());
  }
  SUBCASE("capacity guard") {
    std::mt19937_64 rng(2);
    const DistanceMatrix d = pairwise_distances(random_cloud(rng, 12));
    CHECK_THROWS_AS(rips_h1(d, RipsOptions{10}), CapacityExceeded);
    CHECK_NOTHROW(rips_h1(d, RipsOptions{12}));
  }
}

TEST_CASE("max persistence") {
  CHECK(max_persistence({1, {{1, 3}, {2, 4}}}) == 2.0);
  CHECK(max_persistence({1, {}}) == 0.0);
}

TEST_CASE("agrees with the brute-force reduction on tiny clouds") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> count(3, 7);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const DistanceMatrix d = pairwise_distances(random_cloud(rng, count(rng)));
    const auto oracle = testing::brute_force_rips(d);
    if (!same_pairs(rips_h0(d), oracle.h0) || !same_pairs(rips_h1(d), oracle.h1)) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("agrees with the brute-force reduction on tied and larger clouds") {
  std::mt19937_64 rng(77);
  // Integer grids produce many equal distances.
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> u(0, 3);
    std::vector<double> coords(10 * 2);
    for (double& c : coords) c = u(rng);
    const DistanceMatrix d = pairwise_distances(PointCloud(2, coords));
    const auto oracle = testing::brute_force_rips(d);
    CHECK(same_pairs(rips_h1(d), oracle.h1));
    CHECK(same_pairs(rips_h0(d), oracle.h0));
  }
  for (int trial = 0; trial < 5; ++trial) {
    const DistanceMatrix d = pairwise_distances(random_cloud(rng, 18, 2));
    CHECK(same_pairs(rips_h1(d), testing::brute_force_rips(d).h1));
  }
}

TEST_CASE("H0 deaths are the minimum spanning tree edge lengths") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const DistanceMatrix d = pairwise_distances(random_cloud(rng, 25));
    const auto pd = rips_h0(d).sorted();
    const auto mst = testing::prim_mst_lengths(d);
    REQUIRE(pd.size() == mst.size());
    for (std::size_t i = 0; i < mst.size(); ++i) {
      CHECK(pd.pairs[i].birth == 0.0);
      CHECK(pd.pairs[i].death == mst[i]);
    }
  }
}

TEST_CASE("diagrams are invariant under point permutation") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud cloud = random_cloud(rng, 40);
    std::vector<std::size_t> order(cloud.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> coords;
    for (auto i : order)
      for (std::size_t d = 0; d < 3; ++d) coords.push_back(cloud(i, d));
    const DistanceMatrix a = pairwise_distances(cloud);
    const DistanceMatrix b = pairwise_distances(PointCloud(3, coords));
    CHECK(same_pairs(rips_h0(a), rips_h0(b)));
    CHECK(same_pairs(rips_h1(a), rips_h1(b)));
  }
}

TEST_CASE("rigid motions and scaling") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud cloud = dyadic_cloud(rng, 30);
    std::vector<double> moved;
    std::vector<double> doubled;
    std::vector<double> tripled;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      // Axis permutation with a reflection, then an integer translation.
      moved.push_back(-cloud(i, 2) + 3.0);
      moved.push_back(cloud(i, 0) - 7.0);
      moved.push_back(cloud(i, 1) + 1.0);
      for (std::size_t d = 0; d < 3; ++d) {
        doubled.push_back(2.0 * cloud(i, d));
        tripled.push_back(3.0 * cloud(i, d));
      }
    }
    const DistanceMatrix base = pairwise_distances(cloud);
    const auto h0 = rips_h0(base);
    const auto h1 = rips_h1(base);
    const DistanceMatrix rigid = pairwise_distances(PointCloud(3, moved));
    CHECK(same_pairs(rips_h0(rigid), h0));
    CHECK(same_pairs(rips_h1(rigid), h1));

    auto scaled = [](PersistenceDiagram pd, double c) {
      for (auto& p : pd.pairs) {
        p.birth *= c;
        p.death *= c;
      }
      return pd;
    };
    const DistanceMatrix twice = pairwise_distances(PointCloud(3, doubled));
    CHECK(same_pairs(rips_h1(twice), scaled(h1, 2.0)));
    const DistanceMatrix thrice = pairwise_distances(PointCloud(3, tripled));
    CHECK(close_pairs(rips_h1(thrice), scaled(h1, 3.0), 1e-12));
    CHECK(close_pairs(rips_h0(thrice), scaled(h0, 3.0), 1e-12));
  }
}

TEST_CASE("combined entry point matches the separate diagrams") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const DistanceMatrix d = pairwise_distances(random_cloud(rng, 35));
    const RipsDiagrams both = rips_diagrams(d);
    CHECK(both.h0.dim == 0);
    CHECK(both.h1.dim == 1);
    CHECK(same_pairs(both.h0, rips_h0(d)));
    CHECK(same_pairs(both.h1, rips_h1(d)));
  }
}
