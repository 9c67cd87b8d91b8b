#include <cmath>
#include <random>

#include "chatter/errors.hpp"
#include "chatter/io.hpp"
#include "doctest.h"

using namespace chatter;

TEST_CASE("sha256 test vectors") {
  CHECK(io::sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(io::sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("doubles round-trip through text") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng) * std::pow(10.0, (k % 40) - 20);
    CHECK(io::parse_double(io::format_double(v)) == v);
  }
  CHECK_THROWS_AS(io::parse_double("1.5x"), IoError);
  CHECK_THROWS_AS(io::parse_double(""), IoError);
}

TEST_CASE("CSV parsing") {
  const auto t = io::parse_csv("a,b\r\n1,2\n\n3,4\n");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][1] == "4");
  CHECK(t.column("b") == 1);
  CHECK_THROWS_AS(t.column("c"), IoError);
  CHECK_THROWS_AS(io::parse_csv("a,b\n1\n"), IoError);
  CHECK_THROWS_AS(io::parse_csv(""), IoError);
}

TEST_CASE("time series CSV") {
  TimeSeries ts{0.5, 0.25, {1.0, -2.0, 3.5}};
  const TimeSeries back = io::parse_time_series_csv(io::time_series_csv(ts));
  CHECK(back.t0 == 0.5);
  CHECK(back.dt == 0.25);
  CHECK(back.values == ts.values);
}

TEST_CASE("label grid and boundary CSV") {
  LabelGrid g{{0.2, 1.1, 2.0}, {0.01, 0.02}, {{true, false}, {false, false}, {true, true}}};
  const std::string text = io::label_grid_csv(g);
  CHECK(text.substr(0, text.find('\n')) == "speed_ratio,0.01,0.02");
  const LabelGrid back = io::parse_label_grid_csv(text);
  CHECK(back.speed_axis == g.speed_axis);
  CHECK(back.depth_axis == g.depth_axis);
  CHECK(back.labels == g.labels);

  LobeBoundary b;
  b.samples = {{0.3, 0.05, 1.02, 3}, {0.31, 0.04, 1.03, 2}};
  const LobeBoundary bb = io::parse_boundary_csv(io::boundary_csv(b));
  REQUIRE(bb.samples.size() == 2);
  CHECK(bb.samples[1].speed_ratio == 0.31);
  CHECK(bb.samples[1].b_lim == 0.04);
  CHECK(bb.samples[1].omega == 1.03);
  CHECK(bb.samples[1].lobe == 2);
}

TEST_CASE("diagram and point cloud CSV") {
  PersistenceDiagram h0{0, {{0.0, 2.0}, {0.0, 1.0}}};
  PersistenceDiagram h1{1, {{1.0, 1.5}}};
  CHECK(io::diagram_csv({h0, h1}) == "dim,birth,death\n0,0,1\n0,0,2\n1,1,1.5\n");
  PointCloud cloud(2, {0.0, 1.0, 2.5, -3.0});
  CHECK(io::point_cloud_csv(cloud) == "x0,x1\n0,1\n2.5,-3\n");
}

TEST_CASE("normalizer JSON") {
  Normalizer n;
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    n.means[k] = static_cast<double>(k) / 3.0;
    n.stds[k] = k == 2 ? 0.0 : 1.0 + static_cast<double>(k);
  }
  const Normalizer back = io::normalizer_from_json(nlohmann::json::parse(io::normalizer_to_json(n).dump()));
  CHECK(back.means == n.means);
  CHECK(back.stds == n.stds);
  CHECK_THROWS_AS(io::normalizer_from_json(nlohmann::json::parse(R"({"means": [1]})")), IoError);
}
