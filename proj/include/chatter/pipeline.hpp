#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chatter/classifier.hpp"
#include "chatter/embedding.hpp"
#include "chatter/features.hpp"
#include "chatter/persistence.hpp"
#include "chatter/stability_oracle.hpp"
#include "chatter/turning_models.hpp"

namespace chatter {

std::string version_string();

struct GridSpec {
  double speed_min = 0.2;
  double speed_max = 2.0;
  // Depth axis is (depth_min, depth_max]: b_j = depth_min + (depth_max - depth_min) j / H.
  double depth_min = 0.0;
  double depth_max = 0.16;
  std::size_t speed_points = 100;
  std::size_t depth_points = 100;

  std::vector<double> speed_axis() const;
  std::vector<double> depth_axis() const;
  double depth_step() const;
  std::size_t size() const noexcept { return speed_points * depth_points; }
  void validate() const;
};

struct ExperimentConfig {
  GridSpec grid;
  // b and speed_ratio are ignored; each grid point sets its own.
  TurningParams model;
  // seed is ignored; each grid point derives its own.
  SimConfig sim;
  EmbeddingConfig embedding;
  RipsOptions rips;
  std::vector<double> deltas{0.01, 0.03, 0.05};
  std::uint64_t seed = 1;
  // On standardized features; 1.0 underfits the heavy-tailed features.
  double l2_strength = 0.01;
  double test_fraction = 0.2;
  double tol = 1e-8;
  int max_iter = 100;
  // Boundary speeds per grid cell; grid speeds are always exact samples.
  int boundary_refine = 10;
  std::string output_dir = "out";

  void validate() const;
  TrainOptions train_options() const;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
// Missing keys keep their defaults, unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// Independent of execution order: mixes (seed, i, j, delta bits).
std::uint64_t point_seed(std::uint64_t seed, std::size_t i, std::size_t j, double delta);

enum class PointStatus { ok, zero_variance, diverged };
const char* to_string(PointStatus status);

struct PointResult {
  std::size_t speed_index = 0;
  std::size_t depth_index = 0;
  double speed_ratio = 0.0;
  double b = 0.0;
  PointStatus status = PointStatus::ok;
  FeatureVector x{};
  std::size_t delay = 0;
  std::string message;
};

// Intermediate products of one grid point, for inspection.
struct PointTrace {
  TimeSeries series;
  TimeSeries subsampled;
  PointCloud cloud{1, {}};
  RipsDiagrams diagrams;
};

// Single point outside the grid, e.g. for the CLI simulate command.
PointResult simulate_point(const ExperimentConfig& config, double speed_ratio, double b,
                           std::optional<double> delta, std::uint64_t seed,
                           PointTrace* trace = nullptr);

// simulate -> truncate/subsample -> delay -> embed -> H0/H1 -> features.
// delta = nullopt runs the deterministic model. Failures are folded into
// the status; other errors propagate.
PointResult process_point(const ExperimentConfig& config, std::size_t i, std::size_t j,
                          std::optional<double> delta, PointTrace* trace = nullptr);

struct RunOptions {
  unsigned workers = 1;
  // Called after each finished grid point, serialized across workers.
  std::function<void(std::size_t done, std::size_t total)> progress;
};

// All grid points, ordered by i * depth_points + j.
std::vector<PointResult> sweep_points(const ExperimentConfig& config, std::optional<double> delta,
                                      const RunOptions& options = {});

LobeBoundary config_boundary(const ExperimentConfig& config);

// Training rows: zero-variance points labeled non-chatter, diverged points
// dropped.
Dataset to_dataset(const std::vector<PointResult>& points, const LabelGrid& oracle);

// Features CSV: 8 feature columns then speed_ratio,b,label,speed_index,
// depth_index,status. Diverged points are not written.
std::string features_csv(const std::vector<PointResult>& points, const LabelGrid& oracle);
std::string failures_csv(const std::vector<PointResult>& points);
// Rows are checked against the grid axes. status, if given, receives the
// per-row status column.
Dataset parse_features_csv(std::string_view text, const GridSpec& grid,
                           std::vector<PointStatus>* status = nullptr);

nlohmann::json model_to_json(const LogisticModel& model, const ExperimentConfig& config,
                             const TrainResult* fit = nullptr);
LogisticModel model_from_json(const nlohmann::json& j);

// Predicted labels. Points absent from the samples (diverged) count as
// chatter, zero-variance points as non-chatter.
LabelGrid predict_grid(const LogisticModel& model, const Normalizer& norm, const Dataset& samples,
                       const GridSpec& grid, const std::vector<PointStatus>* status = nullptr);

// File names inside the output directory.
namespace files {
inline constexpr const char* kConfig = "config.json";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kBoundary = "boundary.csv";
inline constexpr const char* kLabels = "labels.csv";
inline constexpr const char* kFeatures = "features.csv";
inline constexpr const char* kFailures = "failures.csv";
inline constexpr const char* kModel = "model.json";
inline constexpr const char* kNormalizer = "normalizer.json";
inline constexpr const char* kSplit = "split.json";
inline constexpr const char* kConfusion = "confusion.json";
inline constexpr const char* kMisclassified = "misclassified.csv";
inline constexpr const char* kPredicted = "predicted_labels.csv";
inline constexpr const char* kMapOracle = "map_oracle.svg";
inline constexpr const char* kMapDeterministic = "map_deterministic.svg";
inline constexpr const char* kTransfer = "transfer.json";
std::string delta_tag(double delta);
std::string transfer_features(double delta);
std::string transfer_failures(double delta);
std::string transfer_labels(double delta);
std::string transfer_map(double delta);
}  // namespace files

struct StageReport {
  std::string stage;
  double seconds = 0.0;
  std::map<std::string, std::string> hashes;  // file name -> sha256
  nlohmann::json summary = nlohmann::json::object();
};

// Each stage reads its inputs from and writes its outputs to
// config.output_dir, then records itself in the manifest.
StageReport run_label(const ExperimentConfig& config);
StageReport run_sweep(const ExperimentConfig& config, const RunOptions& options = {});
StageReport run_train(const ExperimentConfig& config);
StageReport run_evaluate(const ExperimentConfig& config);
StageReport run_transfer(const ExperimentConfig& config, const RunOptions& options = {});
StageReport run_render(const ExperimentConfig& config);
std::vector<StageReport> run_all(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace chatter
