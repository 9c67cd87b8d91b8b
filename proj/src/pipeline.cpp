#include "chatter/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "chatter/errors.hpp"
#include "chatter/io.hpp"
#include "chatter/render.hpp"

#ifndef CHATTER_VERSION
#define CHATTER_VERSION "0.0.0"
#endif

namespace chatter {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version_string() { return "chatter " CHATTER_VERSION; }

// ---------------------------------------------------------------- config

namespace {

double speed_at(const GridSpec& g, std::size_t i) {
  if (g.speed_points == 1) return g.speed_min;
  return g.speed_min + (g.speed_max - g.speed_min) * static_cast<double>(i) /
                           static_cast<double>(g.speed_points - 1);
}

double depth_at(const GridSpec& g, std::size_t j) {
  return g.depth_min + (g.depth_max - g.depth_min) * static_cast<double>(j + 1) /
                           static_cast<double>(g.depth_points);
}

}  // namespace

std::vector<double> GridSpec::speed_axis() const {
  std::vector<double> axis(speed_points);
  for (std::size_t i = 0; i < speed_points; ++i) axis[i] = speed_at(*this, i);
  return axis;
}

std::vector<double> GridSpec::depth_axis() const {
  std::vector<double> axis(depth_points);
  for (std::size_t j = 0; j < depth_points; ++j) axis[j] = depth_at(*this, j);
  return axis;
}

double GridSpec::depth_step() const {
  return (depth_max - depth_min) / static_cast<double>(depth_points);
}

void GridSpec::validate() const {
  if (speed_points < 2 || depth_points < 2) throw ConfigError("grid resolutions must be >= 2");
  if (!(std::isfinite(speed_min) && std::isfinite(speed_max) && speed_min > 0.0 &&
        speed_max > speed_min)) {
    throw ConfigError("speed range must satisfy 0 < speed_min < speed_max");
  }
  if (!(std::isfinite(depth_min) && std::isfinite(depth_max) && depth_min >= 0.0 &&
        depth_max > depth_min)) {
    throw ConfigError("depth range must satisfy 0 <= depth_min < depth_max");
  }
}

void ExperimentConfig::validate() const {
  grid.validate();
  TurningParams probe = model;
  probe.b = 0.0;
  probe.speed_ratio = 1.0;
  try {
    probe.validate();
    sim.validate();
    embedding.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  for (double d : deltas) {
    if (!(std::isfinite(d) && d >= 0.0)) throw ConfigError("deltas must be >= 0");
  }
  if (std::set<double>(deltas.begin(), deltas.end()).size() != deltas.size()) {
    throw ConfigError("deltas must be distinct");
  }
  if (!(l2_strength >= 0.0 && std::isfinite(l2_strength))) {
    throw ConfigError("l2_strength must be >= 0");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  if (!(tol > 0.0) || max_iter <= 0) throw ConfigError("tol and max_iter must be positive");
  if (boundary_refine < 1) throw ConfigError("boundary_refine must be >= 1");
  if (rips.max_points < embedding.subsample_count) {
    throw ConfigError("rips.max_points is below the embedded cloud size");
  }
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

TrainOptions ExperimentConfig::train_options() const {
  return TrainOptions{l2_strength, tol, max_iter};
}

json config_to_json(const ExperimentConfig& c) {
  return {
      {"grid",
       {{"speed_min", c.grid.speed_min},
        {"speed_max", c.grid.speed_max},
        {"depth_min", c.grid.depth_min},
        {"depth_max", c.grid.depth_max},
        {"speed_points", c.grid.speed_points},
        {"depth_points", c.grid.depth_points}}},
      {"model", {{"zeta", c.model.zeta}, {"rho", c.model.rho}, {"alpha", c.model.alpha}}},
      {"sim",
       {{"steps_per_delay", c.sim.steps_per_delay},
        {"horizon_delays", c.sim.horizon_delays},
        {"blowup_bound", c.sim.blowup_bound},
        {"history_value", c.sim.history_value}}},
      {"embedding",
       {{"subsample_count", c.embedding.subsample_count}, {"embed_dim", c.embedding.embed_dim}}},
      {"rips", {{"max_points", c.rips.max_points}}},
      {"deltas", c.deltas},
      {"seed", c.seed},
      {"l2_strength", c.l2_strength},
      {"test_fraction", c.test_fraction},
      {"tol", c.tol},
      {"max_iter", c.max_iter},
      {"boundary_refine", c.boundary_refine},
      {"output_dir", c.output_dir},
  };
}

namespace {

// Copies j[key] into out when present; finish() rejects keys never asked for.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const json* object(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown config key " + where_ + "." + key);
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  Reader top(j, "config");
  if (const json* g = top.object("grid")) {
    Reader r(*g, "grid");
    r.get("speed_min", c.grid.speed_min);
    r.get("speed_max", c.grid.speed_max);
    r.get("depth_min", c.grid.depth_min);
    r.get("depth_max", c.grid.depth_max);
    r.get("speed_points", c.grid.speed_points);
    r.get("depth_points", c.grid.depth_points);
    r.finish();
  }
  if (const json* m = top.object("model")) {
    Reader r(*m, "model");
    r.get("zeta", c.model.zeta);
    r.get("rho", c.model.rho);
    r.get("alpha", c.model.alpha);
    r.finish();
  }
  if (const json* s = top.object("sim")) {
    Reader r(*s, "sim");
    r.get("steps_per_delay", c.sim.steps_per_delay);
    r.get("horizon_delays", c.sim.horizon_delays);
    r.get("blowup_bound", c.sim.blowup_bound);
    r.get("history_value", c.sim.history_value);
    r.finish();
  }
  if (const json* e = top.object("embedding")) {
    Reader r(*e, "embedding");
    r.get("subsample_count", c.embedding.subsample_count);
    r.get("embed_dim", c.embedding.embed_dim);
    r.finish();
  }
  if (const json* p = top.object("rips")) {
    Reader r(*p, "rips");
    r.get("max_points", c.rips.max_points);
    r.finish();
  }
  top.get("deltas", c.deltas);
  top.get("seed", c.seed);
  top.get("l2_strength", c.l2_strength);
  top.get("test_fraction", c.test_fraction);
  top.get("tol", c.tol);
  top.get("max_iter", c.max_iter);
  top.get("boundary_refine", c.boundary_refine);
  top.get("output_dir", c.output_dir);
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------- points

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t point_seed(std::uint64_t seed, std::size_t i, std::size_t j, double delta) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(i));
  h = splitmix64(h ^ static_cast<std::uint64_t>(j));
  return splitmix64(h ^ std::bit_cast<std::uint64_t>(delta));
}

const char* to_string(PointStatus status) {
  switch (status) {
    case PointStatus::ok: return "ok";
    case PointStatus::zero_variance: return "zero_variance";
    case PointStatus::diverged: return "diverged";
  }
  return "?";
}

namespace {

PointStatus status_from_string(const std::string& s) {
  if (s == "ok") return PointStatus::ok;
  if (s == "zero_variance") return PointStatus::zero_variance;
  if (s == "diverged") return PointStatus::diverged;
  throw IoError("unknown point status '" + s + "'");
}

}  // namespace

PointResult simulate_point(const ExperimentConfig& config, double speed_ratio, double b,
                           std::optional<double> delta, std::uint64_t seed, PointTrace* trace) {
  PointResult r;
  r.speed_ratio = speed_ratio;
  r.b = b;

  TurningParams params = config.model;
  params.speed_ratio = speed_ratio;
  params.b = b;
  SimConfig sim = config.sim;
  sim.seed = seed;

  try {
    TimeSeries series = delta ? simulate_stochastic({params, *delta}, sim)
                              : simulate_deterministic(params, sim);
    TimeSeries sub = truncate_and_subsample(series, config.embedding);
    r.delay = select_delay(sub);
    PointCloud cloud = takens_embed(sub, r.delay, config.embedding.embed_dim);
    RipsDiagrams diagrams = rips_diagrams(pairwise_distances(cloud), config.rips);
    r.x = feature_vector(diagrams.h0, diagrams.h1);
    if (trace) {
      trace->series = std::move(series);
      trace->subsampled = std::move(sub);
      trace->cloud = std::move(cloud);
      trace->diagrams = std::move(diagrams);
    }
  } catch (const SimulationDiverged& e) {
    r.status = PointStatus::diverged;
    r.x = {};
    r.message = e.what();
  } catch (const ZeroVariance& e) {
    r.status = PointStatus::zero_variance;
    r.x = {};
    r.message = e.what();
  }
  return r;
}

PointResult process_point(const ExperimentConfig& config, std::size_t i, std::size_t j,
                          std::optional<double> delta, PointTrace* trace) {
  PointResult r = simulate_point(config, speed_at(config.grid, i), depth_at(config.grid, j),
                                 delta, point_seed(config.seed, i, j, delta.value_or(0.0)),
                                 trace);
  r.speed_index = i;
  r.depth_index = j;
  return r;
}

std::vector<PointResult> sweep_points(const ExperimentConfig& config, std::optional<double> delta,
                                      const RunOptions& options) {
  config.validate();
  const std::size_t nj = config.grid.depth_points;
  const std::size_t total = config.grid.size();
  std::vector<PointResult> results(total);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mutex;
  std::size_t done = 0;
  std::exception_ptr failure;

  auto work = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::size_t k = next.fetch_add(1);
      if (k >= total) return;
      try {
        results[k] = process_point(config, k / nj, k % nj, delta);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        stop = true;
        return;
      }
      if (options.progress) {
        std::lock_guard lock(mutex);
        options.progress(++done, total);
      }
    }
  };

  const unsigned workers =
      static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(options.workers, total)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

LobeBoundary config_boundary(const ExperimentConfig& config) {
  const int resolution =
      static_cast<int>(config.grid.speed_points - 1) * config.boundary_refine + 1;
  return min_boundary(config.model.zeta, config.model.rho, config.model.alpha,
                      {config.grid.speed_min, config.grid.speed_max}, resolution);
}

namespace {

bool training_label(const PointResult& p, const LabelGrid& oracle) {
  if (p.status == PointStatus::zero_variance) return false;
  return oracle.labels.at(p.speed_index).at(p.depth_index);
}

}  // namespace

Dataset to_dataset(const std::vector<PointResult>& points, const LabelGrid& oracle) {
  Dataset data;
  data.reserve(points.size());
  for (const auto& p : points) {
    if (p.status == PointStatus::diverged) continue;
    data.push_back({p.x, training_label(p, oracle), p.speed_ratio, p.b, p.speed_index,
                    p.depth_index});
  }
  return data;
}

std::string features_csv(const std::vector<PointResult>& points, const LabelGrid& oracle) {
  std::string out;
  for (const auto& name : feature_names()) out += name + ',';
  out += "speed_ratio,b,label,speed_index,depth_index,status\n";
  for (const auto& p : points) {
    if (p.status == PointStatus::diverged) continue;
    for (double v : p.x) out += io::format_double(v) + ',';
    out += io::format_double(p.speed_ratio) + ',' + io::format_double(p.b) + ',';
    out += training_label(p, oracle) ? '1' : '0';
    out += ',' + std::to_string(p.speed_index) + ',' + std::to_string(p.depth_index) + ',' +
           to_string(p.status) + '\n';
  }
  return out;
}

std::string failures_csv(const std::vector<PointResult>& points) {
  std::string out = "speed_index,depth_index,speed_ratio,b,status,message\n";
  for (const auto& p : points) {
    if (p.status == PointStatus::ok) continue;
    std::string msg = p.message;
    for (char& ch : msg) {
      if (ch == ',' || ch == '\n' || ch == '\r') ch = ' ';
    }
    out += std::to_string(p.speed_index) + ',' + std::to_string(p.depth_index) + ',' +
           io::format_double(p.speed_ratio) + ',' + io::format_double(p.b) + ',' +
           to_string(p.status) + ',' + msg + '\n';
  }
  return out;
}

Dataset parse_features_csv(std::string_view text, const GridSpec& grid,
                           std::vector<PointStatus>* status) {
  const io::CsvTable table = io::parse_csv(text);
  std::array<std::size_t, kFeatureCount> fc{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) fc[f] = table.column(feature_names()[f]);
  const std::size_t sc = table.column("speed_ratio");
  const std::size_t bc = table.column("b");
  const std::size_t lc = table.column("label");
  const std::size_t ic = table.column("speed_index");
  const std::size_t jc = table.column("depth_index");
  const std::size_t stc = table.column("status");

  const double speed_tol = 1e-12 * std::max(1.0, std::abs(grid.speed_max));
  const double depth_tol = 1e-12 * std::max(1.0, std::abs(grid.depth_max));
  Dataset data;
  data.reserve(table.rows.size());
  if (status) status->clear();
  for (const auto& row : table.rows) {
    Sample s;
    for (std::size_t f = 0; f < kFeatureCount; ++f) s.x[f] = io::parse_double(row[fc[f]]);
    s.speed_ratio = io::parse_double(row[sc]);
    s.b = io::parse_double(row[bc]);
    if (row[lc] != "0" && row[lc] != "1") throw IoError("label must be 0 or 1");
    s.chatter = row[lc] == "1";
    s.speed_index = std::stoul(row[ic]);
    s.depth_index = std::stoul(row[jc]);
    if (s.speed_index >= grid.speed_points || s.depth_index >= grid.depth_points ||
        std::abs(s.speed_ratio - speed_at(grid, s.speed_index)) > speed_tol ||
        std::abs(s.b - depth_at(grid, s.depth_index)) > depth_tol) {
      throw DomainError("features row does not match the configured grid");
    }
    const PointStatus st = status_from_string(row[stc]);
    if (status) status->push_back(st);
    data.push_back(s);
  }
  return data;
}

json model_to_json(const LogisticModel& model, const ExperimentConfig& config,
                   const TrainResult* fit) {
  json j = {
      {"weights", model.weights},
      {"bias", model.bias},
      {"l2_strength", config.l2_strength},
      {"seed", config.seed},
      {"tol", config.tol},
      {"features", feature_names()},
  };
  if (fit) {
    j["iterations"] = fit->iterations;
    j["converged"] = fit->converged;
  }
  return j;
}

LogisticModel model_from_json(const json& j) {
  LogisticModel model;
  try {
    model.weights = j.at("weights").get<FeatureVector>();
    model.bias = j.at("bias").get<double>();
  } catch (const json::exception& e) {
    throw IoError(std::string("bad model JSON: ") + e.what());
  }
  return model;
}

LabelGrid predict_grid(const LogisticModel& model, const Normalizer& norm, const Dataset& samples,
                       const GridSpec& grid, const std::vector<PointStatus>* status) {
  LabelGrid out{grid.speed_axis(), grid.depth_axis(), {}};
  out.labels.assign(grid.speed_points, std::vector<bool>(grid.depth_points, true));
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Sample& s = samples[k];
    const bool zero = status && (*status)[k] == PointStatus::zero_variance;
    out.labels.at(s.speed_index).at(s.depth_index) =
        !zero && predict(model, norm.apply(s.x)).chatter;
  }
  return out;
}

// ---------------------------------------------------------------- files

namespace files {

std::string delta_tag(double delta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", delta);
  return buf;
}
std::string transfer_features(double d) { return "features_delta_" + delta_tag(d) + ".csv"; }
std::string transfer_failures(double d) { return "failures_delta_" + delta_tag(d) + ".csv"; }
std::string transfer_labels(double d) { return "labels_delta_" + delta_tag(d) + ".csv"; }
std::string transfer_map(double d) { return "map_delta_" + delta_tag(d) + ".svg"; }

}  // namespace files

// ---------------------------------------------------------------- stages

namespace {

class Stage {
 public:
  Stage(const ExperimentConfig& config, std::string name)
      : dir_(config.output_dir), config_(config), start_(std::chrono::steady_clock::now()) {
    report_.stage = std::move(name);
    fs::create_directories(dir_);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  std::string read(const std::string& name) const {
    const fs::path p = path(name);
    if (!fs::exists(p)) {
      throw IoError(p.string() + " not found; run the producing stage first");
    }
    return io::read_text(p);
  }

  void write(const std::string& name, const std::string& contents) {
    io::write_text(path(name), contents);
    report_.hashes[name] = io::sha256_hex(contents);
  }

  json& summary() { return report_.summary; }

  StageReport finish() {
    report_.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    record_manifest();
    return report_;
  }

 private:
  void record_manifest() {
    const json config = config_to_json(config_);
    const std::string config_text = config.dump(2) + "\n";
    io::write_text(path(files::kConfig), config_text);

    json manifest = json::object();
    const fs::path mpath = path(files::kManifest);
    if (fs::exists(mpath)) {
      try {
        manifest = json::parse(io::read_text(mpath));
      } catch (const json::exception&) {
        manifest = json::object();
      }
    }
    if (!manifest.is_object()) manifest = json::object();
    manifest["version"] = version_string();
    manifest["config"] = config;
    json stage = {
        {"config_sha256", io::sha256_hex(config_text)},
        {"seconds", report_.seconds},
        {"files", report_.hashes},
        {"summary", report_.summary},
    };
    manifest["stages"][report_.stage] = std::move(stage);
    io::write_text(mpath, manifest.dump(2) + "\n");
  }

  fs::path dir_;
  const ExperimentConfig& config_;
  std::chrono::steady_clock::time_point start_;
  StageReport report_;
};

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(what + ": " + e.what());
  }
}

// Boundary and oracle labels, shared by label and sweep.
LabelGrid write_labels(const ExperimentConfig& config, Stage& stage) {
  const LobeBoundary boundary = config_boundary(config);
  const LabelGrid oracle =
      label_grid(boundary, config.grid.speed_axis(), config.grid.depth_axis());
  stage.write(files::kBoundary, io::boundary_csv(boundary));
  stage.write(files::kLabels, io::label_grid_csv(oracle));
  stage.summary()["oracle_chatter_fraction"] = oracle.chatter_fraction();
  stage.summary()["boundary_min_b"] = boundary.min_b();
  return oracle;
}

json failure_counts(const std::vector<PointResult>& points) {
  std::size_t diverged = 0, zero = 0;
  for (const auto& p : points) {
    diverged += p.status == PointStatus::diverged;
    zero += p.status == PointStatus::zero_variance;
  }
  return {{"diverged", diverged}, {"zero_variance", zero}};
}

std::vector<std::pair<std::size_t, std::size_t>> read_misclassified(const Stage& stage) {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  if (!fs::exists(stage.path(files::kMisclassified))) return cells;
  const io::CsvTable t = io::parse_csv(stage.read(files::kMisclassified));
  const std::size_t ic = t.column("speed_index");
  const std::size_t jc = t.column("depth_index");
  for (const auto& row : t.rows) cells.emplace_back(std::stoul(row[ic]), std::stoul(row[jc]));
  return cells;
}

// Euclidean distance, in grid cells, from (s, b) to the boundary polyline.
double nearest_cells(const LobeBoundary& boundary, double s, double b, double ds, double db) {
  double best = std::numeric_limits<double>::infinity();
  const double qx = s / ds, qy = b / db;
  for (std::size_t k = 0; k + 1 < boundary.samples.size(); ++k) {
    const double ax = boundary.samples[k].speed_ratio / ds, ay = boundary.samples[k].b_lim / db;
    const double vx = boundary.samples[k + 1].speed_ratio / ds - ax;
    const double vy = boundary.samples[k + 1].b_lim / db - ay;
    const double len2 = vx * vx + vy * vy;
    const double t =
        len2 > 0.0 ? std::clamp(((qx - ax) * vx + (qy - ay) * vy) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, std::hypot(ax + t * vx - qx, ay + t * vy - qy));
  }
  return best;
}

std::string delta_title(double delta) { return "stochastic model, delta = " + files::delta_tag(delta); }

}  // namespace

StageReport run_label(const ExperimentConfig& config) {
  config.validate();
  Stage stage(config, "label");
  const LabelGrid oracle = write_labels(config, stage);
  stage.summary()["grid_points"] = config.grid.size();
  return stage.finish();
}

StageReport run_sweep(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  Stage stage(config, "sweep");
  const LabelGrid oracle = write_labels(config, stage);
  const std::vector<PointResult> points = sweep_points(config, std::nullopt, options);
  stage.write(files::kFeatures, features_csv(points, oracle));
  stage.write(files::kFailures, failures_csv(points));
  stage.summary()["rows"] = to_dataset(points, oracle).size();
  stage.summary()["failures"] = failure_counts(points);
  return stage.finish();
}

StageReport run_train(const ExperimentConfig& config) {
  config.validate();
  Stage stage(config, "train");
  const Dataset data = parse_features_csv(stage.read(files::kFeatures), config.grid);
  auto [train, test] = train_test_split(data, config.test_fraction, config.seed);

  std::vector<FeatureVector> xs;
  xs.reserve(train.size());
  for (const auto& s : train) xs.push_back(s.x);
  const Normalizer norm = fit_normalizer(xs);
  Dataset normalized = train;
  for (auto& s : normalized) s.x = norm.apply(s.x);
  const TrainResult fit = train_logistic(normalized, config.train_options());

  json split = {{"seed", config.seed}, {"test_fraction", config.test_fraction}};
  split["train"] = json::array();
  split["test"] = json::array();
  for (const auto& s : train) split["train"].push_back({s.speed_index, s.depth_index});
  for (const auto& s : test) split["test"].push_back({s.speed_index, s.depth_index});

  stage.write(files::kModel, model_to_json(fit.model, config, &fit).dump(2) + "\n");
  stage.write(files::kNormalizer, io::normalizer_to_json(norm).dump(2) + "\n");
  stage.write(files::kSplit, split.dump() + "\n");
  stage.summary()["train_rows"] = train.size();
  stage.summary()["test_rows"] = test.size();
  stage.summary()["iterations"] = fit.iterations;
  stage.summary()["converged"] = fit.converged;
  stage.summary()["train_accuracy"] = evaluate(fit.model, normalized).accuracy;
  return stage.finish();
}

StageReport run_evaluate(const ExperimentConfig& config) {
  config.validate();
  Stage stage(config, "evaluate");
  std::vector<PointStatus> status;
  const Dataset data = parse_features_csv(stage.read(files::kFeatures), config.grid, &status);
  const LogisticModel model = model_from_json(parse_json(stage.read(files::kModel), "model"));
  const Normalizer norm =
      io::normalizer_from_json(parse_json(stage.read(files::kNormalizer), "normalizer"));
  const LobeBoundary boundary = io::parse_boundary_csv(stage.read(files::kBoundary));

  // The split is a pure function of (rows, test_fraction, seed).
  auto [train, test] = train_test_split(data, config.test_fraction, config.seed);
  std::set<std::pair<std::size_t, std::size_t>> test_cells;
  for (const auto& s : test) test_cells.emplace(s.speed_index, s.depth_index);

  Dataset test_normalized = test;
  for (auto& s : test_normalized) s.x = norm.apply(s.x);
  const Evaluation eval = evaluate(model, test_normalized);

  std::size_t train_chatter = 0, test_chatter = 0;
  for (const auto& s : train) train_chatter += s.chatter;
  for (const auto& s : test) test_chatter += s.chatter;
  const bool majority = 2 * train_chatter >= train.size();
  const std::size_t majority_hits = majority ? test_chatter : test.size() - test_chatter;

  const double step = config.grid.depth_step();
  const double speed_step = (config.grid.speed_max - config.grid.speed_min) /
                            static_cast<double>(config.grid.speed_points - 1);
  std::string miss = "speed_index,depth_index,speed_ratio,b,label,predicted,probability,split,"
                     "b_lim,cells_from_boundary,cells_nearest\n";
  std::size_t test_miss = 0, test_miss_near = 0, test_miss_nearest = 0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const Sample& s = data[k];
    const Prediction p = predict(model, norm.apply(s.x));
    const bool predicted = status[k] != PointStatus::zero_variance && p.chatter;
    if (predicted == s.chatter) continue;
    const double b_lim = boundary.at(s.speed_ratio);
    const double cells = std::abs(s.b - b_lim) / step;
    const double nearest = nearest_cells(boundary, s.speed_ratio, s.b, speed_step, step);
    const bool in_test = test_cells.contains({s.speed_index, s.depth_index});
    if (in_test) {
      ++test_miss;
      test_miss_near += cells <= 2.0;
      test_miss_nearest += nearest <= 2.0;
    }
    miss += std::to_string(s.speed_index) + ',' + std::to_string(s.depth_index) + ',' +
            io::format_double(s.speed_ratio) + ',' + io::format_double(s.b) + ',' +
            (s.chatter ? "1," : "0,") + (predicted ? "1," : "0,") +
            io::format_double(p.probability) + ',' + (in_test ? "test," : "train,") +
            io::format_double(b_lim) + ',' + io::format_double(cells) + ',' +
            io::format_double(nearest) + '\n';
  }

  const LabelGrid predicted = predict_grid(model, norm, data, config.grid, &status);
  const ConfusionMatrix& cm = eval.confusion;
  const json confusion = {
      {"true_positive", cm.true_positive},
      {"false_positive", cm.false_positive},
      {"false_negative", cm.false_negative},
      {"true_negative", cm.true_negative},
      {"total", cm.total()},
      {"accuracy", eval.accuracy},
      {"majority_baseline_accuracy",
       test.empty() ? 0.0 : static_cast<double>(majority_hits) / static_cast<double>(test.size())},
      {"test_chatter_fraction",
       test.empty() ? 0.0 : static_cast<double>(test_chatter) / static_cast<double>(test.size())},
      {"test_misclassified", test_miss},
      {"test_misclassified_within_2_cells", test_miss_near},
      {"within_2_cells_fraction",
       test_miss == 0 ? 1.0 : static_cast<double>(test_miss_near) / static_cast<double>(test_miss)},
      // Any direction, speed and depth both measured in their own cell size.
      {"within_2_cells_nearest_fraction",
       test_miss == 0 ? 1.0
                      : static_cast<double>(test_miss_nearest) / static_cast<double>(test_miss)},
      {"predicted_chatter_fraction", predicted.chatter_fraction()},
  };
  stage.write(files::kConfusion, confusion.dump(2) + "\n");
  stage.write(files::kMisclassified, miss);
  stage.write(files::kPredicted, io::label_grid_csv(predicted));
  stage.summary() = confusion;
  return stage.finish();
}

StageReport run_transfer(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  Stage stage(config, "transfer");
  const LogisticModel model = model_from_json(parse_json(stage.read(files::kModel), "model"));
  const Normalizer norm =
      io::normalizer_from_json(parse_json(stage.read(files::kNormalizer), "normalizer"));
  const LobeBoundary boundary = io::parse_boundary_csv(stage.read(files::kBoundary));
  const LabelGrid oracle = io::parse_label_grid_csv(stage.read(files::kLabels));

  json results = json::array();
  for (double delta : config.deltas) {
    const std::vector<PointResult> points = sweep_points(config, delta, options);
    std::vector<PointStatus> status;
    Dataset samples;
    for (const auto& p : points) {
      if (p.status == PointStatus::diverged) continue;
      samples.push_back({p.x, false, p.speed_ratio, p.b, p.speed_index, p.depth_index});
      status.push_back(p.status);
    }
    const LabelGrid predicted = predict_grid(model, norm, samples, config.grid, &status);
    MapOptions map;
    map.title = delta_title(delta);
    stage.write(files::transfer_features(delta), features_csv(points, oracle));
    stage.write(files::transfer_failures(delta), failures_csv(points));
    stage.write(files::transfer_labels(delta), io::label_grid_csv(predicted));
    stage.write(files::transfer_map(delta), render_map(predicted, boundary, map));
    results.push_back({{"delta", delta},
                       {"chatter_fraction", predicted.chatter_fraction()},
                       {"failures", failure_counts(points)}});
  }

  json transfer = {{"oracle_chatter_fraction", oracle.chatter_fraction()}, {"deltas", results}};
  if (fs::exists(stage.path(files::kPredicted))) {
    transfer["deterministic_predicted_chatter_fraction"] =
        io::parse_label_grid_csv(stage.read(files::kPredicted)).chatter_fraction();
  }
  stage.write(files::kTransfer, transfer.dump(2) + "\n");
  stage.summary() = transfer;
  return stage.finish();
}

StageReport run_render(const ExperimentConfig& config) {
  config.validate();
  Stage stage(config, "render");
  const LobeBoundary boundary = io::parse_boundary_csv(stage.read(files::kBoundary));

  MapOptions oracle_map;
  oracle_map.title = "stability lobes";
  stage.write(files::kMapOracle,
              render_map(io::parse_label_grid_csv(stage.read(files::kLabels)), boundary,
                         oracle_map));

  std::size_t maps = 1;
  if (fs::exists(stage.path(files::kPredicted))) {
    MapOptions map;
    map.title = "deterministic model, predicted";
    map.misclassified = read_misclassified(stage);
    stage.write(files::kMapDeterministic,
                render_map(io::parse_label_grid_csv(stage.read(files::kPredicted)), boundary, map));
    ++maps;
  }
  for (double delta : config.deltas) {
    if (!fs::exists(stage.path(files::transfer_labels(delta)))) continue;
    MapOptions map;
    map.title = delta_title(delta);
    stage.write(files::transfer_map(delta),
                render_map(io::parse_label_grid_csv(stage.read(files::transfer_labels(delta))),
                           boundary, map));
    ++maps;
  }
  stage.summary()["maps"] = maps;
  return stage.finish();
}

std::vector<StageReport> run_all(const ExperimentConfig& config, const RunOptions& options) {
  std::vector<StageReport> reports;
  reports.push_back(run_sweep(config, options));
  reports.push_back(run_train(config));
  reports.push_back(run_evaluate(config));
  reports.push_back(run_transfer(config, options));
  reports.push_back(run_render(config));
  return reports;
}

}  // namespace chatter
