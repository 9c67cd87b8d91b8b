// Command-line driver for the chatter experiment.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "chatter/errors.hpp"
#include "chatter/io.hpp"
#include "chatter/pipeline.hpp"

namespace {

using chatter::ExperimentConfig;
using nlohmann::json;

struct CommonFlags {
  std::string config_path;
  std::string out;
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;
  std::string grid;
  std::vector<double> deltas;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool parallel) {
  cmd->add_option("--config", f.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory (overrides config)");
  cmd->add_option("--seed", f.seed, "experiment seed (overrides config)");
  cmd->add_option("--grid", f.grid, "grid resolution WxH (speed x depth)");
  cmd->add_option("--deltas", f.deltas, "noise intensities, e.g. 0.01,0.03,0.05")->delimiter(',');
  if (parallel) {
    cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  }
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig c = f.config_path.empty() ? ExperimentConfig{} : chatter::load_config(f.config_path);
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.seed) c.seed = *f.seed;
  if (!f.grid.empty()) {
    const auto x = f.grid.find_first_of("xX");
    std::size_t w = 0, h = 0;
    try {
      if (x == std::string::npos) throw std::invalid_argument("missing x");
      std::size_t used = 0;
      w = std::stoul(f.grid.substr(0, x), &used);
      if (used != x) throw std::invalid_argument("bad width");
      const std::string hs = f.grid.substr(x + 1);
      h = std::stoul(hs, &used);
      if (used != hs.size()) throw std::invalid_argument("bad height");
    } catch (const std::exception&) {
      throw chatter::ConfigError("--grid expects WxH, got '" + f.grid + "'");
    }
    c.grid.speed_points = w;
    c.grid.depth_points = h;
  }
  if (!f.deltas.empty()) c.deltas = f.deltas;
  c.validate();
  return c;
}

chatter::RunOptions run_options(const CommonFlags& f, bool quiet) {
  chatter::RunOptions options;
  options.workers = f.workers;
  if (!quiet) {
    options.progress = [last = std::size_t{0}](std::size_t done, std::size_t total) mutable {
      const std::size_t pct = 100 * done / total;
      if (pct >= last + 5 || done == total) {
        last = pct;
        std::fprintf(stderr, "  %zu/%zu points (%zu%%)\n", done, total, pct);
      }
    };
  }
  return options;
}

void print_reports(const std::vector<chatter::StageReport>& reports) {
  json out = json::array();
  for (const auto& r : reports) {
    out.push_back({{"stage", r.stage}, {"seconds", r.seconds}, {"summary", r.summary}});
  }
  std::cout << out.dump(2) << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Chatter detection in turning via persistent homology"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress output");

  CommonFlags flags;
  auto* simulate = app.add_subcommand("simulate", "simulate one point and write its trace");
  auto* label = app.add_subcommand("label", "analytic stability boundary and labels");
  auto* sweep = app.add_subcommand("sweep", "deterministic feature sweep over the grid");
  auto* train = app.add_subcommand("train", "fit normalizer and logistic model");
  auto* evaluate = app.add_subcommand("evaluate", "test accuracy and misclassified points");
  auto* transfer = app.add_subcommand("transfer", "classify stochastic-model features");
  auto* render = app.add_subcommand("render", "render SVG maps");
  auto* all = app.add_subcommand("all", "sweep, train, evaluate, transfer, render");

  double speed = 0.0, depth = 0.0;
  std::optional<double> delta;
  simulate->add_option("--speed", speed, "spindle speed ratio")->required();
  simulate->add_option("--b", depth, "nondimensional depth of cut")->required();
  simulate->add_option("--delta", delta, "noise intensity (omit for the deterministic model)");

  add_common(simulate, flags, false);
  add_common(label, flags, false);
  add_common(sweep, flags, true);
  add_common(train, flags, false);
  add_common(evaluate, flags, false);
  add_common(transfer, flags, true);
  add_common(render, flags, false);
  add_common(all, flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << json{{"error", "UsageError"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  const ExperimentConfig config = resolve(flags);
  const chatter::RunOptions options = run_options(flags, quiet);

  if (simulate->parsed()) {
    chatter::PointTrace trace;
    const auto r = chatter::simulate_point(config, speed, depth, delta,
                                           chatter::point_seed(config.seed, 0, 0, delta.value_or(0.0)),
                                           &trace);
    namespace io = chatter::io;
    const std::filesystem::path dir = config.output_dir;
    if (r.status == chatter::PointStatus::ok) {
      io::write_text(dir / "series.csv", io::time_series_csv(trace.series));
      io::write_text(dir / "subsampled.csv", io::time_series_csv(trace.subsampled));
      io::write_text(dir / "cloud.csv", io::point_cloud_csv(trace.cloud));
      io::write_text(dir / "diagram.csv",
                     io::diagram_csv({trace.diagrams.h0, trace.diagrams.h1}));
    }
    json features = json::object();
    for (std::size_t k = 0; k < chatter::kFeatureCount; ++k) {
      features[chatter::feature_names()[k]] = r.x[k];
    }
    std::cout << json{{"speed_ratio", speed},
                      {"b", depth},
                      {"status", chatter::to_string(r.status)},
                      {"delay", r.delay},
                      {"features", features}}
                     .dump(2)
              << "\n";
    return 0;
  }
  if (label->parsed()) print_reports({chatter::run_label(config)});
  if (sweep->parsed()) print_reports({chatter::run_sweep(config, options)});
  if (train->parsed()) print_reports({chatter::run_train(config)});
  if (evaluate->parsed()) print_reports({chatter::run_evaluate(config)});
  if (transfer->parsed()) print_reports({chatter::run_transfer(config, options)});
  if (render->parsed()) print_reports({chatter::run_render(config)});
  if (all->parsed()) print_reports(chatter::run_all(config, options));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const chatter::Error& e) {
    std::cerr << json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
}
