// Command-line front end: geometry / estimate / sweep / array-study.
// Configuration comes from an optional JSON file (--config) with every flag
// acting as an override. Exit codes: 0 success, 2 configuration error,
// 3 numerical failure.

#include "doalab/errors.hpp"
#include "doalab/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using doalab::ExperimentConfig;

std::string preparse_config_path(int argc, char** argv) {
  for (int i = 1; i < argc - 1; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" || arg == "-c") return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return {};
}

void add_array_flags(CLI::App* cmd, ExperimentConfig& config,
                     std::string& layout_name) {
  cmd->add_option("--layout", layout_name, "array layout kind");
  cmd->add_option("-M,--sensors", config.sensor_count, "sensor count");
  cmd->add_option("-V,--aperture", config.aperture_v, "aperture in meters");
  cmd->add_option("--spiral-c", config.spiral_tightness,
                  "spiral winding rate (rad/m)");
  cmd->add_option("--geometry-csv", config.geometry_csv,
                  "load sensor positions from a CSV instead of generating");
}

void add_manifold_flags(CLI::App* cmd, ExperimentConfig& config) {
  cmd->add_option("--delta", config.delta_deg, "grid resolution in degrees");
  cmd->add_option("--phi", config.elevation_phi, "fixed elevation in radians");
  cmd->add_option("--speed", config.speed_c, "propagation speed m/s");
  cmd->add_option("--freq", config.frequency_f, "carrier frequency Hz");
}

void add_scene_flags(CLI::App* cmd, ExperimentConfig& config,
                     std::optional<long long>& source_count) {
  cmd->add_option("--angles", config.source_angles_deg,
                  "explicit source azimuths in degrees");
  cmd->add_option("-K,--sources", source_count,
                  "number of random source directions");
  cmd->add_option("-T,--snapshots", config.snapshot_count, "snapshot count");
  cmd->add_option("--snr", config.snr_db, "scene SNR in dB");
  cmd->add_flag("--noise-off", config.noise_off, "disable noise entirely");
  cmd->add_flag("--coherent", config.coherent, "make all sources coherent");
  cmd->add_option("--snapshots-csv", config.snapshots_csv,
                  "load snapshots from CSV (no ground truth)");
}

void add_estimation_flags(CLI::App* cmd, ExperimentConfig& config,
                          std::optional<long long>& max_iterations,
                          std::optional<double>& threshold,
                          std::optional<long long>& known_k,
                          std::optional<double>& mvdr_loading,
                          std::optional<double>& l1_lambda) {
  cmd->add_option("--methods", config.methods,
                  "estimators to run: ssfns cbf mvdr music l1");
  cmd->add_option("-I,--iterations", max_iterations, "iteration cap");
  cmd->add_option("-P,--threshold", threshold,
                  "peak-amplitude stop threshold (<=0 disables)");
  cmd->add_option("--gamma", config.gamma,
                  "relative power for keeping an estimated direction");
  cmd->add_option("--known-k", known_k, "treat the source count as known");
  cmd->add_option("--mvdr-loading", mvdr_loading, "MVDR diagonal loading");
  cmd->add_option("--l1-lambda", l1_lambda, "L1 regularization weight");
  cmd->add_flag("--log-q", config.log_q, "log q per iteration (costly)");
}

}  // namespace

int main(int argc, char** argv) {
  ExperimentConfig config;

  const std::string config_path = preparse_config_path(argc, argv);
  if (!config_path.empty()) {
    try {
      config = doalab::load_config(config_path);
    } catch (const doalab::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  }

  CLI::App app{"doalab: direction-of-arrival estimation toolkit"};
  app.require_subcommand(1);
  std::string config_flag;
  app.add_option("-c,--config", config_flag, "JSON config file");

  std::string layout_name;
  std::optional<long long> source_count;
  std::optional<long long> max_iterations;
  std::optional<double> threshold;
  std::optional<long long> known_k;
  std::optional<double> mvdr_loading;
  std::optional<double> l1_lambda;

  auto* geometry = app.add_subcommand("geometry", "generate an array layout");
  add_array_flags(geometry, config, layout_name);
  geometry->add_option("--seed", config.seeds, "seed for random layouts");
  geometry->add_option("-o,--output", config.output_dir, "output directory");

  auto* estimate =
      app.add_subcommand("estimate", "run estimators on one scene");
  add_array_flags(estimate, config, layout_name);
  add_manifold_flags(estimate, config);
  add_scene_flags(estimate, config, source_count);
  add_estimation_flags(estimate, config, max_iterations, threshold, known_k,
                       mvdr_loading, l1_lambda);
  estimate->add_option("--seed", config.seeds, "scene/geometry seed");
  estimate->add_option("-o,--output", config.output_dir, "output directory");

  auto* sweep = app.add_subcommand("sweep", "sweep one axis, emit tidy CSV");
  add_array_flags(sweep, config, layout_name);
  add_manifold_flags(sweep, config);
  add_scene_flags(sweep, config, source_count);
  add_estimation_flags(sweep, config, max_iterations, threshold, known_k,
                       mvdr_loading, l1_lambda);
  sweep->add_option("--axis", config.sweep_axis,
                    "one of snr|snapshots|K|iterations|aperture|M");
  sweep->add_option("--values", config.sweep_values, "axis values");
  sweep->add_option("--seeds", config.seeds, "Monte Carlo seeds");
  sweep->add_option("-o,--output", config.output_dir, "output directory");

  auto* study =
      app.add_subcommand("array-study", "q/SSFA/NSA across layouts and sizes");
  add_manifold_flags(study, config);
  study->add_option("--layouts", config.study_layouts, "layout kinds");
  study->add_option("--element-counts", config.study_element_counts,
                    "sensor counts");
  study->add_option("--apertures", config.study_apertures, "apertures in m");
  study->add_option("--spiral-c", config.spiral_tightness,
                    "spiral winding rate (rad/m)");
  study->add_option("-T,--snapshots", config.snapshot_count,
                    "noise snapshots for NSA");
  study->add_option("--seeds", config.seeds, "Monte Carlo seeds");
  study->add_option("-o,--output", config.output_dir, "output directory");
  // The array study scans R x R weight matrices; a 1-degree default grid
  // keeps the full default study under a minute.
  study->parse_complete_callback([&] {
    if (study->count("--delta") == 0 && config_path.empty()) config.delta_deg = 1.0;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
      return app.exit(e);
    std::cerr << app.help() << "\n";
    std::cerr << "argument error: " << e.what() << "\n";
    return 2;
  }

  if (!layout_name.empty()) {
    try {
      config.layout = doalab::layout_from_string(layout_name);
    } catch (const doalab::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  }
  if (source_count) config.source_count = static_cast<doalab::Index>(*source_count);
  if (max_iterations)
    config.max_iterations = static_cast<doalab::Index>(*max_iterations);
  if (threshold) config.threshold = *threshold;
  if (known_k) config.known_k = static_cast<doalab::Index>(*known_k);
  if (mvdr_loading) config.mvdr_loading = *mvdr_loading;
  if (l1_lambda) config.l1_lambda = *l1_lambda;

  try {
    if (geometry->parsed()) return doalab::cmd_geometry(config);
    if (estimate->parsed()) return doalab::cmd_estimate(config);
    if (sweep->parsed()) return doalab::cmd_sweep(config);
    if (study->parsed()) return doalab::cmd_array_study(config);
  } catch (const doalab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const doalab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
