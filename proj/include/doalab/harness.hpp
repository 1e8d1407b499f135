#pragma once

#include "doalab/geometry.hpp"
#include "doalab/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace doalab {

/// Full description of one experiment run. Serialized into every output
/// manifest so a run can be reproduced from its artifacts alone.
struct ExperimentConfig {
  // array
  LayoutKind layout = LayoutKind::uniform_random_2d;
  Index sensor_count = 16;  // M
  double aperture_v = 8000.0;
  double spiral_tightness = 0.5;
  std::string geometry_csv;  // if set, overrides the generated layout

  // manifold
  double delta_deg = 0.1;
  double elevation_phi = 0.0;  // radians
  double speed_c = 1500.0;
  double frequency_f = 100.0;

  // scene
  std::optional<Index> source_count;       // K, drawn uniformly per seed
  std::vector<double> source_angles_deg;   // explicit directions (win over K)
  Index snapshot_count = 1;                // T
  double snr_db = 20.0;
  bool noise_off = false;
  bool coherent = false;
  std::string snapshots_csv;  // if set, estimate runs on external data

  // estimation
  std::vector<std::string> methods{"ssfns"};
  std::optional<Index> max_iterations;  // I
  std::optional<double> threshold;      // P; unset selects the auto rule
  double gamma = 0.5;
  std::optional<Index> known_k;
  std::optional<double> mvdr_loading;
  std::optional<double> l1_lambda;
  bool log_q = false;

  // sweep
  std::string sweep_axis;  // snr | snapshots | K | iterations | aperture | M
  std::vector<double> sweep_values;

  // array study
  std::vector<std::string> study_layouts;
  std::vector<Index> study_element_counts;
  std::vector<double> study_apertures;

  // run control
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "out";
};

/// Merge config fields from a JSON file over the defaults.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Thread cap for parallel sweep cells: DOALAB_THREADS when set, otherwise
/// hardware concurrency.
unsigned thread_budget();

// Each command writes its artifacts plus a manifest.json into
// config.output_dir and returns 0; configuration problems throw ConfigError
// and numerical failures throw NumericalError.
int cmd_geometry(const ExperimentConfig& config);
int cmd_estimate(const ExperimentConfig& config);
int cmd_sweep(const ExperimentConfig& config);
int cmd_array_study(const ExperimentConfig& config);

}  // namespace doalab
