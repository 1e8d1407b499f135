#include "doalab/harness.hpp"

#include "doalab/baselines.hpp"
#include "doalab/errors.hpp"
#include "doalab/io.hpp"
#include "doalab/manifold.hpp"
#include "doalab/metrics.hpp"
#include "doalab/scenesim.hpp"
#include "doalab/ssfns.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <thread>

namespace doalab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kMinSweepAperture = 15.0;  // one wavelength at 100 Hz / 1500 m/s

// ---------------------------------------------------------------------------
// config plumbing
// ---------------------------------------------------------------------------

json config_to_json(const ExperimentConfig& config) {
  json j;
  j["layout"] = to_string(config.layout);
  j["sensor_count"] = config.sensor_count;
  j["aperture_v"] = config.aperture_v;
  j["spiral_tightness"] = config.spiral_tightness;
  j["geometry_csv"] = config.geometry_csv;
  j["delta_deg"] = config.delta_deg;
  j["elevation_phi"] = config.elevation_phi;
  j["speed_c"] = config.speed_c;
  j["frequency_f"] = config.frequency_f;
  if (config.source_count)
    j["source_count"] = *config.source_count;
  else
    j["source_count"] = nullptr;
  j["source_angles_deg"] = config.source_angles_deg;
  j["snapshot_count"] = config.snapshot_count;
  if (std::isinf(config.snr_db))
    j["snr_db"] = "inf";
  else
    j["snr_db"] = config.snr_db;
  j["noise_off"] = config.noise_off;
  j["coherent"] = config.coherent;
  j["snapshots_csv"] = config.snapshots_csv;
  j["methods"] = config.methods;
  if (config.max_iterations)
    j["max_iterations"] = *config.max_iterations;
  else
    j["max_iterations"] = nullptr;
  if (config.threshold)
    j["threshold"] = *config.threshold;
  else
    j["threshold"] = nullptr;
  j["gamma"] = config.gamma;
  if (config.known_k)
    j["known_k"] = *config.known_k;
  else
    j["known_k"] = nullptr;
  if (config.mvdr_loading)
    j["mvdr_loading"] = *config.mvdr_loading;
  else
    j["mvdr_loading"] = nullptr;
  if (config.l1_lambda)
    j["l1_lambda"] = *config.l1_lambda;
  else
    j["l1_lambda"] = nullptr;
  j["log_q"] = config.log_q;
  j["sweep_axis"] = config.sweep_axis;
  j["sweep_values"] = config.sweep_values;
  j["study_layouts"] = config.study_layouts;
  j["study_element_counts"] = config.study_element_counts;
  j["study_apertures"] = config.study_apertures;
  j["seeds"] = config.seeds;
  j["output_dir"] = config.output_dir;
  return j;
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("bad config JSON in " + path.string() + ": " + e.what());
  }

  ExperimentConfig config;
  if (j.contains("layout") && !j.at("layout").is_null())
    config.layout = layout_from_string(j.at("layout").get<std::string>());
  read_field(j, "sensor_count", config.sensor_count);
  read_field(j, "aperture_v", config.aperture_v);
  read_field(j, "spiral_tightness", config.spiral_tightness);
  read_field(j, "geometry_csv", config.geometry_csv);
  read_field(j, "delta_deg", config.delta_deg);
  read_field(j, "elevation_phi", config.elevation_phi);
  read_field(j, "speed_c", config.speed_c);
  read_field(j, "frequency_f", config.frequency_f);
  read_optional(j, "source_count", config.source_count);
  read_field(j, "source_angles_deg", config.source_angles_deg);
  read_field(j, "snapshot_count", config.snapshot_count);
  if (j.contains("snr_db") && !j.at("snr_db").is_null()) {
    if (j.at("snr_db").is_string())
      config.snr_db = std::numeric_limits<double>::infinity();
    else
      config.snr_db = j.at("snr_db").get<double>();
  }
  read_field(j, "noise_off", config.noise_off);
  read_field(j, "coherent", config.coherent);
  read_field(j, "snapshots_csv", config.snapshots_csv);
  read_field(j, "methods", config.methods);
  read_optional(j, "max_iterations", config.max_iterations);
  read_optional(j, "threshold", config.threshold);
  read_field(j, "gamma", config.gamma);
  read_optional(j, "known_k", config.known_k);
  read_optional(j, "mvdr_loading", config.mvdr_loading);
  read_optional(j, "l1_lambda", config.l1_lambda);
  read_field(j, "log_q", config.log_q);
  read_field(j, "sweep_axis", config.sweep_axis);
  read_field(j, "sweep_values", config.sweep_values);
  read_field(j, "study_layouts", config.study_layouts);
  read_field(j, "study_element_counts", config.study_element_counts);
  read_field(j, "study_apertures", config.study_apertures);
  read_field(j, "seeds", config.seeds);
  read_field(j, "output_dir", config.output_dir);
  return config;
}

unsigned thread_budget() {
  if (const char* env = std::getenv("DOALAB_THREADS")) {
    const long value = std::strtol(env, nullptr, 10);
    if (value >= 1) return static_cast<unsigned>(value);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

namespace {

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const unsigned threads =
      std::max(1u, std::min<unsigned>(thread_budget(),
                                      static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& worker : pool) worker.join();
  if (first_error) std::rethrow_exception(first_error);
}

fs::path prepare_output_dir(const ExperimentConfig& config) {
  fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw ConfigError("cannot create output directory: " + dir.string());
  return dir;
}

void write_manifest(const ExperimentConfig& config, const std::string& command,
                    const std::vector<std::string>& outputs,
                    const fs::path& dir, json extra = json::object()) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = config_to_json(config);
  manifest["outputs"] = outputs;
  if (!extra.empty()) manifest["notes"] = extra;
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

ArrayGeometry resolve_geometry(const ExperimentConfig& config,
                               std::uint64_t seed,
                               std::optional<Index> sensor_count = std::nullopt,
                               std::optional<double> aperture = std::nullopt) {
  if (!config.geometry_csv.empty()) return load_geometry_csv(config.geometry_csv);
  return generate(config.layout, sensor_count.value_or(config.sensor_count),
                  aperture.value_or(config.aperture_v), seed,
                  config.spiral_tightness);
}

IndexList resolve_source_indices(const ExperimentConfig& config,
                                 const GridSpec& grid, std::uint64_t seed,
                                 std::optional<Index> source_count = std::nullopt) {
  if (!config.source_angles_deg.empty()) {
    IndexList indices;
    std::set<Index> seen;
    for (double angle : config.source_angles_deg) {
      const Index idx = grid.index_of_deg(angle);
      if (!seen.insert(idx).second)
        throw ConfigError("two source angles land on the same grid cell");
      indices.push_back(idx);
    }
    std::sort(indices.begin(), indices.end());
    return indices;
  }
  const Index count = source_count.value_or(config.source_count.value_or(3));
  return draw_source_indices(grid.size, count, seed);
}

double effective_snr(const ExperimentConfig& config) {
  return config.noise_off ? std::numeric_limits<double>::infinity()
                          : config.snr_db;
}

SsfnsOptions ssfns_options(const ExperimentConfig& config) {
  SsfnsOptions options;
  options.known_k = config.known_k;
  options.max_iterations = config.max_iterations;
  options.threshold = config.threshold;
  options.gamma = config.gamma;
  options.compute_q = config.log_q;
  return options;
}

std::vector<double> angles_of(const GridSpec& grid, const IndexList& indices) {
  std::vector<double> angles;
  angles.reserve(indices.size());
  for (Index idx : indices) angles.push_back(grid.angle_deg(idx));
  return angles;
}

json metrics_to_json(const MetricsReport& report) {
  json j;
  j["q"] = report.q;
  j["ssfa"] = report.ssfa;
  j["nsa"] = report.nsa;
  j["esa"] = report.esa;
  j["ca"] = report.ca;
  j["interference_bar"] = report.interference_bar;
  j["noise_bar"] = report.noise_bar;
  j["signal_bar"] = report.signal_bar;
  j["sir_db"] = report.sir_db;
  j["snr_db"] = report.snr_db;
  j["snir_db"] = report.snir_db;
  j["cor_db"] = report.cor_db;
  return j;
}

/// One estimator applied to one data matrix.
struct MethodRun {
  SpatialSpectrum spectrum;
  json details = json::object();
  std::optional<SsfnsResult> ssfns;
};

MethodRun run_method(const std::string& method, const ManifoldMatrix& manifold,
                     const CMatrix& snapshots, const ExperimentConfig& config,
                     const SceneGroundTruth* scene) {
  MethodRun run;
  run.details["method"] = method;
  if (method == "ssfns") {
    auto result = run_ssfns(manifold, snapshots, ssfns_options(config));
    run.spectrum = result.spectrum;
    run.details["theta_i_deg"] = angles_of(manifold.grid, result.masked_set);
    run.details["estimated_deg"] = angles_of(manifold.grid, result.estimated);
    json trace = json::array();
    for (const auto& step : result.trace) {
      json entry;
      entry["i_star_deg"] = manifold.grid.angle_deg(step.peak_index);
      entry["peak_power"] = step.peak_power;
      if (std::isfinite(step.q))
        entry["q"] = step.q;
      else
        entry["q"] = nullptr;
      trace.push_back(entry);
    }
    run.details["trace"] = trace;
    run.details["threshold_auto"] = result.threshold_auto;
    run.details["last_threshold_amplitude"] = result.last_threshold;
    run.details["gamma"] = config.gamma;
    run.details["degenerate_rows"] = result.filter.degenerate_rows.size();
    run.ssfns = std::move(result);
  } else if (method == "cbf") {
    run.spectrum = cbf_spectrum(manifold, snapshots);
  } else if (method == "mvdr") {
    const double eps =
        config.mvdr_loading.value_or(default_mvdr_loading(snapshots));
    run.spectrum = mvdr_spectrum(manifold, snapshots, eps);
    run.details["loading_eps"] = eps;
    run.details["rank_deficient"] =
        snapshots.cols() < manifold.sensor_count();
  } else if (method == "music") {
    Index known = 0;
    if (config.known_k)
      known = *config.known_k;
    else if (scene != nullptr && scene->source_count() > 0)
      known = scene->source_count();
    else
      throw ConfigError("music needs a source count (known_k or ground truth)");
    run.spectrum = music_spectrum(manifold, snapshots, known);
    run.details["known_sources"] = known;
  } else if (method == "l1") {
    L1Options options;
    options.lambda = config.l1_lambda;
    auto result = l1_spectrum(manifold, snapshots, options);
    run.spectrum = result.spectrum;
    run.details["lambda_used"] = result.lambda_used;
    run.details["converged"] = result.converged;
    run.details["iterations"] = result.iterations;
  } else {
    throw ConfigError("unknown method: " + method);
  }

  Index peak = 0;
  for (Index i = 1; i < run.spectrum.power.size(); ++i)
    if (run.spectrum.power(i) > run.spectrum.power(peak)) peak = i;
  run.details["peak_deg"] = manifold.grid.angle_deg(peak);
  return run;
}

std::string metrics_csv_header() {
  return "method,q,ssfa,nsa,esa,ca,interference_bar,noise_bar,signal_bar,"
         "sir_db,snr_db,snir_db,cor_db,layout,sensor_count,aperture_v,"
         "delta_deg,elevation_phi,speed_c,frequency_f,source_count,"
         "snapshot_count,scene_snr_db,coherent,seed\n";
}

std::string config_echo_csv(const ExperimentConfig& config,
                            const SceneGroundTruth& scene,
                            std::uint64_t seed) {
  std::string row;
  row += to_string(config.layout);
  row += ',';
  row += std::to_string(config.sensor_count);
  row += ',';
  row += format_double(config.aperture_v);
  row += ',';
  row += format_double(config.delta_deg);
  row += ',';
  row += format_double(config.elevation_phi);
  row += ',';
  row += format_double(config.speed_c);
  row += ',';
  row += format_double(config.frequency_f);
  row += ',';
  row += std::to_string(scene.source_count());
  row += ',';
  row += std::to_string(scene.snapshot_count);
  row += ',';
  row += scene.noise_free ? "inf" : format_double(scene.snr_db);
  row += ',';
  row += scene.coherent ? "1" : "0";
  row += ',';
  row += std::to_string(seed);
  return row;
}

}  // namespace

// ---------------------------------------------------------------------------
// geometry
// ---------------------------------------------------------------------------

int cmd_geometry(const ExperimentConfig& config) {
  const auto dir = prepare_output_dir(config);
  const std::uint64_t seed = config.seeds.empty() ? 0 : config.seeds.front();
  const auto geometry = resolve_geometry(config, seed);

  write_geometry_csv(geometry, dir / "geometry.csv");

  json summary;
  summary["layout"] = to_string(geometry.layout);
  summary["sensor_count"] = geometry.size();
  summary["aperture_v"] = geometry.aperture_v;
  summary["seed"] = seed;
  double extent = 0.0;
  for (Index a = 0; a < geometry.size(); ++a)
    for (Index b = a + 1; b < geometry.size(); ++b)
      extent = std::max(extent, std::hypot(geometry.x(a) - geometry.x(b),
                                           geometry.y(a) - geometry.y(b)));
  summary["max_pairwise_extent"] = extent;
  write_text_file(dir / "geometry.json", summary.dump(2) + "\n");

  write_manifest(config, "geometry", {"geometry.csv", "geometry.json"}, dir);
  return 0;
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

int cmd_estimate(const ExperimentConfig& config) {
  const auto dir = prepare_output_dir(config);
  if (config.methods.empty()) throw ConfigError("no methods requested");

  const std::uint64_t seed = config.seeds.empty() ? 0 : config.seeds.front();
  const auto geometry = resolve_geometry(config, seed);
  const WaveConfig wave(config.speed_c, config.frequency_f);
  const auto grid = GridSpec::make(config.delta_deg, config.elevation_phi);
  const auto manifold = build_manifold(geometry, wave, grid);

  std::vector<std::string> outputs;

  CMatrix snapshots;
  std::optional<SceneGroundTruth> scene;
  if (!config.snapshots_csv.empty()) {
    snapshots = load_snapshots_csv(config.snapshots_csv, geometry.size());
  } else {
    scene = simulate_scene(manifold,
                           resolve_source_indices(config, grid, seed),
                           config.snapshot_count, effective_snr(config),
                           config.coherent, seed);
    snapshots = scene->X;

    json scene_json;
    scene_json["seed"] = seed;
    scene_json["source_count"] = scene->source_count();
    scene_json["source_angles_deg"] = angles_of(grid, scene->source_indices);
    scene_json["snr_db"] =
        scene->noise_free ? json("inf") : json(scene->snr_db);
    scene_json["coherent"] = scene->coherent;
    scene_json["snapshot_count"] = scene->snapshot_count;
    write_text_file(dir / "scene.json", scene_json.dump(2) + "\n");
    outputs.push_back("scene.json");
  }

  std::string metrics_csv = metrics_csv_header();
  bool wrote_metrics = false;

  for (const auto& method : config.methods) {
    auto run = run_method(method, manifold, snapshots, config,
                          scene ? &*scene : nullptr);

    const std::string spectrum_name = "spectrum_" + method + ".csv";
    write_spectrum_csv(run.spectrum, dir / spectrum_name);
    outputs.push_back(spectrum_name);

    if (scene && scene->source_count() > 0) {
      if (run.ssfns) {
        const auto report = compute_metrics_report(run.ssfns->filter, manifold,
                                                   *scene, run.spectrum);
        run.details["metrics"] = metrics_to_json(report);
        metrics_csv += method + ',' + format_double(report.q) + ',' +
                       format_double(report.ssfa) + ',' +
                       format_double(report.nsa) + ',' +
                       format_double(report.esa) + ',' +
                       format_double(report.ca) + ',' +
                       format_double(report.interference_bar) + ',' +
                       format_double(report.noise_bar) + ',' +
                       format_double(report.signal_bar) + ',' +
                       format_double(report.sir_db) + ',' +
                       format_double(report.snr_db) + ',' +
                       format_double(report.snir_db) + ',' +
                       format_double(report.cor_db) + ',' +
                       config_echo_csv(config, *scene, seed) + '\n';
      } else {
        const auto value = cor(run.spectrum, scene->source_indices);
        run.details["cor_db"] = value.db;
        metrics_csv += method + ",,,,,,,,,,,," + format_double(value.db) +
                       ',' + config_echo_csv(config, *scene, seed) + '\n';
      }
      wrote_metrics = true;
    }

    if (run.ssfns && scene && config.noise_off) {
      const bool exact = run.ssfns->estimated == scene->source_indices;
      run.details["exact_recovery"] = exact;
      if (!exact)
        throw NumericalError(
            "noise-off assertion failed: estimated set differs from the truth");
    }

    run.details["config_echo"] = config_to_json(config);
    const std::string result_name = "result_" + method + ".json";
    write_text_file(dir / result_name, run.details.dump(2) + "\n");
    outputs.push_back(result_name);
  }

  if (wrote_metrics) {
    write_text_file(dir / "metrics.csv", metrics_csv);
    outputs.push_back("metrics.csv");
  }

  write_manifest(config, "estimate", outputs, dir);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

namespace {

struct SweepCell {
  double axis_value = 0.0;
  std::uint64_t seed = 0;
};

void run_sweep_cell(const ExperimentConfig& config, const std::string& axis,
                    const SweepCell& cell, std::vector<LongRow>& rows) {
  ExperimentConfig local = config;
  std::optional<Index> sensor_override;
  std::optional<double> aperture_override;
  std::optional<Index> source_override;

  if (axis == "snr") {
    local.snr_db = cell.axis_value;
  } else if (axis == "snapshots") {
    local.snapshot_count = static_cast<Index>(cell.axis_value);
  } else if (axis == "K") {
    source_override = static_cast<Index>(cell.axis_value);
  } else if (axis == "aperture") {
    aperture_override = std::max(cell.axis_value, kMinSweepAperture);
  } else if (axis == "M") {
    sensor_override = static_cast<Index>(cell.axis_value);
  }

  const auto geometry =
      resolve_geometry(local, cell.seed, sensor_override, aperture_override);
  const WaveConfig wave(local.speed_c, local.frequency_f);
  const auto grid = GridSpec::make(local.delta_deg, local.elevation_phi);
  const auto manifold = build_manifold(geometry, wave, grid);
  const auto scene = simulate_scene(
      manifold, resolve_source_indices(local, grid, cell.seed, source_override),
      local.snapshot_count, effective_snr(local), local.coherent, cell.seed);

  auto push = [&](const std::string& method, const std::string& metric,
                  double value) {
    rows.push_back({method, axis, cell.axis_value, cell.seed, metric, value});
  };

  if (axis == "iterations") {
    // Track the iterated (masking) filter after exactly axis_value picks.
    const auto iterations = static_cast<Index>(cell.axis_value);
    ExperimentConfig run_config = local;
    run_config.max_iterations = iterations;
    run_config.threshold = 0.0;
    const auto result =
        run_ssfns(manifold, scene.X, ssfns_options(run_config));
    const auto filter = result.masked_set.empty()
                            ? preliminary_filter(manifold)
                            : masked_filter(manifold, result.masked_set);
    push("ssfns", "q", weight_stats(filter, manifold, result.masked_set).q);
    push("ssfns", "esa", esa(filter, manifold, scene.S));
    push("ssfns", "nsa", nsa(filter, scene.N));
    push("ssfns", "ca", ca(filter, scene.X, scene.S));
    return;
  }

  for (const auto& method : local.methods) {
    auto run = run_method(method, manifold, scene.X, local, &scene);
    push(method, "cor_db", cor(run.spectrum, scene.source_indices).db);
    if (run.ssfns) {
      const auto report =
          compute_metrics_report(run.ssfns->filter, manifold, scene, run.spectrum);
      push(method, "q", report.q);
      push(method, "ssfa", report.ssfa);
      push(method, "nsa", report.nsa);
      push(method, "esa", report.esa);
      push(method, "ca", report.ca);
      push(method, "interference_bar", report.interference_bar);
      push(method, "noise_bar", report.noise_bar);
      push(method, "signal_bar", report.signal_bar);
      push(method, "sir_db", report.sir_db);
      push(method, "snr_db", report.snr_db);
      push(method, "snir_db", report.snir_db);
      push(method, "found_count",
           static_cast<double>(run.ssfns->estimated.size()));
    }
  }
}

}  // namespace

int cmd_sweep(const ExperimentConfig& config) {
  static const std::set<std::string> kAxes{"snr",        "snapshots", "K",
                                           "iterations", "aperture",  "M"};
  if (kAxes.count(config.sweep_axis) == 0)
    throw ConfigError("sweep axis must be one of snr|snapshots|K|iterations|"
                      "aperture|M");
  if (config.sweep_values.empty())
    throw ConfigError("sweep has no axis values");
  if (config.seeds.empty()) throw ConfigError("sweep has no seeds");
  if (config.methods.empty()) throw ConfigError("no methods requested");
  const auto dir = prepare_output_dir(config);

  std::vector<SweepCell> cells;
  for (double value : config.sweep_values)
    for (std::uint64_t seed : config.seeds) cells.push_back({value, seed});

  std::vector<std::vector<LongRow>> cell_rows(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    run_sweep_cell(config, config.sweep_axis, cells[i], cell_rows[i]);
  });

  std::vector<LongRow> rows;
  for (auto& chunk : cell_rows)
    rows.insert(rows.end(), chunk.begin(), chunk.end());
  write_long_csv(rows, dir / "sweep.csv");

  json notes;
  if (config.sweep_axis == "aperture")
    notes["aperture_floor_m"] = kMinSweepAperture;
  write_manifest(config, "sweep", {"sweep.csv"}, dir, notes);
  return 0;
}

// ---------------------------------------------------------------------------
// array study
// ---------------------------------------------------------------------------

int cmd_array_study(const ExperimentConfig& config) {
  const auto dir = prepare_output_dir(config);

  std::vector<std::string> layouts = config.study_layouts;
  if (layouts.empty())
    layouts = {"uniform_random_2d", "normal_random_2d",   "uniform_circle",
               "concentric_circles", "spiral",            "uniform_linear"};
  std::vector<Index> element_counts = config.study_element_counts;
  if (element_counts.empty()) element_counts = {8, 16, 32, 64};
  std::vector<double> apertures = config.study_apertures;
  if (apertures.empty()) apertures = {config.aperture_v};
  if (config.seeds.empty()) throw ConfigError("array study has no seeds");

  struct StudyCell {
    LayoutKind layout;
    Index sensors;
    double aperture;
    std::uint64_t seed;
  };
  std::vector<StudyCell> cells;
  for (const auto& name : layouts) {
    const auto kind = layout_from_string(name);
    for (Index m : element_counts)
      for (double v : apertures)
        for (std::uint64_t seed : config.seeds)
          cells.push_back({kind, m, v, seed});
  }

  const WaveConfig wave(config.speed_c, config.frequency_f);
  const auto grid = GridSpec::make(config.delta_deg, config.elevation_phi);

  std::vector<std::string> lines(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const auto& cell = cells[i];
    const auto geometry = generate(cell.layout, cell.sensors, cell.aperture,
                                   cell.seed, config.spiral_tightness);
    const auto manifold = build_manifold(geometry, wave, grid);
    const auto filter = preliminary_filter(manifold);
    const double q_value = weight_stats(filter, manifold).q;
    const double ssfa_value = ssfa(filter, manifold);

    std::mt19937_64 rng(derive_seed(cell.seed, 0x6172726179737464ULL));
    std::normal_distribution<double> component(0.0, std::sqrt(0.5));
    CMatrix noise(cell.sensors, config.snapshot_count);
    for (Index t = 0; t < noise.cols(); ++t)
      for (Index j = 0; j < noise.rows(); ++j)
        noise(j, t) = Complex(component(rng), component(rng));
    const double nsa_value = nsa(filter, noise);

    std::string line = to_string(cell.layout);
    line += ',';
    line += std::to_string(cell.sensors);
    line += ',';
    line += format_double(cell.aperture);
    line += ',';
    line += std::to_string(cell.seed);
    line += ',';
    line += format_double(q_value);
    line += ',';
    line += format_double(ssfa_value);
    line += ',';
    line += format_double(nsa_value);
    line += '\n';
    lines[i] = std::move(line);
  });

  std::string body = "layout,sensor_count,aperture_v,seed,q,ssfa,nsa\n";
  for (const auto& line : lines) body += line;
  write_text_file(dir / "array_study.csv", body);

  write_manifest(config, "array-study", {"array_study.csv"}, dir);
  return 0;
}

}  // namespace doalab
