#include "doalab/scenesim.hpp"

#include "doalab/errors.hpp"
#include "doalab/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>

namespace doalab {

namespace {

constexpr std::uint64_t kWaveformTag = 0x7761766566726d31ULL;
constexpr std::uint64_t kNoiseTag = 0x6e6f697365303232ULL;

Complex circular_gaussian(std::mt19937_64& rng,
                          std::normal_distribution<double>& component) {
  const double re = component(rng);
  const double im = component(rng);
  return {re, im};
}

}  // namespace

SceneGroundTruth simulate_scene(const ManifoldMatrix& manifold,
                                const IndexList& source_indices,
                                Index snapshot_count, double snr_db,
                                bool coherent, std::uint64_t seed) {
  const Index sensors = manifold.sensor_count();
  const Index grid_size = manifold.grid_size();
  const auto source_count = static_cast<Index>(source_indices.size());

  if (snapshot_count < 1) throw ConfigError("need at least one snapshot");
  if (source_count >= sensors)
    throw TooManySources("source count " + std::to_string(source_count) +
                         " must stay below sensor count " +
                         std::to_string(sensors));
  {
    std::set<Index> distinct;
    for (Index idx : source_indices) {
      if (idx < 0 || idx >= grid_size)
        throw ConfigError("source index out of grid range");
      if (!distinct.insert(idx).second)
        throw ConfigError("duplicate source index");
    }
  }

  SceneGroundTruth scene;
  scene.source_indices = source_indices;
  std::sort(scene.source_indices.begin(), scene.source_indices.end());
  scene.snapshot_count = snapshot_count;
  scene.snr_db = snr_db;
  scene.coherent = coherent;
  scene.seed = seed;
  scene.noise_free = std::isinf(snr_db) && snr_db > 0.0;

  scene.S = CMatrix::Zero(grid_size, snapshot_count);

  std::mt19937_64 wave_rng(derive_seed(seed, kWaveformTag));
  std::normal_distribution<double> half_var(0.0, std::sqrt(0.5));

  if (source_count > 0) {
    if (coherent) {
      std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
      std::vector<Complex> factors;
      factors.reserve(static_cast<std::size_t>(source_count));
      for (Index k = 0; k < source_count; ++k)
        factors.push_back(std::polar(1.0, phase(wave_rng)));
      for (Index t = 0; t < snapshot_count; ++t) {
        const Complex base = circular_gaussian(wave_rng, half_var);
        for (Index k = 0; k < source_count; ++k)
          scene.S(scene.source_indices[static_cast<std::size_t>(k)], t) =
              factors[static_cast<std::size_t>(k)] * base;
      }
    } else {
      for (Index t = 0; t < snapshot_count; ++t)
        for (Index k = 0; k < source_count; ++k)
          scene.S(scene.source_indices[static_cast<std::size_t>(k)], t) =
              circular_gaussian(wave_rng, half_var);
    }
  }

  // Received clean component via the source columns only; the zero rows of S
  // contribute nothing.
  CMatrix clean = CMatrix::Zero(sensors, snapshot_count);
  for (Index k = 0; k < source_count; ++k) {
    const Index idx = scene.source_indices[static_cast<std::size_t>(k)];
    clean.noalias() += manifold.entries.col(idx) * scene.S.row(idx);
  }

  double noise_variance = 0.0;
  if (!scene.noise_free) {
    if (source_count == 0) {
      noise_variance = 1.0;
    } else {
      const double mean_signal_power =
          clean.squaredNorm() /
          static_cast<double>(sensors * snapshot_count);
      noise_variance = mean_signal_power / std::pow(10.0, snr_db / 10.0);
    }
  }

  scene.N = CMatrix::Zero(sensors, snapshot_count);
  if (noise_variance > 0.0) {
    std::mt19937_64 noise_rng(derive_seed(seed, kNoiseTag));
    std::normal_distribution<double> noise_component(
        0.0, std::sqrt(noise_variance / 2.0));
    for (Index t = 0; t < snapshot_count; ++t)
      for (Index j = 0; j < sensors; ++j)
        scene.N(j, t) = circular_gaussian(noise_rng, noise_component);
  }

  scene.X = clean + scene.N;
  return scene;
}

IndexList draw_source_indices(Index grid_size, Index source_count,
                              std::uint64_t seed) {
  if (source_count < 0 || source_count > grid_size)
    throw ConfigError("cannot draw " + std::to_string(source_count) +
                      " distinct directions from a grid of " +
                      std::to_string(grid_size));
  std::mt19937_64 rng(derive_seed(seed, 0x736f757263657331ULL));
  std::uniform_int_distribution<Index> uni(0, grid_size - 1);
  std::set<Index> chosen;
  while (static_cast<Index>(chosen.size()) < source_count)
    chosen.insert(uni(rng));
  return {chosen.begin(), chosen.end()};
}

CMatrix load_snapshots_csv(const std::filesystem::path& path,
                           Index expected_rows) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open snapshot file: " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> values;
    values.reserve(fields.size());
    for (const auto& field : fields)
      values.push_back(parse_double_field(field, path.string()));
    rows.push_back(std::move(values));
  }
  if (rows.empty())
    throw ParseError("snapshot file has no rows: " + path.string());

  const std::size_t width = rows.front().size();
  for (const auto& row : rows)
    if (row.size() != width)
      throw RaggedRows("snapshot rows have inconsistent column counts in " +
                       path.string());
  if (width == 0 || width % 2 != 0)
    throw ParseError("snapshot rows need an even number of re,im columns");
  if (expected_rows >= 0 && static_cast<Index>(rows.size()) != expected_rows)
    throw RaggedRows("snapshot file has " + std::to_string(rows.size()) +
                     " rows but the geometry has " +
                     std::to_string(expected_rows) + " sensors");

  CMatrix snapshots(static_cast<Index>(rows.size()),
                    static_cast<Index>(width / 2));
  for (Index j = 0; j < snapshots.rows(); ++j) {
    const auto& row = rows[static_cast<std::size_t>(j)];
    for (Index t = 0; t < snapshots.cols(); ++t)
      snapshots(j, t) = Complex(row[static_cast<std::size_t>(2 * t)],
                                row[static_cast<std::size_t>(2 * t + 1)]);
  }
  return snapshots;
}

void write_snapshots_csv(const CMatrix& snapshots,
                         const std::filesystem::path& path) {
  std::string body;
  for (Index j = 0; j < snapshots.rows(); ++j) {
    for (Index t = 0; t < snapshots.cols(); ++t) {
      if (t > 0) body += ',';
      body += format_double(snapshots(j, t).real());
      body += ',';
      body += format_double(snapshots(j, t).imag());
    }
    body += '\n';
  }
  write_text_file(path, body);
}

}  // namespace doalab
