#include "doalab/metrics.hpp"

#include "doalab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace doalab {

namespace {

constexpr double kDbCap = 300.0;
constexpr Index kColumnBlock = 512;

void check_filter(const SpatialFilter& filter, const ManifoldMatrix& manifold) {
  if (filter.manifold_fp != manifold.fingerprint())
    throw ConfigError("filter was built from a different manifold");
}

/// Indices of rows carrying any energy; the sparse source matrices built by
/// the simulator have exact zeros elsewhere.
IndexList nonzero_rows(const CMatrix& matrix) {
  IndexList rows;
  for (Index i = 0; i < matrix.rows(); ++i)
    if (matrix.row(i).squaredNorm() > 0.0) rows.push_back(i);
  return rows;
}

/// A~ * S using only the rows of S that are occupied.
CMatrix manifold_times_sparse(const ManifoldMatrix& manifold, const CMatrix& s,
                              const IndexList& rows) {
  CMatrix out = CMatrix::Zero(manifold.sensor_count(), s.cols());
  for (Index idx : rows)
    out.noalias() += manifold.entries.col(idx) * s.row(idx);
  return out;
}

}  // namespace

DbValue ratio_db(double numerator, double denominator) {
  DbValue out;
  if (!(denominator > 0.0) || !(numerator > 0.0)) {
    out.capped = true;
    out.db = numerator > 0.0 ? kDbCap : (denominator > 0.0 ? -kDbCap : 0.0);
    return out;
  }
  out.db = 10.0 * std::log10(numerator / denominator);
  if (out.db > kDbCap) {
    out.db = kDbCap;
    out.capped = true;
  } else if (out.db < -kDbCap) {
    out.db = -kDbCap;
    out.capped = true;
  }
  return out;
}

double ssfa(const SpatialFilter& filter, const ManifoldMatrix& manifold) {
  check_filter(filter, manifold);
  const Index grid_size = manifold.grid_size();
  double acc = 0.0;
  for (Index start = 0; start < grid_size; start += kColumnBlock) {
    const Index width = std::min(kColumnBlock, grid_size - start);
    CMatrix block = filter.rows * manifold.entries.middleCols(start, width);
    for (Index local = 0; local < width; ++local)
      block(start + local, local) -= 1.0;
    acc += block.squaredNorm();
  }
  return std::sqrt(acc);
}

double nsa(const SpatialFilter& filter, const CMatrix& noise) {
  if (noise.rows() != filter.rows.cols())
    throw ConfigError("noise rows do not match the filter's sensor count");
  const CMatrix transformed = filter.rows * noise;
  double acc = 0.0;
  for (Index t = 0; t < transformed.cols(); ++t)
    acc += transformed.col(t).norm();
  return acc / static_cast<double>(noise.cols());
}

double esa(const SpatialFilter& filter, const ManifoldMatrix& manifold,
           const CMatrix& sources) {
  check_filter(filter, manifold);
  if (sources.rows() != manifold.grid_size())
    throw ConfigError("source rows do not match the grid size");
  const CMatrix received =
      manifold_times_sparse(manifold, sources, nonzero_rows(sources));
  const CMatrix residual = filter.rows * received - sources;
  double acc = 0.0;
  for (Index t = 0; t < residual.cols(); ++t) acc += residual.col(t).norm();
  return acc / static_cast<double>(sources.cols());
}

double ca(const SpatialFilter& filter, const CMatrix& snapshots,
          const CMatrix& sources) {
  if (snapshots.rows() != filter.rows.cols())
    throw ConfigError("snapshot rows do not match the filter's sensor count");
  if (snapshots.cols() != sources.cols())
    throw ConfigError("snapshot and source snapshot counts differ");
  const CMatrix residual = filter.rows * snapshots - sources;
  double acc = 0.0;
  for (Index t = 0; t < residual.cols(); ++t) acc += residual.col(t).norm();
  return acc / static_cast<double>(snapshots.cols());
}

EnergyRatios energy_ratios(const SpatialFilter& filter,
                           const ManifoldMatrix& manifold,
                           const CMatrix& sources, const CMatrix& noise) {
  check_filter(filter, manifold);
  const auto occupied = nonzero_rows(sources);
  const auto source_count = static_cast<double>(occupied.size());
  const auto grid_size = static_cast<double>(manifold.grid_size());
  const auto snapshots = static_cast<double>(sources.cols());

  EnergyRatios out;
  const CMatrix received = manifold_times_sparse(manifold, sources, occupied);
  out.interference_bar =
      (filter.rows * received - sources).squaredNorm() / (snapshots * grid_size);
  out.noise_bar =
      (filter.rows * noise).squaredNorm() / (snapshots * grid_size);
  out.signal_bar = source_count > 0.0
                       ? sources.squaredNorm() / (snapshots * source_count)
                       : 0.0;
  out.sir_db = ratio_db(out.signal_bar, out.interference_bar);
  out.snr_db = ratio_db(out.signal_bar, out.noise_bar);
  out.snir_db = ratio_db(out.signal_bar, out.interference_bar + out.noise_bar);
  return out;
}

DbValue cor(const SpatialSpectrum& spectrum, const IndexList& true_indices,
            Index tolerance_cells) {
  const Index grid_size = spectrum.power.size();
  if (true_indices.empty())
    throw ConfigError("cor needs at least one true direction");
  std::set<Index> correct;
  for (Index idx : true_indices) {
    if (idx < 0 || idx >= grid_size)
      throw ConfigError("true direction index out of grid range");
    for (Index off = -tolerance_cells; off <= tolerance_cells; ++off)
      correct.insert(((idx + off) % grid_size + grid_size) % grid_size);
  }
  const auto correct_count = static_cast<Index>(correct.size());
  if (correct_count >= grid_size)
    throw ConfigError("tolerance window swallows the whole grid");

  double on = 0.0;
  double off = 0.0;
  for (Index i = 0; i < grid_size; ++i) {
    if (correct.count(i) > 0)
      on += spectrum.power(i);
    else
      off += spectrum.power(i);
  }
  return ratio_db(static_cast<double>(grid_size - correct_count) * on,
                  static_cast<double>(correct_count) * off);
}

MetricsReport compute_metrics_report(const SpatialFilter& filter,
                                     const ManifoldMatrix& manifold,
                                     const SceneGroundTruth& scene,
                                     const SpatialSpectrum& spectrum) {
  MetricsReport report;
  report.q = weight_stats(filter, manifold, filter.masked).q;
  report.ssfa = ssfa(filter, manifold);
  report.nsa = nsa(filter, scene.N);
  report.esa = esa(filter, manifold, scene.S);
  report.ca = ca(filter, scene.X, scene.S);
  const auto ratios = energy_ratios(filter, manifold, scene.S, scene.N);
  report.interference_bar = ratios.interference_bar;
  report.noise_bar = ratios.noise_bar;
  report.signal_bar = ratios.signal_bar;
  report.sir_db = ratios.sir_db.db;
  report.snr_db = ratios.snr_db.db;
  report.snir_db = ratios.snir_db.db;
  report.cor_db = scene.source_indices.empty()
                      ? 0.0
                      : cor(spectrum, scene.source_indices).db;
  return report;
}

}  // namespace doalab
