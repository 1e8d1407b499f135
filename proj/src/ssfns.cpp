#include "doalab/ssfns.hpp"

#include "doalab/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace doalab {

namespace {

constexpr double kDegenerateNorm = 1e-10;     // ||a_i^H Q|| below this zeroes the row
constexpr double kRankCutoffRel = 1e-10;      // singular value cutoff, relative
constexpr Index kWeightBlock = 512;           // column block for R x R scans

void check_mask_indices(const ManifoldMatrix& manifold, const IndexList& masked) {
  for (Index idx : masked)
    if (idx < 0 || idx >= manifold.grid_size())
      throw ConfigError("masked direction index out of range");
}

/// Orthonormal basis of the orthogonal complement of the masked steering
/// columns, via SVD of their adjoint with a relative rank cutoff.
CMatrix nullspace_basis(const CMatrix& masked_columns, Index sensors) {
  if (masked_columns.cols() == 0)
    return CMatrix::Identity(sensors, sensors);
  Eigen::JacobiSVD<CMatrix> svd(masked_columns.adjoint(), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  const double cutoff = sv.size() > 0 ? kRankCutoffRel * sv(0) : 0.0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return svd.matrixV().rightCols(sensors - rank);
}

/// Rows of a projector-based filter for all grid directions at once:
/// b_i = a_i^H Q Q^H / ||a_i^H Q||^2, zeroing rows whose steering vector is
/// swallowed by the masked span.
void fill_projected_rows(const ManifoldMatrix& manifold, const CMatrix& basis,
                         const std::set<Index>& skip, SpatialFilter& filter) {
  const CMatrix projected = basis.adjoint() * manifold.entries;  // (M-r) x R
  const CMatrix lifted = basis * projected;                      // M x R
  for (Index i = 0; i < manifold.grid_size(); ++i) {
    if (skip.count(i) > 0) continue;
    const double norm2 = projected.col(i).squaredNorm();
    if (norm2 < kDegenerateNorm * kDegenerateNorm) {
      filter.rows.row(i).setZero();
      filter.degenerate_rows.push_back(i);
      continue;
    }
    filter.rows.row(i) = lifted.col(i).adjoint() / norm2;
  }
}

Index argmax_power(const RealVector& power) {
  Index best = 0;
  for (Index i = 1; i < power.size(); ++i)
    if (power(i) > power(best)) best = i;
  return best;
}

double median_power(const RealVector& power) {
  std::vector<double> values(power.data(), power.data() + power.size());
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

/// Automatic stop level: the median power estimates the noise floor, and the
/// Wilson-Hilferty quantile approximation for T-averaged exponential cells
/// predicts how far above that floor the largest noise-only cell can reach
/// across R grid cells. Anything below 1.2x (amplitude) of that prediction is
/// treated as noise.
double auto_threshold_power(const RealVector& power, Index snapshots) {
  const auto grid_size = static_cast<double>(power.size());
  const auto t = static_cast<double>(snapshots);
  const double z = std::sqrt(2.0 * std::log(2.0 * grid_size));
  const double u = 1.0 - 1.0 / (9.0 * t);
  const double peak_over_mean = std::pow(u + z / (3.0 * std::sqrt(t)), 3.0);
  const double median_over_mean = std::pow(u, 3.0);
  return 1.44 * (peak_over_mean / median_over_mean) * median_power(power);
}

}  // namespace

CRowVector matched_phase_row(const CVector& steering) {
  const double modulus_sum = steering.cwiseAbs().sum();
  CRowVector row(steering.size());
  for (Index j = 0; j < steering.size(); ++j)
    row(j) = std::conj(steering(j)) / (std::abs(steering(j)) * modulus_sum);
  return row;
}

SpatialFilter preliminary_filter(const ManifoldMatrix& manifold) {
  SpatialFilter filter;
  filter.stage = FilterStage::preliminary;
  filter.grid = manifold.grid;
  filter.manifold_fp = manifold.fingerprint();
  filter.rows.resize(manifold.grid_size(), manifold.sensor_count());
  for (Index i = 0; i < manifold.grid_size(); ++i)
    filter.rows.row(i) = matched_phase_row(manifold.entries.col(i));
  return filter;
}

SpatialFilter masked_filter(const ManifoldMatrix& manifold,
                            const IndexList& masked) {
  check_mask_indices(manifold, masked);
  const std::set<Index> mask_set(masked.begin(), masked.end());
  if (static_cast<Index>(mask_set.size()) >= manifold.sensor_count())
    throw NullspaceRankError(
        "masked set of size " + std::to_string(mask_set.size()) +
        " leaves no null space with " +
        std::to_string(manifold.sensor_count()) + " sensors");

  SpatialFilter filter;
  filter.stage = FilterStage::iterated;
  filter.grid = manifold.grid;
  filter.manifold_fp = manifold.fingerprint();
  filter.masked = masked;
  filter.rows = CMatrix::Zero(manifold.grid_size(), manifold.sensor_count());

  CMatrix masked_columns(manifold.sensor_count(),
                         static_cast<Index>(masked.size()));
  for (Index k = 0; k < masked_columns.cols(); ++k)
    masked_columns.col(k) =
        manifold.entries.col(masked[static_cast<std::size_t>(k)]);

  const CMatrix basis = nullspace_basis(masked_columns, manifold.sensor_count());
  fill_projected_rows(manifold, basis, mask_set, filter);
  return filter;
}

SpatialFilter final_filter(const ManifoldMatrix& manifold,
                           const IndexList& masked_set) {
  check_mask_indices(manifold, masked_set);
  const std::set<Index> distinct(masked_set.begin(), masked_set.end());
  if (static_cast<Index>(distinct.size()) >= manifold.sensor_count())
    throw NullspaceRankError("final mask set too large for the array");

  SpatialFilter filter;
  filter.stage = FilterStage::final_stage;
  filter.grid = manifold.grid;
  filter.manifold_fp = manifold.fingerprint();
  filter.masked = masked_set;
  filter.rows = CMatrix::Zero(manifold.grid_size(), manifold.sensor_count());

  // Rows outside the masked set share one projector against the whole set.
  CMatrix all_columns(manifold.sensor_count(),
                      static_cast<Index>(masked_set.size()));
  for (Index k = 0; k < all_columns.cols(); ++k)
    all_columns.col(k) =
        manifold.entries.col(masked_set[static_cast<std::size_t>(k)]);
  const CMatrix shared_basis =
      nullspace_basis(all_columns, manifold.sensor_count());
  fill_projected_rows(manifold, shared_basis, distinct, filter);

  // Each masked row nulls the rest of the set but keeps its own direction.
  for (Index own : distinct) {
    IndexList others;
    for (Index idx : distinct)
      if (idx != own) others.push_back(idx);
    CMatrix columns(manifold.sensor_count(), static_cast<Index>(others.size()));
    for (Index k = 0; k < columns.cols(); ++k)
      columns.col(k) = manifold.entries.col(others[static_cast<std::size_t>(k)]);
    const CMatrix basis = nullspace_basis(columns, manifold.sensor_count());
    const CVector projected = basis.adjoint() * manifold.entries.col(own);
    const double norm2 = projected.squaredNorm();
    if (norm2 < kDegenerateNorm * kDegenerateNorm) {
      filter.rows.row(own).setZero();
      filter.degenerate_rows.push_back(own);
      continue;
    }
    filter.rows.row(own) = (basis * projected).adjoint() / norm2;
  }
  std::sort(filter.degenerate_rows.begin(), filter.degenerate_rows.end());
  return filter;
}

WeightMatrixStats weight_stats(const SpatialFilter& filter,
                               const ManifoldMatrix& manifold,
                               const IndexList& excluded) {
  if (filter.manifold_fp != manifold.fingerprint())
    throw ConfigError("filter was built from a different manifold");
  const Index grid_size = manifold.grid_size();
  const std::set<Index> skip(excluded.begin(), excluded.end());

  WeightMatrixStats stats;
  stats.excluded = excluded;
  stats.q_i = RealVector::Zero(grid_size);

  for (Index start = 0; start < grid_size; start += kWeightBlock) {
    const Index width = std::min(kWeightBlock, grid_size - start);
    const CMatrix block =
        filter.rows * manifold.entries.middleCols(start, width);
    for (Index local = 0; local < width; ++local) {
      const Index col = start + local;
      if (skip.count(col) > 0) continue;
      for (Index row = 0; row < grid_size; ++row) {
        if (row == col || skip.count(row) > 0) continue;
        const double magnitude = std::abs(block(row, local));
        if (magnitude > stats.q_i(row)) stats.q_i(row) = magnitude;
      }
    }
  }
  stats.q = 0.0;
  for (Index row = 0; row < grid_size; ++row)
    if (skip.count(row) == 0) stats.q = std::max(stats.q, stats.q_i(row));
  return stats;
}

SpatialSpectrum spectrum(const SpatialFilter& filter, const CMatrix& snapshots) {
  if (snapshots.rows() != filter.rows.cols())
    throw ConfigError("snapshot rows do not match the filter's sensor count");
  if (snapshots.cols() < 1) throw ConfigError("need at least one snapshot");

  SpatialSpectrum out;
  out.grid = filter.grid;
  out.snapshots_averaged = snapshots.cols();
  // Per-column products keep every snapshot on the same kernel path, so
  // averaging identities hold bit-for-bit.
  out.power = RealVector::Zero(filter.rows.rows());
  CVector transformed(filter.rows.rows());
  for (Index t = 0; t < snapshots.cols(); ++t) {
    transformed.noalias() = filter.rows * snapshots.col(t);
    out.power += transformed.cwiseAbs2();
  }
  out.power /= static_cast<double>(snapshots.cols());
  return out;
}

SsfnsResult run_ssfns(const ManifoldMatrix& manifold, const CMatrix& snapshots,
                      const SsfnsOptions& options) {
  const Index sensors = manifold.sensor_count();

  Index iteration_cap = 0;
  bool threshold_disabled = false;
  if (options.known_k) {
    if (*options.known_k < 0 || *options.known_k >= sensors)
      throw ConfigError("known source count must lie in [0, M)");
    iteration_cap = *options.known_k;
    threshold_disabled = true;
  } else if (options.max_iterations) {
    if (*options.max_iterations < 0 || *options.max_iterations >= sensors)
      throw ConfigError("iteration cap must lie in [0, M)");
    iteration_cap = *options.max_iterations;
  } else {
    iteration_cap = std::min<Index>(sensors - 1, 15);
  }

  SsfnsResult result;
  result.threshold_auto =
      !threshold_disabled && !options.threshold.has_value();
  const double fixed_threshold =
      (!threshold_disabled && options.threshold.has_value())
          ? std::max(0.0, *options.threshold)
          : 0.0;

  SpatialFilter filter = preliminary_filter(manifold);
  SpatialSpectrum current = spectrum(filter, snapshots);

  for (Index t = 1; t <= iteration_cap; ++t) {
    const Index peak = argmax_power(current.power);
    const double peak_amplitude = std::sqrt(current.power(peak));
    if (peak_amplitude == 0.0) break;  // no energy left to strip

    double threshold = fixed_threshold;
    if (result.threshold_auto)
      threshold = std::sqrt(
          auto_threshold_power(current.power, current.snapshots_averaged));
    result.last_threshold = threshold;
    if (peak_amplitude < threshold) break;

    result.masked_set.push_back(peak);
    filter = masked_filter(manifold, result.masked_set);
    if (static_cast<Index>(filter.degenerate_rows.size() +
                           result.masked_set.size()) >= manifold.grid_size())
      throw EmptySpectrum("every grid direction fell inside the masked span");
    current = spectrum(filter, snapshots);

    IterationStep step;
    step.peak_index = peak;
    step.peak_power = peak_amplitude * peak_amplitude;
    step.q = std::numeric_limits<double>::quiet_NaN();
    if (options.compute_q)
      step.q = weight_stats(filter, manifold, result.masked_set).q;
    result.trace.push_back(step);
  }

  result.filter = final_filter(manifold, result.masked_set);
  result.spectrum = spectrum(result.filter, snapshots);

  if (options.known_k) {
    result.estimated = result.masked_set;
  } else if (!result.masked_set.empty()) {
    double best = 0.0;
    for (Index idx : result.masked_set)
      best = std::max(best, result.spectrum.power(idx));
    for (Index idx : result.masked_set)
      if (result.spectrum.power(idx) >= options.gamma * best)
        result.estimated.push_back(idx);
  }
  std::sort(result.estimated.begin(), result.estimated.end());
  result.estimated.erase(
      std::unique(result.estimated.begin(), result.estimated.end()),
      result.estimated.end());
  return result;
}

}  // namespace doalab
