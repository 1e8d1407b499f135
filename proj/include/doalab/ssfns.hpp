#pragma once

#include "doalab/manifold.hpp"
#include "doalab/types.hpp"

#include <optional>
#include <vector>

namespace doalab {

enum class FilterStage { preliminary, iterated, final_stage };

/// Spatial filter mapping sensor-domain snapshots to the direction domain.
/// Row i is aimed at grid direction i; rows listed in degenerate_rows were
/// indistinguishable from the masked span and are zeroed.
struct SpatialFilter {
  CMatrix rows;      // R x M
  IndexList masked;  // directions the filter is constrained to null, in order
  FilterStage stage = FilterStage::preliminary;
  GridSpec grid;
  std::uint64_t manifold_fp = 0;
  IndexList degenerate_rows;
};

/// Closed-form minimizer of the per-row design problem: equal element moduli,
/// unit gain toward `steering`, smallest modulus. For unit-modulus steering
/// entries this is conj(a) / M.
CRowVector matched_phase_row(const CVector& steering);

/// Worst-case cross-direction leakage of C = B * A~. q_i is the largest
/// off-diagonal |c_ij| of row i over participating columns; q is the largest
/// q_i over participating rows.
struct WeightMatrixStats {
  double q = 0.0;
  RealVector q_i;
  IndexList excluded;
};

/// Nonnegative per-direction powers, averaged over snapshots.
struct SpatialSpectrum {
  RealVector power;
  GridSpec grid;
  Index snapshots_averaged = 0;
};

struct IterationStep {
  Index peak_index = -1;
  double peak_power = 0.0;
  double q = 0.0;  // NaN unless q logging was requested
};

struct SsfnsOptions {
  /// Known source count: iterate exactly this many times, no threshold,
  /// and report every masked direction as an estimate.
  std::optional<Index> known_k;
  /// Iteration cap when the source count is unknown; default min(M-1, 15).
  std::optional<Index> max_iterations;
  /// Fixed peak-amplitude stop threshold; unset selects the automatic
  /// median-calibrated noise-floor rule, and any value <= 0 disables the
  /// threshold entirely.
  std::optional<double> threshold;
  /// Relative final-spectrum power for keeping a masked direction as an
  /// estimated source.
  double gamma = 0.5;
  /// Log q per iteration (costs an extra R x R scan per iteration).
  bool compute_q = false;
};

struct SsfnsResult {
  IndexList masked_set;  // directions masked during iteration, in order found
  SpatialFilter filter;  // final filter built from the masked set
  SpatialSpectrum spectrum;  // spectrum of the final filter
  IndexList estimated;       // sorted subset of masked_set kept as sources
  std::vector<IterationStep> trace;
  double last_threshold = 0.0;
  bool threshold_auto = false;
};

/// Matched-phase filter with equal per-row element moduli and unit gain
/// toward each row's own direction. Independent of the data.
SpatialFilter preliminary_filter(const ManifoldMatrix& manifold);

/// Filter whose rows are orthogonal to the steering vectors of every masked
/// direction, with unit gain toward the row's own direction for unmasked
/// rows. Masked rows are zeroed. Rows whose own steering vector falls inside
/// the masked span (up to 1e-10) are zeroed and recorded as degenerate.
SpatialFilter masked_filter(const ManifoldMatrix& manifold,
                            const IndexList& masked);

/// Per-row refinement used after the iteration: every row keeps unit gain
/// toward its own direction while nulling the rest of the masked set.
SpatialFilter final_filter(const ManifoldMatrix& manifold,
                           const IndexList& masked_set);

WeightMatrixStats weight_stats(const SpatialFilter& filter,
                               const ManifoldMatrix& manifold,
                               const IndexList& excluded = {});

/// Snapshot-averaged power per direction: power[i] = mean_t |b_i x_t|^2.
SpatialSpectrum spectrum(const SpatialFilter& filter, const CMatrix& snapshots);

SsfnsResult run_ssfns(const ManifoldMatrix& manifold, const CMatrix& snapshots,
                      const SsfnsOptions& options = {});

}  // namespace doalab
