#pragma once

#include "doalab/manifold.hpp"
#include "doalab/scenesim.hpp"
#include "doalab/ssfns.hpp"
#include "doalab/types.hpp"

namespace doalab {

/// dB value capped to +-300; `capped` reports whether a zero numerator or
/// denominator forced the sentinel.
struct DbValue {
  double db = 0.0;
  bool capped = false;
};

DbValue ratio_db(double numerator, double denominator);

/// Frobenius distance of the weight matrix B * A~ from identity.
double ssfa(const SpatialFilter& filter, const ManifoldMatrix& manifold);

/// Mean per-snapshot Frobenius norm of the filtered noise B * N_t.
double nsa(const SpatialFilter& filter, const CMatrix& noise);

/// Mean per-snapshot Frobenius norm of B * A~ * S_t - S_t.
double esa(const SpatialFilter& filter, const ManifoldMatrix& manifold,
           const CMatrix& sources);

/// Mean per-snapshot Frobenius norm of B * X_t - S_t.
double ca(const SpatialFilter& filter, const CMatrix& snapshots,
          const CMatrix& sources);

struct EnergyRatios {
  double interference_bar = 0.0;  // mean |B A~ S - S|^2 per direction-snapshot
  double noise_bar = 0.0;         // mean |B N|^2 per direction-snapshot
  double signal_bar = 0.0;        // mean |S|^2 per source-snapshot
  DbValue sir_db;
  DbValue snr_db;
  DbValue snir_db;
};

/// The source count K is taken from the number of nonzero rows of S.
EnergyRatios energy_ratios(const SpatialFilter& filter,
                           const ManifoldMatrix& manifold,
                           const CMatrix& sources, const CMatrix& noise);

/// Ratio (dB) of mean spectrum power at the true indices to the mean power
/// elsewhere. `tolerance_cells` widens the "correct" set by that many grid
/// cells on each side of every true index (0 keeps exact membership).
DbValue cor(const SpatialSpectrum& spectrum, const IndexList& true_indices,
            Index tolerance_cells = 0);

/// Everything above for one (filter, scene, spectrum) triple; the harness
/// writes these as one metrics row.
struct MetricsReport {
  double q = 0.0;
  double ssfa = 0.0;
  double nsa = 0.0;
  double esa = 0.0;
  double ca = 0.0;
  double interference_bar = 0.0;
  double noise_bar = 0.0;
  double signal_bar = 0.0;
  double sir_db = 0.0;
  double snr_db = 0.0;
  double snir_db = 0.0;
  double cor_db = 0.0;
};

MetricsReport compute_metrics_report(const SpatialFilter& filter,
                                     const ManifoldMatrix& manifold,
                                     const SceneGroundTruth& scene,
                                     const SpatialSpectrum& spectrum);

}  // namespace doalab
