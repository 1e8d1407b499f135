#pragma once

#include "doalab/manifold.hpp"
#include "doalab/types.hpp"

#include <filesystem>

namespace doalab {

/// Synthetic scene with full ground truth: sparse source matrix S (R x T,
/// nonzero only on source rows), noise N (M x T) and received data
/// X = A~ * S + N (M x T).
struct SceneGroundTruth {
  IndexList source_indices;  // sorted grid indices of the K sources
  CMatrix S;                 // R x T
  CMatrix N;                 // M x T
  CMatrix X;                 // M x T
  double snr_db = 0.0;
  bool coherent = false;
  bool noise_free = false;
  Index snapshot_count = 0;
  std::uint64_t seed = 0;

  Index source_count() const { return static_cast<Index>(source_indices.size()); }
};

/// Generate a scene. Waveforms are unit-power circular complex Gaussians,
/// independent per source and snapshot when incoherent; when coherent all
/// sources share one base waveform up to a fixed random unit-modulus factor.
/// Noise is white circular Gaussian with variance chosen so that
/// 10*log10(mean received signal power per sensor / noise variance) equals
/// snr_db. Passing +infinity for snr_db turns the noise off entirely; a
/// noise-only scene (no sources) gets unit-variance noise.
SceneGroundTruth simulate_scene(const ManifoldMatrix& manifold,
                                const IndexList& source_indices,
                                Index snapshot_count, double snr_db,
                                bool coherent, std::uint64_t seed);

/// Draw K distinct grid indices uniformly at random.
IndexList draw_source_indices(Index grid_size, Index source_count,
                              std::uint64_t seed);

/// Read an M x T complex snapshot matrix from CSV with 2T columns
/// interleaved re,im. When expected_rows >= 0 the row count must match.
CMatrix load_snapshots_csv(const std::filesystem::path& path,
                           Index expected_rows = -1);

void write_snapshots_csv(const CMatrix& snapshots,
                         const std::filesystem::path& path);

}  // namespace doalab
