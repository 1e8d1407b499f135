#pragma once

#include "doalab/geometry.hpp"
#include "doalab/types.hpp"

#include <filesystem>

namespace doalab {

/// Narrowband carrier description.
struct WaveConfig {
  double speed_c = 0.0;      // propagation speed, m/s
  double frequency_f = 0.0;  // Hz
  double omega0 = 0.0;       // angular frequency, rad/s
  double wavelength = 0.0;   // meters

  WaveConfig() = default;
  WaveConfig(double speed, double frequency);
};

/// Azimuth grid covering [0, 360) degrees at resolution delta_deg, plus the
/// fixed elevation the whole scan is evaluated at. Grid index i maps to
/// azimuth i * delta_deg.
struct GridSpec {
  double delta_deg = 1.0;
  Index size = 360;            // R = 360 / delta_deg
  double elevation_phi = 0.0;  // radians

  static GridSpec make(double delta_deg, double elevation_phi = 0.0);

  double angle_deg(Index i) const { return static_cast<double>(i) * delta_deg; }
  double angle_rad(Index i) const { return deg_to_rad(angle_deg(i)); }

  /// Nearest grid index for an azimuth in degrees (wraps modulo 360).
  Index index_of_deg(double angle_deg) const;
};

/// Plane-wave arrival delay at a sensor relative to the origin, in seconds.
/// Positive x/y toward the source direction means the sensor leads the
/// reference. Total function of its inputs.
double delay_seconds(double sensor_x, double sensor_y, double azimuth_rad,
                     double elevation_rad, double speed_c);

/// Steering matrix over the whole grid: M sensors by R directions, entry
/// (j, i) = exp(-i * omega0 * tau_ji). All entries have unit modulus.
struct ManifoldMatrix {
  CMatrix entries;  // M x R
  GridSpec grid;
  WaveConfig wave;
  std::uint64_t geometry_fp = 0;

  Index sensor_count() const { return entries.rows(); }
  Index grid_size() const { return entries.cols(); }
  CMatrix::ConstColXpr steering(Index i) const { return entries.col(i); }

  std::uint64_t fingerprint() const;
};

ManifoldMatrix build_manifold(const ArrayGeometry& geometry,
                              const WaveConfig& wave, const GridSpec& grid);

/// Debug dump, one row per (sensor, direction) entry.
void write_manifold_csv(const ManifoldMatrix& manifold,
                        const std::filesystem::path& path);

}  // namespace doalab
