#pragma once

#include "doalab/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace doalab {

enum class LayoutKind {
  uniform_random_2d,
  normal_random_2d,
  uniform_circle,
  concentric_circles,
  spiral,
  uniform_linear,
  external,
};

std::string to_string(LayoutKind kind);
LayoutKind layout_from_string(const std::string& name);

/// Planar sensor array. Coordinates are meters relative to the phase
/// reference at the origin; immutable after construction.
struct ArrayGeometry {
  Eigen::Matrix<double, Eigen::Dynamic, 2> sensors;  // column 0 = x, column 1 = y
  double aperture_v = 0.0;                           // meters
  LayoutKind layout = LayoutKind::external;
  std::uint64_t seed = 0;

  Index size() const { return sensors.rows(); }
  double x(Index j) const { return sensors(j, 0); }
  double y(Index j) const { return sensors(j, 1); }

  std::uint64_t fingerprint() const;
};

/// Build one of the supported layouts. Random layouts draw in a unit-scale
/// box (or unit-scale normal) and then multiply by the aperture, so the same
/// seed produces geometrically similar arrays across aperture sweeps.
/// `spiral_tightness` is the radians-per-meter winding rate of the spiral
/// layout and is ignored by the others.
ArrayGeometry generate(LayoutKind kind, Index sensor_count, double aperture_v,
                       std::uint64_t seed, double spiral_tightness = 0.5);

/// Read a `id,x_m,y_m` CSV (header optional). The aperture is set to the
/// largest pairwise sensor distance.
ArrayGeometry load_geometry_csv(const std::filesystem::path& path);

void write_geometry_csv(const ArrayGeometry& geometry,
                        const std::filesystem::path& path);

}  // namespace doalab
