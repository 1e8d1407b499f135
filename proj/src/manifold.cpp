#include "doalab/manifold.hpp"

#include "doalab/errors.hpp"
#include "doalab/io.hpp"

#include <cmath>

namespace doalab {

WaveConfig::WaveConfig(double speed, double frequency)
    : speed_c(speed), frequency_f(frequency) {
  if (!(speed > 0.0)) throw ConfigError("propagation speed must be positive");
  if (!(frequency > 0.0)) throw ConfigError("frequency must be positive");
  omega0 = 2.0 * kPi * frequency;
  wavelength = speed / frequency;
}

GridSpec GridSpec::make(double delta_deg, double elevation_phi) {
  if (!(delta_deg > 0.0) || delta_deg > 360.0)
    throw GridNotIntegral("grid resolution must lie in (0, 360]");
  const double count = 360.0 / delta_deg;
  const double rounded = std::round(count);
  if (std::abs(count - rounded) > 1e-9 * count)
    throw GridNotIntegral("360 is not an integer multiple of delta = " +
                          std::to_string(delta_deg));
  GridSpec grid;
  grid.delta_deg = delta_deg;
  grid.size = static_cast<Index>(rounded);
  grid.elevation_phi = elevation_phi;
  return grid;
}

Index GridSpec::index_of_deg(double angle) const {
  double wrapped = std::fmod(angle, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  const Index i = static_cast<Index>(std::llround(wrapped / delta_deg));
  return i % size;
}

double delay_seconds(double sensor_x, double sensor_y, double azimuth_rad,
                     double elevation_rad, double speed_c) {
  const double cos_phi = std::cos(elevation_rad);
  return (sensor_x * std::cos(azimuth_rad) * cos_phi +
          sensor_y * std::sin(azimuth_rad) * cos_phi) /
         speed_c;
}

std::uint64_t ManifoldMatrix::fingerprint() const {
  std::uint64_t h = geometry_fp;
  h = fnv1a(grid.delta_deg, h);
  h = fnv1a(grid.elevation_phi, h);
  h = fnv1a(wave.speed_c, h);
  h = fnv1a(wave.frequency_f, h);
  return h;
}

ManifoldMatrix build_manifold(const ArrayGeometry& geometry,
                              const WaveConfig& wave, const GridSpec& grid) {
  if (geometry.size() < 1) throw ConfigError("geometry has no sensors");

  ManifoldMatrix manifold;
  manifold.grid = grid;
  manifold.wave = wave;
  manifold.geometry_fp = geometry.fingerprint();
  manifold.entries.resize(geometry.size(), grid.size);

  for (Index i = 0; i < grid.size; ++i) {
    const double azimuth = grid.angle_rad(i);
    for (Index j = 0; j < geometry.size(); ++j) {
      const double tau = delay_seconds(geometry.x(j), geometry.y(j), azimuth,
                                       grid.elevation_phi, wave.speed_c);
      manifold.entries(j, i) = std::polar(1.0, -wave.omega0 * tau);
    }
  }
  return manifold;
}

void write_manifold_csv(const ManifoldMatrix& manifold,
                        const std::filesystem::path& path) {
  std::string body = "sensor,dir_index,re,im\n";
  for (Index j = 0; j < manifold.sensor_count(); ++j) {
    for (Index i = 0; i < manifold.grid_size(); ++i) {
      body += std::to_string(j);
      body += ',';
      body += std::to_string(i);
      body += ',';
      body += format_double(manifold.entries(j, i).real());
      body += ',';
      body += format_double(manifold.entries(j, i).imag());
      body += '\n';
    }
  }
  write_text_file(path, body);
}

}  // namespace doalab
