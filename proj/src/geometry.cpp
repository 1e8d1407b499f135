#include "doalab/geometry.hpp"

#include "doalab/errors.hpp"
#include "doalab/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

namespace doalab {

namespace {

using Coordinates = Eigen::Matrix<double, Eigen::Dynamic, 2>;

Coordinates unit_uniform_box(Index count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  Coordinates xy(count, 2);
  for (Index j = 0; j < count; ++j) {
    xy(j, 0) = uni(rng);
    xy(j, 1) = uni(rng);
  }
  return xy;
}

Coordinates unit_normal(Index count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0 / 6.0);
  Coordinates xy(count, 2);
  for (Index j = 0; j < count; ++j) {
    xy(j, 0) = gauss(rng);
    xy(j, 1) = gauss(rng);
  }
  return xy;
}

Coordinates circle(Index count, double radius) {
  Coordinates xy(count, 2);
  for (Index j = 0; j < count; ++j) {
    const double angle = 2.0 * kPi * static_cast<double>(j) /
                         static_cast<double>(count);
    xy(j, 0) = radius * std::cos(angle);
    xy(j, 1) = radius * std::sin(angle);
  }
  return xy;
}

}  // namespace

std::string to_string(LayoutKind kind) {
  switch (kind) {
    case LayoutKind::uniform_random_2d: return "uniform_random_2d";
    case LayoutKind::normal_random_2d: return "normal_random_2d";
    case LayoutKind::uniform_circle: return "uniform_circle";
    case LayoutKind::concentric_circles: return "concentric_circles";
    case LayoutKind::spiral: return "spiral";
    case LayoutKind::uniform_linear: return "uniform_linear";
    case LayoutKind::external: return "external";
  }
  return "unknown";
}

LayoutKind layout_from_string(const std::string& name) {
  for (auto kind : {LayoutKind::uniform_random_2d, LayoutKind::normal_random_2d,
                    LayoutKind::uniform_circle, LayoutKind::concentric_circles,
                    LayoutKind::spiral, LayoutKind::uniform_linear,
                    LayoutKind::external}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown layout kind: " + name);
}

std::uint64_t ArrayGeometry::fingerprint() const {
  std::uint64_t h = fnv1a(aperture_v);
  h = fnv1a(static_cast<double>(layout), h);
  for (Index j = 0; j < size(); ++j) {
    h = fnv1a(sensors(j, 0), h);
    h = fnv1a(sensors(j, 1), h);
  }
  return h;
}

ArrayGeometry generate(LayoutKind kind, Index sensor_count, double aperture_v,
                       std::uint64_t seed, double spiral_tightness) {
  if (sensor_count < 1)
    throw InvalidLayoutParams("sensor count must be at least 1");
  if (!(aperture_v > 0.0))
    throw InvalidLayoutParams("aperture must be positive");
  if ((kind == LayoutKind::concentric_circles || kind == LayoutKind::spiral) &&
      sensor_count % 8 != 0)
    throw InvalidLayoutParams(to_string(kind) +
                              " layout needs a sensor count divisible by 8");
  if (kind == LayoutKind::external)
    throw InvalidLayoutParams("external layouts come from CSV files");

  ArrayGeometry g;
  g.layout = kind;
  g.aperture_v = aperture_v;
  g.seed = seed;

  switch (kind) {
    case LayoutKind::uniform_random_2d:
      g.sensors = unit_uniform_box(sensor_count, seed) * aperture_v;
      break;
    case LayoutKind::normal_random_2d:
      g.sensors = unit_normal(sensor_count, seed) * aperture_v;
      break;
    case LayoutKind::uniform_circle:
      g.sensors = circle(sensor_count, aperture_v / 2.0);
      break;
    case LayoutKind::concentric_circles: {
      const Index rings = sensor_count / 8;
      const double step = 4.0 * aperture_v / static_cast<double>(sensor_count);
      g.sensors.resize(sensor_count, 2);
      for (Index ring = 0; ring < rings; ++ring) {
        const double radius = step * static_cast<double>(ring + 1);
        g.sensors.middleRows(ring * 8, 8) = circle(8, radius);
      }
      break;
    }
    case LayoutKind::spiral: {
      const Index per_arm = sensor_count / 8;
      const double rim = aperture_v / 2.0;
      g.sensors.resize(sensor_count, 2);
      for (Index arm = 0; arm < 8; ++arm) {
        for (Index p = 0; p < per_arm; ++p) {
          const double radius =
              rim * static_cast<double>(p + 1) / static_cast<double>(per_arm);
          const double angle = 2.0 * kPi * static_cast<double>(arm) / 8.0 +
                               spiral_tightness * radius;
          const Index j = arm * per_arm + p;
          g.sensors(j, 0) = radius * std::cos(angle);
          g.sensors(j, 1) = radius * std::sin(angle);
        }
      }
      break;
    }
    case LayoutKind::uniform_linear: {
      g.sensors.resize(sensor_count, 2);
      g.sensors.col(0).setZero();
      if (sensor_count == 1) {
        g.sensors(0, 1) = 0.0;
      } else {
        const double spacing =
            aperture_v / static_cast<double>(sensor_count - 1);
        for (Index j = 0; j < sensor_count; ++j)
          g.sensors(j, 1) = -aperture_v / 2.0 + spacing * static_cast<double>(j);
      }
      break;
    }
    case LayoutKind::external:
      break;  // unreachable
  }
  return g;
}

ArrayGeometry load_geometry_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open geometry file: " + path.string());

  std::vector<std::array<double, 2>> coords;
  std::set<long long> ids;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first && line == "id,x_m,y_m") {
      first = false;
      continue;
    }
    first = false;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw ParseError("geometry rows need 3 fields, got " +
                       std::to_string(fields.size()) + " in " + path.string());
    const auto id =
        static_cast<long long>(parse_double_field(fields[0], path.string()));
    if (!ids.insert(id).second)
      throw DuplicateSensorId("duplicate sensor id " + std::to_string(id) +
                              " in " + path.string());
    coords.push_back({parse_double_field(fields[1], path.string()),
                      parse_double_field(fields[2], path.string())});
  }
  if (coords.empty())
    throw ParseError("geometry file has no sensor rows: " + path.string());

  ArrayGeometry g;
  g.layout = LayoutKind::external;
  g.sensors.resize(static_cast<Index>(coords.size()), 2);
  for (Index j = 0; j < g.size(); ++j) {
    g.sensors(j, 0) = coords[static_cast<std::size_t>(j)][0];
    g.sensors(j, 1) = coords[static_cast<std::size_t>(j)][1];
    if (!std::isfinite(g.sensors(j, 0)) || !std::isfinite(g.sensors(j, 1)))
      throw ParseError("non-finite coordinate in " + path.string());
  }
  double extent = 0.0;
  for (Index a = 0; a < g.size(); ++a)
    for (Index b = a + 1; b < g.size(); ++b)
      extent = std::max(extent, std::hypot(g.sensors(a, 0) - g.sensors(b, 0),
                                           g.sensors(a, 1) - g.sensors(b, 1)));
  g.aperture_v = extent;
  return g;
}

void write_geometry_csv(const ArrayGeometry& geometry,
                        const std::filesystem::path& path) {
  std::string body = "id,x_m,y_m\n";
  for (Index j = 0; j < geometry.size(); ++j) {
    body += std::to_string(j);
    body += ',';
    body += format_double(geometry.x(j));
    body += ',';
    body += format_double(geometry.y(j));
    body += '\n';
  }
  write_text_file(path, body);
}

}  // namespace doalab
