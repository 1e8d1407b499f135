#include "doalab/errors.hpp"
#include "doalab/manifold.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>

using namespace doalab;

TEST_CASE("delay at the reference origin is zero for any direction") {
  for (double theta : {0.0, 0.7, 2.1, 5.9})
    CHECK(delay_seconds(0.0, 0.0, theta, 0.0, 1500.0) == 0.0);
}

TEST_CASE("delay along the x axis at broadside") {
  CHECK(delay_seconds(1500.0, 0.0, 0.0, 0.0, 1500.0) == doctest::Approx(1.0));
}

TEST_CASE("delay with a tilted elevation") {
  // (x=0, y=1500), azimuth 90 deg, elevation -45 deg, c=1500:
  // tau = y * sin(theta) * cos(phi) / c = cos(pi/4). Hand-checked value.
  const double tau =
      delay_seconds(0.0, 1500.0, kPi / 2.0, -kPi / 4.0, 1500.0);
  CHECK(tau == doctest::Approx(0.7071067811865476).epsilon(1e-12));
}

TEST_CASE("delay is exactly linear under coordinate doubling") {
  const double theta = 1.2345;
  for (double x : {13.7, -211.25, 0.125}) {
    for (double y : {-9.5, 830.0}) {
      const double one = delay_seconds(x, y, theta, 0.0, 1500.0);
      const double two = delay_seconds(2.0 * x, 2.0 * y, theta, 0.0, 1500.0);
      CHECK(two == 2.0 * one);
    }
  }
}

TEST_CASE("wave config derives omega0 and wavelength") {
  const WaveConfig wave(1500.0, 100.0);
  CHECK(std::abs(wave.omega0 - 2.0 * kPi * 100.0) <=
        1e-12 * std::abs(wave.omega0));
  CHECK(wave.wavelength == doctest::Approx(15.0));
  CHECK_THROWS_AS(WaveConfig(0.0, 100.0), ConfigError);
  CHECK_THROWS_AS(WaveConfig(1500.0, -1.0), ConfigError);
}

TEST_CASE("grid spec validates integral 360/delta") {
  const auto grid = GridSpec::make(0.1);
  CHECK(grid.size == 3600);
  CHECK(grid.angle_deg(899) == doctest::Approx(89.9));
  CHECK(grid.angle_deg(2705) == doctest::Approx(270.5));
  CHECK(grid.index_of_deg(89.9) == 899);
  CHECK(grid.index_of_deg(360.0) == 0);
  CHECK(grid.index_of_deg(-0.05) == 3599);
  CHECK_THROWS_AS(GridSpec::make(0.7), GridNotIntegral);
  CHECK_THROWS_AS(GridSpec::make(0.0), GridNotIntegral);
  CHECK_THROWS_AS(GridSpec::make(400.0), GridNotIntegral);
}

TEST_CASE("single sensor at the origin gives an all-ones manifold row") {
  ArrayGeometry g;
  g.sensors.resize(1, 2);
  g.sensors.setZero();
  g.aperture_v = 1.0;
  const auto manifold =
      build_manifold(g, WaveConfig(1500.0, 100.0), GridSpec::make(1.0));
  REQUIRE(manifold.sensor_count() == 1);
  REQUIRE(manifold.grid_size() == 360);
  for (Index i = 0; i < manifold.grid_size(); ++i) {
    CHECK(std::abs(manifold.entries(0, i) - Complex(1.0, 0.0)) < 1e-15);
  }
}

TEST_CASE("half-wavelength sensor flips phase at 180 degrees") {
  const WaveConfig wave(1500.0, 100.0);
  ArrayGeometry g;
  g.sensors.resize(2, 2);
  g.sensors << 0.0, 0.0, wave.wavelength / 2.0, 0.0;
  g.aperture_v = wave.wavelength / 2.0;
  const auto manifold = build_manifold(g, wave, GridSpec::make(1.0));
  const Index idx_180 = 180;
  // Direct oracle for the same entry.
  const double tau =
      (wave.wavelength / 2.0) * std::cos(deg_to_rad(180.0)) / wave.speed_c;
  const Complex expected = std::exp(Complex(0.0, -wave.omega0 * tau));
  CHECK(std::abs(manifold.entries(1, idx_180) - expected) < 1e-12);
  CHECK(std::abs(manifold.entries(1, idx_180) - Complex(-1.0, 0.0)) < 1e-12);
}

TEST_CASE("every manifold entry has unit modulus") {
  const auto g = generate(LayoutKind::uniform_random_2d, 8, 5000.0, 11);
  const auto manifold =
      build_manifold(g, WaveConfig(1500.0, 100.0), GridSpec::make(2.0));
  for (Index j = 0; j < manifold.sensor_count(); ++j)
    for (Index i = 0; i < manifold.grid_size(); ++i)
      CHECK(std::abs(std::abs(manifold.entries(j, i)) - 1.0) < 1e-12);
}

TEST_CASE("manifold respects the fixed elevation") {
  const auto g = generate(LayoutKind::uniform_random_2d, 4, 2000.0, 2);
  const WaveConfig wave(1500.0, 100.0);
  const auto flat = build_manifold(g, wave, GridSpec::make(10.0, 0.0));
  const auto tilted = build_manifold(g, wave, GridSpec::make(10.0, -kPi / 4.0));
  // cos(phi) shrinks every delay, so the two manifolds must differ.
  CHECK((flat.entries - tilted.entries).cwiseAbs().maxCoeff() > 1e-6);
  for (Index j = 0; j < g.size(); ++j) {
    const double full = delay_seconds(g.x(j), g.y(j), 0.3, 0.0, wave.speed_c);
    const double tilt = delay_seconds(g.x(j), g.y(j), 0.3, -kPi / 4.0, wave.speed_c);
    CHECK(tilt == doctest::Approx(full * std::cos(kPi / 4.0)));
  }
}

TEST_CASE("manifold fingerprint tracks geometry and grid") {
  const auto g1 = generate(LayoutKind::uniform_random_2d, 6, 900.0, 1);
  const auto g2 = generate(LayoutKind::uniform_random_2d, 6, 900.0, 2);
  const WaveConfig wave(1500.0, 100.0);
  const auto m1 = build_manifold(g1, wave, GridSpec::make(5.0));
  const auto m1b = build_manifold(g1, wave, GridSpec::make(5.0));
  const auto m2 = build_manifold(g2, wave, GridSpec::make(5.0));
  const auto m3 = build_manifold(g1, wave, GridSpec::make(10.0));
  CHECK(m1.fingerprint() == m1b.fingerprint());
  CHECK(m1.fingerprint() != m2.fingerprint());
  CHECK(m1.fingerprint() != m3.fingerprint());
}
