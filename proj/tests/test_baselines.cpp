#include "doalab/baselines.hpp"
#include "doalab/errors.hpp"
#include "doalab/scenesim.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

using namespace doalab;

namespace {

ManifoldMatrix make_manifold(Index sensors, double delta_deg = 1.0,
                             std::uint64_t seed = 71) {
  const auto g = generate(LayoutKind::uniform_random_2d, sensors, 8000.0, seed);
  return build_manifold(g, WaveConfig(1500.0, 100.0), GridSpec::make(delta_deg));
}

IndexList top_indices(const RealVector& power, Index count) {
  IndexList order(static_cast<std::size_t>(power.size()));
  for (Index i = 0; i < power.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::partial_sort(order.begin(), order.begin() + count, order.end(),
                    [&](Index a, Index b) { return power(a) > power(b); });
  order.resize(static_cast<std::size_t>(count));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

TEST_CASE("sample covariance is Hermitian and PSD after loading") {
  const CMatrix x = oracles::random_cgaussian(6, 12, 5);
  const auto cov = sample_covariance(x, 1e-6);
  CHECK((cov.r_hat - cov.r_hat.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov.r_hat);
  CHECK(eig.eigenvalues().minCoeff() >= 0.0);
  CHECK(cov.t_used == 12);
}

TEST_CASE("cbf peaks exactly on a pure steering snapshot") {
  const auto manifold = make_manifold(8);
  const Index truth = 123;
  const CMatrix x = manifold.entries.col(truth);
  const auto spec = cbf_spectrum(manifold, x);
  Index best = 0;
  for (Index i = 1; i < spec.power.size(); ++i)
    if (spec.power(i) > spec.power(best)) best = i;
  CHECK(best == truth);
  CHECK(spec.power(truth) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cbf with a single sensor is flat at |x|^2") {
  const auto manifold = make_manifold(1);
  const CMatrix x = oracles::random_cgaussian(1, 3, 6);
  const auto spec = cbf_spectrum(manifold, x);
  double expected = 0.0;
  for (Index t = 0; t < 3; ++t) expected += std::norm(x(0, t));
  expected /= 3.0;
  for (Index i = 0; i < spec.power.size(); ++i)
    CHECK(spec.power(i) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("cbf coincides with the preliminary-filter spectrum") {
  const auto manifold = make_manifold(16);
  const auto scene =
      simulate_scene(manifold, draw_source_indices(360, 3, 8), 4, 10.0, false, 8);
  const auto cbf = cbf_spectrum(manifold, scene.X);
  const auto prelim = spectrum(preliminary_filter(manifold), scene.X);
  for (Index i = 0; i < cbf.power.size(); ++i)
    CHECK(cbf.power(i) ==
          doctest::Approx(prelim.power(i)).epsilon(1e-12));
}

TEST_CASE("mvdr is flat on pure white noise") {
  const auto manifold = make_manifold(8, 5.0);
  const CMatrix x = oracles::random_cgaussian(8, 10000, 7);
  const auto spec = mvdr_spectrum(manifold, x);
  const double mean = spec.power.mean();
  for (Index i = 0; i < spec.power.size(); ++i) {
    CHECK(spec.power(i) > 0.9 * mean);
    CHECK(spec.power(i) < 1.1 * mean);
  }
}

TEST_CASE("mvdr with zero loading rejects a rank-deficient covariance") {
  const auto manifold = make_manifold(8);
  const CMatrix x = oracles::random_cgaussian(8, 1, 9);
  CHECK_THROWS_AS(mvdr_spectrum(manifold, x, 0.0), SingularCovariance);
  CHECK_NOTHROW(mvdr_spectrum(manifold, x));  // default loading makes it work
}

TEST_CASE("default mvdr loading is 1e-3 trace over M") {
  const CMatrix x = oracles::random_cgaussian(8, 32, 10);
  const CMatrix r_hat = (x * x.adjoint()) / 32.0;
  const double expected = 1e-3 * r_hat.trace().real() / 8.0;
  CHECK(default_mvdr_loading(x) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("music finds incoherent sources noise-free") {
  const auto manifold = make_manifold(8);
  const IndexList truth{60, 250};
  const double inf = std::numeric_limits<double>::infinity();
  const auto scene = simulate_scene(manifold, truth, 4, inf, false, 11);
  const auto spec = music_spectrum(manifold, scene.X, 2);
  CHECK(top_indices(spec.power, 2) == truth);
  // orthogonality makes the true-direction denominators collapse to the floor
  CHECK(spec.power(60) > 1e8);
}

TEST_CASE("coherent scenes collapse the covariance to rank one") {
  const auto manifold = make_manifold(8);
  const IndexList truth{60, 250};
  const double inf = std::numeric_limits<double>::infinity();
  const auto scene = simulate_scene(manifold, truth, 64, inf, true, 12);
  const CMatrix r_hat = (scene.X * scene.X.adjoint()) / 64.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(r_hat);
  const auto& values = eig.eigenvalues();  // ascending
  CHECK(values(values.size() - 2) < 1e-6 * values(values.size() - 1));
}

TEST_CASE("music validates the source count") {
  const auto manifold = make_manifold(4);
  const CMatrix x = oracles::random_cgaussian(4, 8, 13);
  CHECK_THROWS_AS(music_spectrum(manifold, x, 4), BadSourceCount);
  CHECK_THROWS_AS(music_spectrum(manifold, x, 0), BadSourceCount);
  CHECK_NOTHROW(music_spectrum(manifold, x, 3));
}

TEST_CASE("l1 with a huge lambda shrinks everything to zero") {
  const auto manifold = make_manifold(8);
  const auto scene =
      simulate_scene(manifold, draw_source_indices(360, 2, 14), 1, 10.0, false, 14);
  L1Options options;
  options.lambda = 1e9;
  const auto result = l1_spectrum(manifold, scene.X, options);
  CHECK(result.spectrum.power.maxCoeff() == 0.0);
}

TEST_CASE("l1 noise-free single source matches the matching oracle") {
  const auto manifold = make_manifold(8);
  const double inf = std::numeric_limits<double>::infinity();
  const IndexList truth{211};
  const auto scene = simulate_scene(manifold, truth, 1, inf, false, 15);
  L1Options options;
  options.lambda = 0.05;
  options.max_iterations = 2000;
  const auto result = l1_spectrum(manifold, scene.X, options);
  Index best = 0;
  for (Index i = 1; i < result.spectrum.power.size(); ++i)
    if (result.spectrum.power(i) > result.spectrum.power(best)) best = i;
  CHECK(best == 211);
  CHECK(best == oracles::matched_atom_oracle(manifold.entries, scene.X));
}

TEST_CASE("l1 objective never increases") {
  const auto manifold = make_manifold(8);
  const auto scene =
      simulate_scene(manifold, draw_source_indices(360, 3, 16), 2, 0.0, false, 16);
  L1Options options;
  options.max_iterations = 200;
  const auto result = l1_spectrum(manifold, scene.X, options);
  REQUIRE(result.objective_trace.size() > 1);
  for (std::size_t k = 1; k < result.objective_trace.size(); ++k)
    CHECK(result.objective_trace[k] <=
          result.objective_trace[k - 1] + 1e-12);
}

TEST_CASE("l1 flags non-convergence but still returns its best iterate") {
  const auto manifold = make_manifold(8);
  const auto scene =
      simulate_scene(manifold, draw_source_indices(360, 2, 17), 1, 0.0, false, 17);
  L1Options options;
  options.max_iterations = 1;
  options.tolerance = 0.0;
  const auto result = l1_spectrum(manifold, scene.X, options);
  CHECK_FALSE(result.converged);
  CHECK(result.spectrum.power.size() == 360);
}

TEST_CASE("baseline spectra are nonnegative and deterministic") {
  const auto manifold = make_manifold(8);
  const auto scene =
      simulate_scene(manifold, draw_source_indices(360, 2, 18), 8, 5.0, false, 18);
  const auto cbf1 = cbf_spectrum(manifold, scene.X);
  const auto cbf2 = cbf_spectrum(manifold, scene.X);
  CHECK((cbf1.power - cbf2.power).cwiseAbs().maxCoeff() == 0.0);
  const auto mvdr = mvdr_spectrum(manifold, scene.X);
  const auto music = music_spectrum(manifold, scene.X, 2);
  for (Index i = 0; i < 360; ++i) {
    CHECK(cbf1.power(i) >= 0.0);
    CHECK(mvdr.power(i) >= 0.0);
    CHECK(music.power(i) >= 0.0);
  }
}
