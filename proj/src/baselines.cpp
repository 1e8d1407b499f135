#include "doalab/baselines.hpp"

#include "doalab/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace doalab {

namespace {

constexpr double kDenominatorFloor = 1e-12;

SpatialSpectrum empty_spectrum(const ManifoldMatrix& manifold, Index snapshots) {
  SpatialSpectrum out;
  out.grid = manifold.grid;
  out.snapshots_averaged = snapshots;
  out.power = RealVector::Zero(manifold.grid_size());
  return out;
}

void check_shapes(const ManifoldMatrix& manifold, const CMatrix& snapshots) {
  if (snapshots.rows() != manifold.sensor_count())
    throw ConfigError("snapshot rows do not match the manifold's sensor count");
  if (snapshots.cols() < 1) throw ConfigError("need at least one snapshot");
}

}  // namespace

CovarianceEstimate sample_covariance(const CMatrix& snapshots,
                                     double loading_eps) {
  CovarianceEstimate cov;
  cov.t_used = snapshots.cols();
  cov.loading_eps = loading_eps;
  cov.r_hat = (snapshots * snapshots.adjoint()) /
              static_cast<double>(snapshots.cols());
  // Symmetrize away the last-bit asymmetry of the product.
  cov.r_hat = 0.5 * (cov.r_hat + cov.r_hat.adjoint()).eval();
  cov.r_hat.diagonal().array() += loading_eps;
  return cov;
}

SpatialSpectrum cbf_spectrum(const ManifoldMatrix& manifold,
                             const CMatrix& snapshots) {
  check_shapes(manifold, snapshots);
  auto out = empty_spectrum(manifold, snapshots.cols());
  const double m2 = static_cast<double>(manifold.sensor_count()) *
                    static_cast<double>(manifold.sensor_count());
  const CMatrix correlations = manifold.entries.adjoint() * snapshots;  // R x T
  out.power = correlations.cwiseAbs2().rowwise().sum() /
              (static_cast<double>(snapshots.cols()) * m2);
  return out;
}

double default_mvdr_loading(const CMatrix& snapshots) {
  const double trace =
      snapshots.cwiseAbs2().sum() / static_cast<double>(snapshots.cols());
  return 1e-3 * trace / static_cast<double>(snapshots.rows());
}

SpatialSpectrum mvdr_spectrum(const ManifoldMatrix& manifold,
                              const CMatrix& snapshots,
                              std::optional<double> loading_eps) {
  check_shapes(manifold, snapshots);
  const double eps = loading_eps.value_or(default_mvdr_loading(snapshots));
  const auto cov = sample_covariance(snapshots, eps);

  if (eps == 0.0) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov.r_hat);
    const auto& values = eig.eigenvalues();
    if (values.minCoeff() <= 1e-12 * std::max(values.maxCoeff(), 0.0))
      throw SingularCovariance(
          "sample covariance is singular; supply diagonal loading");
  }

  const Eigen::LDLT<CMatrix> ldlt(cov.r_hat);
  const CMatrix solved = ldlt.solve(manifold.entries);  // M x R
  auto out = empty_spectrum(manifold, snapshots.cols());
  for (Index i = 0; i < manifold.grid_size(); ++i) {
    const double denom =
        manifold.entries.col(i).dot(solved.col(i)).real();
    out.power(i) = 1.0 / std::max(denom, kDenominatorFloor);
  }
  return out;
}

SpatialSpectrum music_spectrum(const ManifoldMatrix& manifold,
                               const CMatrix& snapshots, Index known_sources) {
  check_shapes(manifold, snapshots);
  const Index sensors = manifold.sensor_count();
  if (known_sources < 1 || known_sources >= sensors)
    throw BadSourceCount("source count for the subspace split must lie in [1, M)");

  const auto cov = sample_covariance(snapshots, 0.0);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov.r_hat);
  // Ascending eigenvalues: the first M - K columns span the noise subspace.
  const CMatrix noise_basis = eig.eigenvectors().leftCols(sensors - known_sources);

  const CMatrix projected = noise_basis.adjoint() * manifold.entries;
  auto out = empty_spectrum(manifold, snapshots.cols());
  for (Index i = 0; i < manifold.grid_size(); ++i)
    out.power(i) = 1.0 / std::max(projected.col(i).squaredNorm(), kDenominatorFloor);
  return out;
}

double default_l1_lambda(const ManifoldMatrix& manifold,
                         const CMatrix& snapshots) {
  // Deflate the strongest delay-and-sum component, then read the noise scale
  // off the residual amplitudes: Rayleigh median = sigma_component * sqrt(ln 4).
  const CMatrix correlations = manifold.entries.adjoint() * snapshots;
  Index best = 0;
  double best_score = -1.0;
  for (Index i = 0; i < correlations.rows(); ++i) {
    const double score = correlations.row(i).squaredNorm();
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  const auto& atom = manifold.entries.col(best);
  const CMatrix residual =
      snapshots -
      atom * (atom.adjoint() * snapshots) /
          static_cast<double>(manifold.sensor_count());

  std::vector<double> magnitudes;
  magnitudes.reserve(static_cast<std::size_t>(residual.size()));
  for (Index t = 0; t < residual.cols(); ++t)
    for (Index j = 0; j < residual.rows(); ++j)
      magnitudes.push_back(std::abs(residual(j, t)));
  auto mid = magnitudes.begin() +
             static_cast<std::ptrdiff_t>(magnitudes.size() / 2);
  std::nth_element(magnitudes.begin(), mid, magnitudes.end());
  const double sigma = *mid / std::sqrt(std::log(4.0)) * std::sqrt(0.5) *
                       std::sqrt(2.0);  // per-complex-entry std

  const double grid_size = static_cast<double>(manifold.grid_size());
  const double snapshots_n = static_cast<double>(snapshots.cols());
  return sigma * std::sqrt(2.0 * std::log(grid_size)) * std::sqrt(snapshots_n);
}

L1Result l1_spectrum(const ManifoldMatrix& manifold, const CMatrix& snapshots,
                     const L1Options& options) {
  check_shapes(manifold, snapshots);
  if (options.lambda && !(*options.lambda > 0.0))
    throw ConfigError("l1 lambda must be positive");

  const double lambda =
      options.lambda.value_or(default_l1_lambda(manifold, snapshots));
  const Index grid_size = manifold.grid_size();
  const Index t_count = snapshots.cols();

  auto data_term = [&](const CMatrix& s) {
    return (manifold.entries * s - snapshots).squaredNorm();
  };
  auto penalty = [&](const CMatrix& s) {
    double acc = 0.0;
    for (Index i = 0; i < s.rows(); ++i) acc += s.row(i).norm();
    return lambda * acc;
  };
  auto shrink_rows = [&](const CMatrix& s, double amount) {
    CMatrix out = s;
    for (Index i = 0; i < s.rows(); ++i) {
      const double norm = s.row(i).norm();
      if (norm <= amount)
        out.row(i).setZero();
      else
        out.row(i) *= (1.0 - amount / norm);
    }
    return out;
  };

  CMatrix current = CMatrix::Zero(grid_size, t_count);
  double current_data = data_term(current);
  double current_objective = current_data + penalty(current);

  // Lipschitz constant of the smooth part is 2 sigma_max(A)^2; the
  // backtracking loop grows the estimate whenever the majorization test fails.
  Eigen::SelfAdjointEigenSolver<CMatrix> gram(
      manifold.entries * manifold.entries.adjoint());
  double lipschitz = 2.0 * gram.eigenvalues().maxCoeff();

  L1Result result;
  result.lambda_used = lambda;
  result.objective_trace.push_back(current_objective);

  for (Index iter = 0; iter < options.max_iterations; ++iter) {
    const CMatrix residual = manifold.entries * current - snapshots;
    const CMatrix gradient = 2.0 * (manifold.entries.adjoint() * residual);

    CMatrix next;
    double next_data = 0.0;
    for (int tries = 0; tries < 60; ++tries) {
      next = shrink_rows(current - gradient / lipschitz, lambda / lipschitz);
      next_data = data_term(next);
      const CMatrix step = next - current;
      const double linear =
          gradient.conjugate().cwiseProduct(step).sum().real();
      const double quad =
          current_data + linear + 0.5 * lipschitz * step.squaredNorm();
      if (next_data <= quad + 1e-12 * std::abs(quad)) break;
      lipschitz *= 2.0;
    }

    const double next_objective = next_data + penalty(next);
    const double drop = current_objective - next_objective;
    current = std::move(next);
    current_data = next_data;
    current_objective = next_objective;
    result.objective_trace.push_back(current_objective);
    result.iterations = iter + 1;
    if (drop >= 0.0 &&
        drop <= options.tolerance * std::max(1.0, std::abs(current_objective))) {
      result.converged = true;
      break;
    }
  }

  result.spectrum = empty_spectrum(manifold, t_count);
  for (Index i = 0; i < grid_size; ++i)
    result.spectrum.power(i) =
        current.row(i).squaredNorm() / static_cast<double>(t_count);
  return result;
}

}  // namespace doalab
