#pragma once

#include "doalab/manifold.hpp"
#include "doalab/ssfns.hpp"
#include "doalab/types.hpp"

#include <optional>

namespace doalab {

struct CovarianceEstimate {
  CMatrix r_hat;  // M x M Hermitian, X X^H / T plus diagonal loading
  Index t_used = 0;
  double loading_eps = 0.0;
};

CovarianceEstimate sample_covariance(const CMatrix& snapshots,
                                     double loading_eps);

/// Delay-and-sum power: mean_t |a_i^H x_t|^2 / M^2.
SpatialSpectrum cbf_spectrum(const ManifoldMatrix& manifold,
                             const CMatrix& snapshots);

/// Returns the diagonal loading applied when none is given:
/// 1e-3 * trace(R_hat) / M.
double default_mvdr_loading(const CMatrix& snapshots);

/// Capon power 1 / (a_i^H (R_hat + eps I)^-1 a_i). Passing eps = 0 requires
/// an invertible sample covariance and throws SingularCovariance otherwise;
/// omitting eps applies the default loading.
SpatialSpectrum mvdr_spectrum(const ManifoldMatrix& manifold,
                              const CMatrix& snapshots,
                              std::optional<double> loading_eps = std::nullopt);

/// Subspace pseudospectrum 1 / max(||E_n^H a_i||^2, 1e-12) with the noise
/// subspace spanned by the M - k smallest covariance eigenvectors.
SpatialSpectrum music_spectrum(const ManifoldMatrix& manifold,
                               const CMatrix& snapshots, Index known_sources);

struct L1Options {
  std::optional<double> lambda;  // unset: noise-scaled default, see below
  Index max_iterations = 500;
  double tolerance = 1e-8;
};

struct L1Result {
  SpatialSpectrum spectrum;
  double lambda_used = 0.0;
  bool converged = false;
  Index iterations = 0;
  std::vector<double> objective_trace;  // one entry per accepted step
};

/// Noise-scaled regularizer sigma_hat * sqrt(2 log R) * sqrt(T), with
/// sigma_hat estimated from the residual after removing the strongest
/// delay-and-sum component.
double default_l1_lambda(const ManifoldMatrix& manifold,
                         const CMatrix& snapshots);

/// Row-sparse recovery of S from A~ S ~= X by proximal gradient descent on
/// ||A~ S - X||_F^2 + lambda * sum_i ||S_i,:||_2 with backtracking line
/// search. The spectrum is the per-row mean power of the recovered S.
L1Result l1_spectrum(const ManifoldMatrix& manifold, const CMatrix& snapshots,
                     const L1Options& options = {});

}  // namespace doalab
