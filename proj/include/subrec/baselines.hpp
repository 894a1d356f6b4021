#pragma once

#include "subrec/solver.hpp"

namespace subrec {

struct MEstimatorConfig {
  double weight_cap = 1e30;
  int max_iter = 200;
  double step_tol = 1e-10;
};

// Span of the top d right singular vectors of the raw (uncentered) data
// matrix; the data model is centered at the origin.
Subspace pca_subspace(const PointSet& x, Eigen::Index d);

// Closed-form least-squares relaxation minimizer
// (X^T X)^{-1} / tr((X^T X)^{-1}); requires full-rank X.
ScaledQ l2_minimizer(const PointSet& x);

struct MEstimate {
  Matrix covariance;   // symmetric positive definite scatter estimate
  SolveReport report;  // q_hat holds covariance scaled to unit trace
};

// Classical re-descending M-estimator of scatter:
// A <- (1/N) sum_i u(x_i^T A^{-1} x_i) x_i x_i^T with
// u(t) = 2 * min(max(ln(t)/t, 0), weight_cap), iterated to step_tol. Raises
// DivergenceError when the iterate's condition number exceeds 1e14.
MEstimate common_m_estimator(const PointSet& x, const MEstimatorConfig& cfg = {});

struct SpherizeResult {
  PointSet points;
  Eigen::Index dropped = 0;  // zero-norm rows removed
};

// Scales every nonzero row to the unit sphere; zero rows are dropped and
// counted rather than treated as fatal.
SpherizeResult spherize(const PointSet& x);

}  // namespace subrec
