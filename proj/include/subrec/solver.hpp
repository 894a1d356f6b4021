#pragma once

#include <optional>
#include <vector>

#include "subrec/numerics.hpp"

namespace subrec {

// Symmetric trace-1 estimate; the scaled robust inverse covariance. PSD is a
// property of converged solver output, not enforced on construction (interim
// and probe matrices may be indefinite).
class ScaledQ {
 public:
  explicit ScaledQ(Matrix q);  // validates symmetry and unit trace

  const Matrix& matrix() const { return q_; }
  Eigen::Index dim() const { return q_.rows(); }

 private:
  Matrix q_;
};

struct IrlsConfig {
  double delta = 1e-20;
  int max_iter = 100;
  int check_every = 4;
  std::optional<double> ridge_lambda;  // adds lambda * ||Q||_F^2 to the objective
  std::optional<Matrix> q0;            // initial iterate; defaults to I/D
};

enum class StopReason { objective_increase, max_iter, step_tolerance };

struct SolveReport {
  ScaledQ q_hat;
  int iterations = 0;
  std::vector<double> objective_trace;  // regularized objective at recorded checkpoints
  bool converged = false;
  double fixed_point_residual = 0.0;
  StopReason stop_reason = StopReason::max_iter;
  bool degenerate = false;  // restricted solve met identically-zero data
};

// F(Q) = sum_i ||Q x_i||.
double objective(const ScaledQ& q, const PointSet& x);

// Huberized objective: ||Q x_i|| when >= delta, else the quadratic branch
// ||Q x_i||^2/(2 delta) + delta/2. Satisfies 0 <= F - F_delta <= N*delta/2.
double objective_regularized(const ScaledQ& q, const PointSet& x, double delta);

// One reweighting step: A = sum_i x_i x_i^T / max(||Q x_i||, delta) (+ 2*lambda*I
// when ridge is set); returns A^{-1}/tr(A^{-1}). Raises RankDeficiencyError,
// pointing the caller at lossless dimension reduction, when A is singular.
ScaledQ irls_step(const ScaledQ& q, const PointSet& x, double delta,
                  std::optional<double> ridge_lambda = std::nullopt);

// Iteratively reweighted minimization of the regularized objective. Stops on
// a checkpoint objective increase, on step norm below 1e-15, or at max_iter;
// returns the recorded iterate with smallest regularized objective.
SolveReport minimize(const PointSet& x, const IrlsConfig& cfg = {});

// Minimizes over trace-1 symmetric Q with Q * P_annihilate = 0 by solving in
// the orthogonal-complement coordinates and embedding the result back, so the
// constraint holds by construction. All-zero complement coordinates yield a
// feasible Q with objective 0 and the degenerate flag set.
SolveReport minimize_restricted(const PointSet& x, const Subspace& annihilate,
                                const IrlsConfig& cfg = {});

// Scale-free distance of G = sum_i (Q x_i x_i^T + x_i x_i^T Q)/(2 max(||Q x_i||, delta))
// from a scalar matrix: ||G - (tr(G)/D) I||_F / ||G||_F. Near zero at the minimizer.
double fixed_point_residual(const ScaledQ& q, const PointSet& x, double delta);

// Upper bound r(delta) on the linear convergence rate at the minimizer q_star:
// the square root of the largest generalized Rayleigh quotient of two
// quadratic forms over the trace-zero symmetric matrices. Dense formulation;
// raises CapabilityError for D > 30.
double convergence_rate_bound(const ScaledQ& q_star, const PointSet& x, double delta);

}  // namespace subrec
