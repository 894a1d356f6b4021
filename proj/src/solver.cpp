#include "subrec/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <string>

#include "subrec/errors.hpp"

namespace subrec {

namespace {

constexpr double kStepTol = 1e-15;

void check_points(const ScaledQ& q, const PointSet& x, const char* who) {
  if (x.cols() != q.dim())
    throw DimensionError(std::string(who) + ": points are " +
                         std::to_string(x.cols()) + "-dimensional but Q is " +
                         std::to_string(q.dim()) + "x" + std::to_string(q.dim()));
}

Vector image_norms(const ScaledQ& q, const PointSet& x) {
  return (x * q.matrix()).rowwise().norm();  // Q symmetric, so row i is (Q x_i)^T
}

// Inverse of the weighted second-moment matrix. Near convergence the operand
// is legitimately ill-conditioned (kernel directions carry huge weights), so
// a hard condition gate would abort healthy runs; an LU fallback mirrors the
// plain-inverse behavior the objective checkpointing is designed to absorb.
Matrix moment_inverse(const Matrix& a, const PointSet& x, bool ridged) {
  const Eigen::Index D = a.rows();
  Eigen::LDLT<Matrix> ldlt(a);
  const Vector piv = ldlt.vectorD();
  if (ldlt.info() == Eigen::Success && piv.minCoeff() > 0.0 &&
      std::isfinite(piv.maxCoeff())) {
    Matrix inv = ldlt.solve(Matrix::Identity(D, D));
    if (inv.allFinite()) return inv;
  }

  if (!ridged) {
    const Eigen::Index r = numerical_rank(x);
    if (r < D)
      throw RankDeficiencyError(
          "irls_step: data spans only " + std::to_string(r) + " of " +
              std::to_string(D) +
              " dimensions; apply lossless dimension reduction (or ridge "
              "regularization) before solving",
          r);
  }
  Matrix inv = a.partialPivLu().solve(Matrix::Identity(D, D));
  if (!inv.allFinite()) {
    const double cond = std::abs(piv.maxCoeff()) /
                        std::max(std::abs(piv.minCoeff()),
                                 std::numeric_limits<double>::min());
    throw SingularityError(
        "irls_step: weighted moment matrix not invertible (condition estimate " +
            std::to_string(cond) + ")",
        cond);
  }
  return inv;
}

double checked_objective(const ScaledQ& q, const PointSet& x,
                         const IrlsConfig& cfg) {
  // With ridge active the quantity the iteration decreases is the penalized
  // objective, so that is what checkpoints record and compare.
  double f = objective_regularized(q, x, cfg.delta);
  if (cfg.ridge_lambda) f += *cfg.ridge_lambda * q.matrix().squaredNorm();
  return f;
}

double report_residual(const ScaledQ& q, const PointSet& x,
                       const IrlsConfig& cfg) {
  // Ridge solves satisfy a shifted stationarity condition; fold the penalty
  // gradient in so the reported residual is meaningful for them too.
  const Vector norms = image_norms(q, x).cwiseMax(cfg.delta);
  const Matrix z = (x * q.matrix()).array().colwise() / norms.array();
  Matrix g = x.transpose() * z;
  g = 0.5 * (g + g.transpose()).eval();
  if (cfg.ridge_lambda) g += 2.0 * *cfg.ridge_lambda * q.matrix();
  const double gn = g.norm();
  if (gn == 0.0) return 0.0;
  const Eigen::Index D = q.dim();
  return (g - (g.trace() / static_cast<double>(D)) *
                  Matrix::Identity(D, D)).norm() / gn;
}

void validate_config(const IrlsConfig& cfg) {
  if (!(cfg.delta > 0.0))
    throw ConfigError("irls: delta must be positive");
  if (cfg.max_iter < 1) throw ConfigError("irls: max_iter must be >= 1");
  if (cfg.check_every < 1) throw ConfigError("irls: check_every must be >= 1");
  if (cfg.ridge_lambda && *cfg.ridge_lambda < 0.0)
    throw ConfigError("irls: ridge_lambda must be nonnegative");
}

}  // namespace

ScaledQ::ScaledQ(Matrix q) : q_(std::move(q)) {
  if (q_.rows() != q_.cols() || q_.rows() == 0)
    throw DimensionError("ScaledQ: matrix must be square and nonempty");
  const double scale = std::max(1.0, q_.cwiseAbs().maxCoeff());
  if ((q_ - q_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw SymmetryError("ScaledQ: matrix is not symmetric");
  if (std::abs(q_.trace() - 1.0) > 1e-10)
    throw DomainError("ScaledQ: trace is " + std::to_string(q_.trace()) +
                      ", expected 1");
}

double objective(const ScaledQ& q, const PointSet& x) {
  check_points(q, x, "objective");
  return image_norms(q, x).sum();
}

double objective_regularized(const ScaledQ& q, const PointSet& x, double delta) {
  check_points(q, x, "objective_regularized");
  if (!(delta > 0.0))
    throw ConfigError("objective_regularized: delta must be positive");
  const Vector norms = image_norms(q, x);
  double f = 0.0;
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    const double n = norms(i);
    f += (n >= delta) ? n : n * n / (2.0 * delta) + delta / 2.0;
  }
  return f;
}

ScaledQ irls_step(const ScaledQ& q, const PointSet& x, double delta,
                  std::optional<double> ridge_lambda) {
  check_points(q, x, "irls_step");
  if (!(delta > 0.0)) throw ConfigError("irls_step: delta must be positive");
  const Eigen::Index D = q.dim();

  const Vector w = image_norms(q, x).cwiseMax(delta).cwiseInverse();
  Matrix a = x.transpose() * (x.array().colwise() * w.array()).matrix();
  a = 0.5 * (a + a.transpose()).eval();
  if (ridge_lambda) a += 2.0 * *ridge_lambda * Matrix::Identity(D, D);

  Matrix inv = moment_inverse(a, x, ridge_lambda.has_value());
  inv = 0.5 * (inv + inv.transpose()).eval();
  const double tr = inv.trace();
  if (!(tr > 0.0) || !std::isfinite(tr))
    throw SingularityError("irls_step: inverse has nonpositive trace", 0.0);
  return ScaledQ(inv / tr);
}

SolveReport minimize(const PointSet& x, const IrlsConfig& cfg) {
  validate_config(cfg);
  if (x.rows() == 0 || x.cols() == 0)
    throw DimensionError("minimize: empty point set");
  const Eigen::Index D = x.cols();
  if (!cfg.ridge_lambda) {
    const Eigen::Index r = numerical_rank(x);
    if (r < D)
      throw RankDeficiencyError(
          "minimize: data spans only " + std::to_string(r) + " of " +
              std::to_string(D) +
              " dimensions; apply lossless dimension reduction (or ridge "
              "regularization) first",
          r);
  }

  ScaledQ cur = cfg.q0 ? ScaledQ(*cfg.q0)
                       : ScaledQ(Matrix::Identity(D, D) / static_cast<double>(D));
  if (cur.dim() != D)
    throw DimensionError("minimize: q0 dimension does not match the data");

  double f_cur = checked_objective(cur, x, cfg);
  ScaledQ best = cur;
  double f_best = f_cur;
  std::vector<double> trace{f_cur};
  double f_prev_checkpoint = f_cur;

  int iterations = 0;
  bool converged = false;
  StopReason reason = StopReason::max_iter;

  double f_last = f_cur;
  for (int k = 0; k < cfg.max_iter; ++k) {
    ScaledQ next = cur;
    try {
      next = irls_step(cur, x, cfg.delta, cfg.ridge_lambda);
    } catch (const SingularityError&) {
      // The weighted moment matrix became numerically singular, which happens
      // right at the rounding floor of a collapsing kernel. The best iterate
      // is already in hand; stop rather than surface a spurious failure.
      iterations = k + 1;
      reason = StopReason::objective_increase;
      converged = true;
      break;
    }
    iterations = k + 1;
    if (!next.matrix().allFinite()) {  // rounding floor; keep the best seen
      reason = StopReason::objective_increase;
      converged = true;
      break;
    }
    // The stop rule compares checkpoints, but the best iterate is tracked at
    // full resolution: at tiny delta the deepest iterate sits between
    // checkpoints, right before rounding noise sets in.
    const double f_new = checked_objective(next, x, cfg);
    if (!std::isfinite(f_new)) {
      reason = StopReason::objective_increase;
      converged = true;
      break;
    }
    if (f_new < f_best) {
      f_best = f_new;
      best = next;
    }
    f_last = f_new;
    const double step = (next.matrix() - cur.matrix()).norm();
    const bool checkpoint = ((k + 1) % cfg.check_every == 0);
    if (checkpoint) {
      trace.push_back(f_new);
      if (f_new > f_prev_checkpoint) {
        reason = StopReason::objective_increase;
        converged = true;
        break;
      }
      f_prev_checkpoint = f_new;
    }
    cur = next;
    if (step < kStepTol) {
      if (!checkpoint) trace.push_back(f_new);
      reason = StopReason::step_tolerance;
      converged = true;
      break;
    }
  }

  if (reason == StopReason::max_iter && iterations % cfg.check_every != 0)
    trace.push_back(f_last);

  SolveReport report{std::move(best), 0, {}, false, 0.0, StopReason::max_iter, false};
  report.iterations = iterations;
  report.objective_trace = std::move(trace);
  report.converged = converged;
  report.stop_reason = reason;
  report.fixed_point_residual = report_residual(report.q_hat, x, cfg);
  return report;
}

SolveReport minimize_restricted(const PointSet& x, const Subspace& annihilate,
                                const IrlsConfig& cfg) {
  validate_config(cfg);
  if (x.cols() != annihilate.ambient_dim())
    throw DimensionError("minimize_restricted: ambient dimensions differ");
  if (annihilate.dim() == 0) return minimize(x, cfg);
  if (annihilate.dim() >= annihilate.ambient_dim())
    throw DomainError("minimize_restricted: annihilated subspace must be proper");

  const Subspace comp = complement(annihilate);
  const Matrix& c = comp.basis();
  const PointSet y = x * c;

  // All points (numerically) inside the annihilated subspace: the objective
  // vanishes identically and any feasible Q qualifies.
  const double data_scale = std::max(1.0, x.rowwise().norm().maxCoeff());
  if (y.rowwise().norm().maxCoeff() <= 1e-12 * data_scale) {
    const Eigen::Index m = comp.dim();
    ScaledQ q_small(Matrix::Identity(m, m) / static_cast<double>(m));
    Matrix embedded = c * q_small.matrix() * c.transpose();
    SolveReport report{ScaledQ(0.5 * (embedded + embedded.transpose())),
                       0, {}, false, 0.0, StopReason::max_iter, false};
    report.iterations = 0;
    report.objective_trace = {checked_objective(q_small, y, cfg)};
    report.converged = true;
    report.stop_reason = StopReason::step_tolerance;
    report.fixed_point_residual = 0.0;
    report.degenerate = true;
    return report;
  }

  SolveReport report = minimize(y, cfg);
  Matrix embedded = c * report.q_hat.matrix() * c.transpose();
  report.q_hat = ScaledQ(0.5 * (embedded + embedded.transpose()));
  return report;
}

double fixed_point_residual(const ScaledQ& q, const PointSet& x, double delta) {
  check_points(q, x, "fixed_point_residual");
  if (!(delta > 0.0))
    throw ConfigError("fixed_point_residual: delta must be positive");
  IrlsConfig cfg;
  cfg.delta = delta;
  return report_residual(q, x, cfg);
}

double convergence_rate_bound(const ScaledQ& q_star, const PointSet& x,
                              double delta) {
  check_points(q_star, x, "convergence_rate_bound");
  if (!(delta > 0.0))
    throw ConfigError("convergence_rate_bound: delta must be positive");
  const Eigen::Index D = q_star.dim();
  if (D > 30)
    throw CapabilityError(
        "convergence_rate_bound: dense formulation limited to D <= 30, got D = " +
        std::to_string(D));

  // Orthonormal basis of symmetric matrices: diagonal units, then scaled
  // symmetric pair units.
  const Eigen::Index m0 = D * (D + 1) / 2;
  std::vector<Matrix> basis;
  basis.reserve(m0);
  Vector trace_vec(m0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < D; ++i) {
    Matrix b = Matrix::Zero(D, D);
    b(i, i) = 1.0;
    trace_vec(static_cast<Eigen::Index>(basis.size())) = 1.0;
    basis.push_back(std::move(b));
  }
  for (Eigen::Index i = 0; i < D; ++i)
    for (Eigen::Index j = i + 1; j < D; ++j) {
      Matrix b = Matrix::Zero(D, D);
      b(i, j) = b(j, i) = inv_sqrt2;
      trace_vec(static_cast<Eigen::Index>(basis.size())) = 0.0;
      basis.push_back(std::move(b));
    }

  const Vector norms = image_norms(q_star, x);
  const Vector clamped = norms.cwiseMax(delta);

  // Numerator: sum over ||Q* x_i|| > delta of <Delta, sym(x_i z_i^T)>^2 / ||Q* x_i||^3.
  Matrix num = Matrix::Zero(m0, m0);
  const Matrix z = x * q_star.matrix();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (!(norms(i) > delta)) continue;
    const Matrix outer =
        0.5 * (x.row(i).transpose() * z.row(i) + z.row(i).transpose() * x.row(i));
    Vector coeff(m0);
    Eigen::Index idx = 0;
    for (Eigen::Index a = 0; a < D; ++a) coeff(idx++) = outer(a, a);
    for (Eigen::Index a = 0; a < D; ++a)
      for (Eigen::Index b = a + 1; b < D; ++b)
        coeff(idx++) = std::sqrt(2.0) * outer(a, b);
    num += (coeff * coeff.transpose()) / std::pow(norms(i), 3);
  }

  // Denominator quadratic form tr(Delta W Delta) with the clamp-weighted
  // second moment W.
  const Matrix w_mat =
      x.transpose() * (x.array().colwise() / clamped.array()).matrix();
  Matrix den(m0, m0);
  std::vector<Matrix> bw(m0);
  for (Eigen::Index k = 0; k < m0; ++k) bw[k] = basis[k] * w_mat;
  for (Eigen::Index k = 0; k < m0; ++k)
    for (Eigen::Index l = 0; l <= k; ++l) {
      const double v = bw[k].cwiseProduct(basis[l]).sum();
      den(k, l) = den(l, k) = v;
    }

  // Restrict both forms to the trace-zero slice.
  Eigen::HouseholderQR<Matrix> qr(trace_vec);
  const Matrix zbasis =
      Matrix(qr.householderQ()).rightCols(m0 - 1);  // orthonormal, ⟂ trace_vec
  const Matrix num_r = zbasis.transpose() * num * zbasis;
  const Matrix den_r = zbasis.transpose() * den * zbasis;

  Eigen::LDLT<Matrix> den_ldlt(den_r);
  if (den_ldlt.info() != Eigen::Success || den_ldlt.vectorD().minCoeff() <= 0.0)
    throw RankDeficiencyError(
        "convergence_rate_bound: data must span the ambient space",
        numerical_rank(x));

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(
      0.5 * (num_r + num_r.transpose()), 0.5 * (den_r + den_r.transpose()));
  if (ges.info() != Eigen::Success)
    throw Error("convergence_rate_bound: generalized eigenproblem failed");
  const double lambda_max = ges.eigenvalues().maxCoeff();
  return std::sqrt(std::max(lambda_max, 0.0));
}

}  // namespace subrec
