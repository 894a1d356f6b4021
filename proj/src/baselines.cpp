#include "subrec/baselines.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "subrec/errors.hpp"
#include "subrec/numerics.hpp"

namespace subrec {

namespace {

constexpr double kCondCap = 1e14;

// A condition number past kCondCap counts as divergence only while the
// iterate is still moving this fast. On exact-subspace data the scatter
// legitimately collapses onto the inlier subspace; by then the step size
// has settled far below this and the collapse is the answer, not a failure.
constexpr double kBlowupStepTol = 1e-2;

// Loss consistent with the clamped weight u(t) = 2*max(ln(t)/t, 0): flat below
// t = 1, (ln t)^2 / 2 above. Used only for the monotonicity trace.
double loss_term(double s) {
  if (s <= 1.0) return 0.0;
  const double l = std::log(s);
  return 0.5 * l * l;
}

}  // namespace

Subspace pca_subspace(const PointSet& x, Eigen::Index d) {
  if (x.rows() == 0 || x.cols() == 0)
    throw DimensionError("pca_subspace: empty point set");
  if (d < 1 || d > x.cols())
    throw DimensionError("pca_subspace: need 1 <= d <= D, got d = " +
                         std::to_string(d));
  return right_singular_subspace(x, d);
}

ScaledQ l2_minimizer(const PointSet& x) {
  if (x.rows() == 0 || x.cols() == 0)
    throw DimensionError("l2_minimizer: empty point set");
  const Eigen::Index D = x.cols();
  const Eigen::Index r = numerical_rank(x);
  if (r < D)
    throw RankDeficiencyError(
        "l2_minimizer: data spans only " + std::to_string(r) + " of " +
            std::to_string(D) +
            " dimensions; apply lossless dimension reduction first",
        r);
  Matrix a = x.transpose() * x;
  a = 0.5 * (a + a.transpose()).eval();
  Matrix inv = solve_spd(a, Matrix::Identity(D, D));
  inv = 0.5 * (inv + inv.transpose()).eval();
  return ScaledQ(inv / inv.trace());
}

MEstimate common_m_estimator(const PointSet& x, const MEstimatorConfig& cfg) {
  if (x.rows() == 0 || x.cols() == 0)
    throw DimensionError("common_m_estimator: empty point set");
  if (!(cfg.weight_cap > 0.0))
    throw ConfigError("common_m_estimator: weight_cap must be positive");
  if (cfg.max_iter < 1)
    throw ConfigError("common_m_estimator: max_iter must be >= 1");
  const Eigen::Index N = x.rows(), D = x.cols();

  std::vector<Eigen::Index> zero_rows;
  for (Eigen::Index i = 0; i < N; ++i)
    if (x.row(i).norm() == 0.0) zero_rows.push_back(i);
  if (!zero_rows.empty())
    throw PreconditionError("common_m_estimator: zero rows are not allowed",
                            zero_rows);
  {
    const Eigen::Index r = numerical_rank(x);
    if (r < D)
      throw RankDeficiencyError(
          "common_m_estimator: data spans only " + std::to_string(r) + " of " +
              std::to_string(D) + " dimensions",
          r);
  }

  Matrix a = (x.transpose() * x) / static_cast<double>(N);
  a = 0.5 * (a + a.transpose()).eval();

  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  StopReason reason = StopReason::max_iter;
  double residual = std::numeric_limits<double>::infinity();
  Vector lam_clamped;
  Eigen::SelfAdjointEigenSolver<Matrix> es;

  for (int k = 0; k < cfg.max_iter; ++k) {
    es.compute(a);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (!std::isfinite(lmax) || !(lmax > 0.0))
      throw DivergenceError("common_m_estimator: iterate lost positivity",
                            std::numeric_limits<double>::infinity());
    if ((!(lmin > 0.0) || lmax / lmin > kCondCap) && residual > kBlowupStepTol)
      throw DivergenceError(
          "common_m_estimator: iterate condition number exceeded 1e14",
          (lmin > 0.0) ? lmax / lmin : std::numeric_limits<double>::infinity());

    // Floor the spectrum at lmax/cap before inverting so the iteration stays
    // defined through a terminal collapse of the complement directions.
    lam_clamped = es.eigenvalues().cwiseMax(lmax / kCondCap);

    // Mahalanobis gauges s_i = x_i^T A^{-1} x_i via the eigendecomposition.
    const Matrix whitened = (x * es.eigenvectors()).array().rowwise() /
                            lam_clamped.transpose().array().sqrt();
    const Vector s = whitened.rowwise().squaredNorm();

    double obj = 0.5 * static_cast<double>(N) *
                 lam_clamped.array().log().sum();
    for (Eigen::Index i = 0; i < N; ++i) obj += loss_term(s(i));
    trace.push_back(obj);

    Vector w(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      const double v = (s(i) > 0.0) ? std::log(s(i)) / s(i) : 0.0;
      w(i) = 2.0 * std::min(std::max(v, 0.0), cfg.weight_cap);
    }
    Matrix next = x.transpose() * (x.array().colwise() * w.array()).matrix() /
                  static_cast<double>(N);
    next = 0.5 * (next + next.transpose()).eval();
    if (!next.allFinite() || !(next.norm() > 0.0))
      throw DivergenceError("common_m_estimator: iterate lost positivity",
                            std::numeric_limits<double>::infinity());

    iterations = k + 1;
    residual = (next - a).norm() / std::max(a.norm(), 1e-300);
    const bool done = residual < cfg.step_tol;
    a = next;
    if (done) {
      converged = true;
      reason = StopReason::step_tolerance;
      break;
    }
  }

  // Return with the same spectral floor applied, so the covariance stays
  // positive definite even when the complement has been annihilated.
  es.compute(a);
  const double lmax = es.eigenvalues().maxCoeff();
  if (!std::isfinite(lmax) || !(lmax > 0.0))
    throw DivergenceError("common_m_estimator: iterate lost positivity",
                          std::numeric_limits<double>::infinity());
  lam_clamped = es.eigenvalues().cwiseMax(lmax / kCondCap);
  a = es.eigenvectors() * lam_clamped.asDiagonal() *
      es.eigenvectors().transpose();
  a = 0.5 * (a + a.transpose()).eval();

  SolveReport report{ScaledQ(a / a.trace()),
                     0, {}, false, 0.0, StopReason::max_iter, false};
  report.iterations = iterations;
  report.objective_trace = std::move(trace);
  report.converged = converged;
  report.stop_reason = reason;
  report.fixed_point_residual = residual;
  return MEstimate{std::move(a), std::move(report)};
}

SpherizeResult spherize(const PointSet& x) {
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (x.row(i).norm() > 1e-300) keep.push_back(i);
  PointSet out(static_cast<Eigen::Index>(keep.size()), x.cols());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const auto row = x.row(keep[j]);
    out.row(static_cast<Eigen::Index>(j)) = row / row.norm();
  }
  return SpherizeResult{std::move(out),
                        x.rows() - static_cast<Eigen::Index>(keep.size())};
}

}  // namespace subrec
