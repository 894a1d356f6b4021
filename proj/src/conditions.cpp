#include "subrec/conditions.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "subrec/errors.hpp"
#include "subrec/rng.hpp"

namespace subrec {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

Vector abs_sum_objective_grad(const PointSet& w, const Vector& u) {
  Vector g = Vector::Zero(u.size());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    const double s = w.row(i).dot(u);
    g += ((s >= 0.0) ? 1.0 : -1.0) * w.row(i).transpose();
  }
  return g;
}

double abs_sum(const PointSet& w, const Vector& u) {
  return (w * u).cwiseAbs().sum();
}

// Polishes a candidate minimizer of sum |<w_i, u>| on the unit sphere by
// projected subgradient steps with a shrinking step size.
Vector polish_min(const PointSet& w, Vector u, int iters) {
  double best = abs_sum(w, u);
  Vector best_u = u;
  double step = 0.5;
  for (int k = 0; k < iters; ++k) {
    Vector g = abs_sum_objective_grad(w, u);
    Vector t = g - g.dot(u) * u;
    const double tn = t.norm();
    if (tn < 1e-15) break;
    Vector cand = (u - step * t / tn).normalized();
    const double v = abs_sum(w, cand);
    if (v < best) {
      best = v;
      best_u = cand;
      u = cand;
    } else {
      step *= 0.5;
      if (step < 1e-12) break;
    }
  }
  return best_u;
}

// Exact minimum of sum_i |a_i cos t + b_i sin t|: the objective is a single
// sinusoid between kinks, so the minimum is at a kink or an interior trough.
double exact_min_2d(const PointSet& w) {
  const Eigen::Index n = w.rows();
  std::vector<double> kinks;
  kinks.reserve(static_cast<std::size_t>(n) + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w.row(i).norm() == 0.0) continue;
    // |<w_i, (cos t, sin t)>| vanishes at t = atan2(-a, b) modulo pi
    double t = std::atan2(-w(i, 0), w(i, 1));
    t = std::fmod(t + 2.0 * M_PI, M_PI);
    kinks.push_back(t);
  }
  if (kinks.empty()) return 0.0;
  std::sort(kinks.begin(), kinks.end());
  kinks.push_back(kinks.front() + M_PI);

  const auto value_at = [&](double t) {
    return abs_sum(w, Vector{{std::cos(t), std::sin(t)}});
  };
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < kinks.size(); ++j) {
    best = std::min(best, value_at(kinks[j]));
    const double mid = 0.5 * (kinks[j] + kinks[j + 1]);
    // Fixed signs inside the interval make the objective A cos t + B sin t.
    double a = 0.0, b = 0.0;
    const Vector um{{std::cos(mid), std::sin(mid)}};
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = (w.row(i).dot(um) >= 0.0) ? 1.0 : -1.0;
      a += s * w(i, 0);
      b += s * w(i, 1);
    }
    const double trough = std::atan2(-b, -a);  // minimum of A cos + B sin
    for (const double cand : {trough, trough + M_PI, trough + 2.0 * M_PI})
      if (cand > kinks[j] && cand < kinks[j + 1])
        best = std::min(best, value_at(cand));
  }
  return best;
}

double exact_min_3d(const PointSet& w, int grid_resolution) {
  std::vector<Vector> candidates;
  const Eigen::Index n = w.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Eigen::Vector3d c = Eigen::Vector3d(w.row(i).transpose())
                                    .cross(Eigen::Vector3d(w.row(j).transpose()));
      if (c.norm() > 1e-12) candidates.push_back(c.normalized());
    }
  for (Eigen::Index k = 0; k < 3; ++k) candidates.push_back(Vector::Unit(3, k));
  // Fibonacci sphere fallback net, costs little and guards degenerate inputs.
  const int m = std::max(grid_resolution, 64);
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < m; ++k) {
    const double z = 1.0 - 2.0 * (k + 0.5) / m;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * k;
    candidates.push_back(Vector{{rho * std::cos(phi), rho * std::sin(phi), z}});
  }
  double best = std::numeric_limits<double>::infinity();
  Vector best_u = Vector::Unit(3, 0);
  for (const Vector& u : candidates) {
    const double v = abs_sum(w, u);
    if (v < best) {
      best = v;
      best_u = u;
    }
  }
  const Vector polished = polish_min(w, best_u, 400);
  return std::min(best, abs_sum(w, polished));
}

// Sign-pattern ascent for the sphere maximum of sum |<z_i, c>|; each sweep is
// monotone, so the fixed point is a local maximum.
Vector ascend_max(const PointSet& z, Vector c, int max_sweeps = 100) {
  for (int k = 0; k < max_sweeps; ++k) {
    Vector next = abs_sum_objective_grad(z, c);
    const double nn = next.norm();
    if (nn < 1e-300) break;
    next /= nn;
    if ((next - c).norm() < 1e-14) return next;
    c = next;
  }
  return c;
}

struct DegenerateOracle {
  ScaledQ q0;
  Eigen::Index rank;
};

// When the outliers fail to span the complement of l_star, the restricted
// objective attains zero on the unfilled directions; the spread projector over
// those directions is then an exact minimizer.
DegenerateOracle degenerate_oracle(const LabeledData& data, double kernel_tol) {
  const Subspace comp = complement(data.l_star());
  const PointSet w = data.outliers() * comp.basis();
  const Eigen::Index m = comp.dim();
  const Eigen::Index r0 = (w.rows() == 0) ? 0 : numerical_rank(w);
  if (r0 >= m)
    throw Error("degenerate_oracle: outliers span the complement");
  Matrix inner;  // basis of the unfilled directions, complement coordinates
  if (r0 == 0) {
    inner = Matrix::Identity(m, m);
  } else {
    inner = complement(right_singular_subspace(w, r0)).basis();
  }
  const Matrix dirs = comp.basis() * inner;  // ambient, m - r0 columns
  Matrix q = dirs * dirs.transpose() / static_cast<double>(m - r0);
  ScaledQ q0{0.5 * (q + q.transpose())};
  const Spectrum spec = sym_eig(q0.matrix());
  const double lmax = spec.eigenvalues(0);
  Eigen::Index rank = 0;
  while (rank < spec.eigenvalues.size() &&
         spec.eigenvalues(rank) >= kernel_tol * lmax)
    ++rank;
  (void)kernel_tol;
  return DegenerateOracle{std::move(q0), rank};
}

}  // namespace

LabeledData::LabeledData(PointSet inliers, PointSet outliers, Subspace l_star)
    : inliers_(std::move(inliers)),
      outliers_(std::move(outliers)),
      l_star_(std::move(l_star)) {
  const Eigen::Index D = l_star_.ambient_dim();
  if (inliers_.cols() != D || outliers_.cols() != D)
    throw DimensionError("LabeledData: ambient dimensions disagree");
  std::vector<Eigen::Index> offending;
  const Matrix& b = l_star_.basis();
  for (Eigen::Index i = 0; i < inliers_.rows(); ++i) {
    const Vector x = inliers_.row(i).transpose();
    const double off = (x - b * (b.transpose() * x)).norm();
    if (off > 1e-8 * x.norm()) offending.push_back(i);
  }
  if (!offending.empty())
    throw PreconditionError(
        "LabeledData: " + std::to_string(offending.size()) +
            " labeled inliers lie farther than 1e-8 (relative) from l_star",
        offending);
}

std::pair<ScaledQ, Eigen::Index> oracle_q0(const LabeledData& data,
                                           const IrlsConfig& cfg,
                                           double kernel_tol) {
  if (data.outliers().rows() == 0)
    throw DimensionError("oracle_q0: outliers must be nonempty");
  if (!(kernel_tol > 0.0) || !(kernel_tol < 1.0))
    throw ConfigError("oracle_q0: kernel_tol must lie in (0,1)");
  PointSet all(data.inliers().rows() + data.outliers().rows(),
               data.inliers().cols());
  all.topRows(data.inliers().rows()) = data.inliers();
  all.bottomRows(data.outliers().rows()) = data.outliers();
  const SolveReport rep = minimize_restricted(all, data.l_star(), cfg);
  const Spectrum spec = sym_eig(rep.q_hat.matrix());
  const double lmax = spec.eigenvalues(0);
  Eigen::Index rank = 0;
  while (rank < spec.eigenvalues.size() &&
         spec.eigenvalues(rank) >= kernel_tol * lmax)
    ++rank;
  return {rep.q_hat, rank};
}

PermeanceResult lhs_permeance(const LabeledData& data, const IrlsConfig& cfg) {
  if (data.inliers().rows() == 0)
    throw DimensionError("lhs_permeance: inliers must be nonempty");
  const Eigen::Index d = data.l_star().dim();
  if (d == 0) throw DomainError("lhs_permeance: l_star must have dimension >= 1");
  const PointSet z = data.inliers() * data.l_star().basis();
  if (numerical_rank(z) < d) return PermeanceResult{0.0, true};
  const SolveReport rep = minimize(z, cfg);
  return PermeanceResult{objective(rep.q_hat, z), false};
}

SphereOptResult rhs_condition1(const LabeledData& data, int grid_resolution) {
  const Subspace comp = complement(data.l_star());
  const Eigen::Index m = comp.dim();
  if (m < 1)
    throw DomainError("rhs_condition1: the complement of l_star is empty");
  if (data.outliers().rows() == 0) return SphereOptResult{0.0, false};
  if (grid_resolution < 8)
    throw ConfigError("rhs_condition1: grid_resolution too small");
  const PointSet w = data.outliers() * comp.basis();

  if (m == 1) return SphereOptResult{kSqrt2 * w.col(0).cwiseAbs().sum(), false};
  if (m == 2) return SphereOptResult{kSqrt2 * exact_min_2d(w), false};
  if (m == 3)
    return SphereOptResult{kSqrt2 * exact_min_3d(w, grid_resolution), false};

  // High dimension: multi-start projected subgradient descent. The reported
  // value is attained at a feasible direction, hence upper-bounds the minimum.
  Rng rng(0x5eed5eedULL);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < m; ++k)
    best = std::min(best, abs_sum(w, polish_min(w, Vector::Unit(m, k), 200)));
  const int starts = std::max(8, grid_resolution / 64);
  for (int s = 0; s < starts; ++s) {
    Vector u(m);
    for (Eigen::Index k = 0; k < m; ++k) u(k) = rng.gaussian();
    u.normalize();
    best = std::min(best, abs_sum(w, polish_min(w, u, 200)));
  }
  return SphereOptResult{kSqrt2 * best, true};
}

SphereOptResult rhs_condition2(const LabeledData& data, int n_starts,
                               std::uint64_t seed) {
  const Eigen::Index d = data.l_star().dim();
  if (d < 1) throw DomainError("rhs_condition2: l_star must be nonempty");
  if (data.outliers().rows() == 0) return SphereOptResult{0.0, false};
  if (n_starts < 1) throw ConfigError("rhs_condition2: n_starts must be >= 1");
  const PointSet z = data.outliers() * data.l_star().basis();

  if (d == 1) return SphereOptResult{kSqrt2 * z.col(0).cwiseAbs().sum(), false};

  std::vector<Vector> starts;
  for (Eigen::Index k = 0; k < d; ++k) starts.push_back(Vector::Unit(d, k));
  // Ascent fixed points satisfy c proportional to a signed sum of points, so
  // seeding from every pairwise sign boundary covers the cell arrangement in
  // low dimension.
  const bool exact = (d <= 3);
  if (exact) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      if (z.row(i).norm() < 1e-300) continue;
      starts.push_back(z.row(i).normalized().transpose());
      starts.push_back(-z.row(i).normalized().transpose());
    }
    if (d == 3) {
      for (Eigen::Index i = 0; i < z.rows(); ++i)
        for (Eigen::Index j = i + 1; j < z.rows(); ++j) {
          const Eigen::Vector3d c = Eigen::Vector3d(z.row(i).transpose())
                                        .cross(Eigen::Vector3d(z.row(j).transpose()));
          if (c.norm() > 1e-12) {
            starts.push_back(c.normalized());
            starts.push_back(-c.normalized());
          }
        }
    }
  }
  Rng rng(seed);
  for (int s = 0; s < n_starts; ++s) {
    Vector c(d);
    for (Eigen::Index k = 0; k < d; ++k) c(k) = rng.gaussian();
    const double nn = c.norm();
    starts.push_back(nn > 1e-300 ? Vector(c / nn) : Vector(Vector::Unit(d, 0)));
  }

  double best = 0.0;
  for (const Vector& c0 : starts)
    best = std::max(best, abs_sum(z, ascend_max(z, c0)));
  return SphereOptResult{kSqrt2 * best, !exact};
}

std::pair<double, double> check_conditions_13_14(const LabeledData& data,
                                                 const ScaledQ& q0,
                                                 double delta) {
  if (!(delta > 0.0))
    throw ConfigError("check_conditions_13_14: delta must be positive");
  const PointSet& out = data.outliers();
  if (out.cols() != q0.dim())
    throw DimensionError("check_conditions_13_14: dimensions disagree");
  if (out.rows() == 0) return {0.0, 0.0};

  const Matrix z = out * q0.matrix();  // row i is (Q0 x_i)^T
  std::vector<Eigen::Index> offending;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    if (z.row(i).norm() <= delta) offending.push_back(i);
  if (!offending.empty())
    throw PreconditionError(
        "check_conditions_13_14: " + std::to_string(offending.size()) +
            " outliers have vanishing oracle image",
        offending);

  const Eigen::Index D = q0.dim();
  const Matrix& b = data.l_star().basis();
  const Matrix p_star = b * b.transpose();
  const Matrix p_perp = Matrix::Identity(D, D) - p_star;
  Matrix m13 = Matrix::Zero(D, D), m14 = Matrix::Zero(D, D);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const Matrix outer =
        z.row(i).transpose() * out.row(i) / z.row(i).norm();
    m13 += outer * p_perp;
    m14 += outer * p_star;
  }
  Eigen::JacobiSVD<Matrix> s13(m13), s14(m14);
  return {kSqrt2 * s13.singularValues()(0), kSqrt2 * s14.singularValues()(0)};
}

ConditionReport full_report(const LabeledData& data, const IrlsConfig& cfg) {
  ConditionReport rep;
  const Eigen::Index D = data.l_star().ambient_dim();
  const Eigen::Index d = data.l_star().dim();

  const PermeanceResult perm = lhs_permeance(data, cfg);
  rep.lhs_permeance = perm.value;
  if (perm.degenerate)
    rep.approximation_flags.push_back(
        "permeance degenerate: inliers are rank-deficient within l_star");

  const SphereOptResult r1 = rhs_condition1(data);
  rep.rhs_c1 = r1.value;
  if (r1.approximate)
    rep.approximation_flags.push_back(
        "rhs_condition1 approximate (upper bound on the sphere minimum)");
  const SphereOptResult r2 = rhs_condition2(data);
  rep.rhs_c2 = r2.value;
  if (r2.approximate)
    rep.approximation_flags.push_back(
        "rhs_condition2 approximate (lower bound on the sphere maximum)");

  rep.holds_c1 = rep.lhs_permeance > rep.rhs_c1;
  rep.holds_c2 = rep.lhs_permeance > rep.rhs_c2;

  std::optional<ScaledQ> q0;
  try {
    auto [q, rank] = oracle_q0(data, cfg);
    q0 = q;
    rep.rank_q0 = rank;
  } catch (const RankDeficiencyError&) {
    const DegenerateOracle deg = degenerate_oracle(data, 1e-6);
    q0 = deg.q0;
    rep.rank_q0 = deg.rank;
    rep.approximation_flags.push_back(
        "oracle restricted solve degenerate: zero-objective minimizer used");
  }
  rep.holds_rank = (rep.rank_q0 == D - d);

  try {
    auto [c13, c14] = check_conditions_13_14(data, *q0);
    rep.rhs_c13 = c13;
    rep.rhs_c14 = c14;
    rep.holds_c13 = rep.lhs_permeance > c13;
    rep.holds_c14 = rep.lhs_permeance > c14;
  } catch (const PreconditionError&) {
    rep.rhs_c13 = std::numeric_limits<double>::quiet_NaN();
    rep.rhs_c14 = std::numeric_limits<double>::quiet_NaN();
    rep.holds_c13 = false;
    rep.holds_c14 = false;
    rep.approximation_flags.push_back(
        "conditions (13)/(14) unavailable: some outlier has a vanishing oracle "
        "image");
  }
  return rep;
}

bool two_hyperplanes_surrogate(const PointSet& x, int k_pairs,
                               std::uint64_t seed) {
  const Eigen::Index N = x.rows(), D = x.cols();
  if (D < 2) throw DimensionError("two_hyperplanes_surrogate: need D >= 2");
  if (k_pairs < 1)
    throw ConfigError("two_hyperplanes_surrogate: k_pairs must be >= 1");
  // Few points always fit in two hyperplanes.
  if (N <= 2 * (D - 1)) return false;

  Rng rng(seed);
  const auto sample_subset = [&] {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(N));
    for (Eigen::Index i = 0; i < N; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (Eigen::Index i = 0; i < D - 1; ++i) {
      const Eigen::Index j =
          i + static_cast<Eigen::Index>(rng.raw() %
                                        static_cast<std::uint64_t>(N - i));
      std::swap(idx[static_cast<std::size_t>(i)],
                idx[static_cast<std::size_t>(j)]);
    }
    Matrix pts(D - 1, D);
    for (Eigen::Index i = 0; i < D - 1; ++i)
      pts.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
    return pts;
  };

  const auto in_span = [&](const Matrix& span_rows, const Vector& p) {
    Eigen::HouseholderQR<Matrix> qr(span_rows.transpose());
    const Matrix qfull = qr.householderQ() * Matrix::Identity(D, span_rows.rows());
    const Vector res = p - qfull * (qfull.transpose() * p);
    return res.norm() <= 1e-9 * std::max(p.norm(), 1e-300);
  };

  for (int k = 0; k < k_pairs; ++k) {
    const Matrix h1 = sample_subset();
    const Matrix h2 = sample_subset();
    bool covered = true;
    for (Eigen::Index i = 0; i < N && covered; ++i) {
      const Vector p = x.row(i).transpose();
      covered = in_span(h1, p) || in_span(h2, p);
    }
    if (covered) return false;
  }
  return true;
}

}  // namespace subrec
