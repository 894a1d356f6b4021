#include "subrec/recovery.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "subrec/errors.hpp"
#include "subrec/rng.hpp"
#include "subrec/baselines.hpp"

namespace subrec {

namespace {

// Bottom-d eigenvectors (ascending eigenvalue) from a descending-order
// spectrum: they sit in the trailing columns.
Matrix bottom_eigenvectors(const Spectrum& spec, Eigen::Index d) {
  return spec.eigenvectors.rightCols(d).rowwise().reverse();
}

// The minimizer is the trace-normalized inverse of a positive definite
// matrix, so its true eigenvalues are positive; the computed ones can still
// round to tiny negatives once the kernel has collapsed. Restore positivity
// at the rounding floor so log-spectrum consumers stay defined.
Spectrum positive_spectrum(const Matrix& q) {
  Spectrum spec = sym_eig(q);
  const double lmax = spec.eigenvalues.cwiseAbs().maxCoeff();
  spec.eigenvalues = spec.eigenvalues.cwiseMax(
      lmax * std::numeric_limits<double>::epsilon());
  return spec;
}

bool boundary_tie(const Spectrum& spec, Eigen::Index d) {
  const Eigen::Index n = spec.eigenvalues.size();
  if (d <= 0 || d >= n) return false;
  const double lo = spec.eigenvalues(n - d);      // largest inside the subspace
  const double hi = spec.eigenvalues(n - d - 1);  // smallest outside
  const double scale = std::max(std::abs(spec.eigenvalues(0)), 1e-300);
  return std::abs(hi - lo) <= 1e-9 * scale;
}

struct ReducedData {
  PointSet y;          // coordinates inside the span
  Matrix back;         // D x r map back to ambient coordinates
  Eigen::Index rank;
  bool reduced;
};

ReducedData reduce_lossless(const PointSet& x, std::vector<std::string>& notes) {
  const Eigen::Index D = x.cols();
  const Eigen::Index r = numerical_rank(x);
  if (r == D) return ReducedData{x, Matrix::Identity(D, D), r, false};
  const Subspace span = right_singular_subspace(x, r);
  notes.push_back("lossless reduction to dimension " + std::to_string(r));
  return ReducedData{x * span.basis(), span.basis(), r, true};
}

ScaledQ embed(const ScaledQ& q_red, const ReducedData& red) {
  if (!red.reduced) return q_red;
  Matrix q = red.back * q_red.matrix() * red.back.transpose();
  return ScaledQ(0.5 * (q + q.transpose()));
}

RecoveryResult assemble(const ReducedData& red, SolveReport rep,
                        Eigen::Index d, std::vector<std::string> notes,
                        std::optional<Eigen::Index> estimated) {
  const Spectrum spec = positive_spectrum(rep.q_hat.matrix());
  if (boundary_tie(spec, d))
    notes.push_back(
        "eigenvalue tie at the subspace boundary: selection is not unique");
  Matrix basis_red = bottom_eigenvectors(spec, d);
  Subspace subspace{red.reduced ? Matrix(red.back * basis_red)
                                : std::move(basis_red)};
  ScaledQ q_full = embed(rep.q_hat, red);
  rep.q_hat = q_full;
  return RecoveryResult{std::move(subspace), std::move(q_full),
                        spec,  // spectrum in the solve space, always positive
                        estimated, std::move(rep), std::move(notes)};
}

}  // namespace

RecoveryResult gms(const PointSet& x, Eigen::Index d, const IrlsConfig& cfg) {
  if (x.rows() == 0 || x.cols() == 0)
    throw DimensionError("gms: empty point set");
  if (d < 1 || d >= x.cols())
    throw DimensionError("gms: need 1 <= d < D, got d = " + std::to_string(d));

  const Eigen::Index D = x.cols();
  std::vector<std::string> notes;
  const bool ridged = cfg.ridge_lambda && *cfg.ridge_lambda > 0.0;
  const Eigen::Index r = ridged ? D : numerical_rank(x);
  if (r < D) {
    // Rank-deficient data makes the convex program degenerate: every Q
    // supported on the orthogonal complement of the data span scores zero,
    // so the minimum is attained without any iteration. Return the uniform
    // minimizer on that complement; its kernel block covers the whole data
    // span, and the bottom-d selection inside that block is a tie-break.
    // When the span dimension equals d this still recovers the span exactly.
    const Subspace span = right_singular_subspace(x, r);
    Matrix q = (Matrix::Identity(D, D) - span.basis() * span.basis().transpose()) /
               static_cast<double>(D - r);
    q = (0.5 * (q + q.transpose())).eval();
    notes.push_back("data spans only " + std::to_string(r) + " of " +
                    std::to_string(D) +
                    " dimensions: objective minimum is zero on the span's "
                    "complement; returning the uniform minimizer there");
    ScaledQ q_hat(q);
    const double resid = fixed_point_residual(q_hat, x, cfg.delta);
    SolveReport rep{std::move(q_hat), 0,    {0.0},
                    true,             resid, StopReason::step_tolerance,
                    true};
    ReducedData identity{x, Matrix::Identity(D, D), r, false};
    return assemble(identity, std::move(rep), d, std::move(notes),
                    std::nullopt);
  }
  SolveReport rep = minimize(x, cfg);
  ReducedData identity{x, Matrix::Identity(D, D), r, false};
  return assemble(identity, std::move(rep), d, std::move(notes), std::nullopt);
}

Subspace kernel_subspace(const ScaledQ& q, double rel_tol) {
  if (!(rel_tol > 0.0) || !(rel_tol < 1.0))
    throw ConfigError("kernel_subspace: rel_tol must lie in (0,1)");
  const Spectrum spec = sym_eig(q.matrix());
  const double lmax = spec.eigenvalues(0);
  if (!(lmax > 0.0))
    throw DegenerateKernelError(
        "kernel_subspace: top eigenvalue is not positive");
  const Eigen::Index n = spec.eigenvalues.size();
  Eigen::Index k = 0;
  while (k < n && spec.eigenvalues(n - 1 - k) < rel_tol * lmax) ++k;
  if (k == 0)
    throw DegenerateKernelError(
        "kernel_subspace: no eigenvalue falls below the threshold (empty "
        "kernel)");
  return Subspace{bottom_eigenvectors(spec, k)};
}

Eigen::Index estimate_dimension(const Spectrum& spec) {
  const Eigen::Index n = spec.eigenvalues.size();
  if (n < 2)
    throw DomainError("estimate_dimension: need at least two eigenvalues");
  if (!(spec.eigenvalues.minCoeff() > 0.0))
    throw DomainError(
        "estimate_dimension: eigenvalues must be strictly positive");
  Eigen::Index best = 0;
  double best_gap = -1.0;
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double gap =
        std::log(spec.eigenvalues(j)) - std::log(spec.eigenvalues(j + 1));
    if (gap >= best_gap) {  // later index wins ties: smaller d
      best_gap = gap;
      best = j;
    }
  }
  return n - (best + 1);
}

RecoveryResult egms(const PointSet& x, Eigen::Index d, const IrlsConfig& cfg,
                    Eigen::Index batch) {
  if (x.rows() == 0 || x.cols() == 0)
    throw DimensionError("egms: empty point set");
  if (d < 1 || d >= x.cols())
    throw DimensionError("egms: need 1 <= d < D, got d = " + std::to_string(d));
  if (batch < 1) throw ConfigError("egms: batch must be >= 1");

  std::vector<std::string> notes;
  ReducedData red = reduce_lossless(x, notes);
  const Eigen::Index r = red.rank;
  if (d > r)
    throw DomainError("egms: requested dimension " + std::to_string(d) +
                      " exceeds the data rank " + std::to_string(r));

  Matrix removed(r, 0);  // annihilated directions, reduced coordinates
  SolveReport last{ScaledQ(Matrix::Identity(r, r) / static_cast<double>(r)),
                   0, {}, false, 0.0, StopReason::max_iter, false};
  bool solved = false;
  int iteration = 0;
  while (r - removed.cols() > d) {
    ++iteration;
    SolveReport rep = [&] {
      try {
        return removed.cols() == 0
                   ? minimize(red.y, cfg)
                   : minimize_restricted(red.y, Subspace{removed}, cfg);
      } catch (const RankDeficiencyError& e) {
        throw RankDeficiencyError("egms iteration " + std::to_string(iteration) +
                                      ": " + e.what(),
                                  e.rank);
      }
    }();
    if (rep.degenerate)
      throw DegenerateKernelError(
          "egms iteration " + std::to_string(iteration) +
          ": restricted objective is degenerate (all points orthogonal to the "
          "working subspace)");
    const Spectrum spec = sym_eig(rep.q_hat.matrix());
    const double lmax = spec.eigenvalues(0);
    Eigen::Index positive = 0;
    while (positive < spec.eigenvalues.size() &&
           spec.eigenvalues(positive) >= 1e-6 * lmax)
      ++positive;
    Eigen::Index take = std::min(batch, r - removed.cols() - d);
    take = std::min(take, std::max<Eigen::Index>(positive, 1));
    Matrix stacked(r, removed.cols() + take);
    stacked << removed, spec.eigenvectors.leftCols(take);
    removed = Eigen::HouseholderQR<Matrix>(stacked).householderQ() *
              Matrix::Identity(r, stacked.cols());
    last = std::move(rep);
    solved = true;
  }
  if (!solved) last = minimize(red.y, cfg);

  const Subspace remaining = complement(Subspace{removed});
  Subspace subspace{red.reduced ? Matrix(red.back * remaining.basis())
                                : remaining.basis()};
  const Spectrum spec = positive_spectrum(last.q_hat.matrix());
  ScaledQ q_full = embed(last.q_hat, red);
  SolveReport rep_out = std::move(last);
  rep_out.q_hat = q_full;
  return RecoveryResult{std::move(subspace), std::move(q_full), spec,
                        std::nullopt, std::move(rep_out), std::move(notes)};
}

RecoveryResult gms2(const PointSet& x, std::optional<Eigen::Index> d,
                    const IrlsConfig& cfg, std::uint64_t seed,
                    std::optional<Eigen::Index> n_artificial) {
  if (x.rows() == 0 || x.cols() == 0)
    throw DimensionError("gms2: empty point set");
  const Eigen::Index D = x.cols();
  if (d && (*d < 1 || *d >= D))
    throw DimensionError("gms2: need 1 <= d < D, got d = " + std::to_string(*d));

  std::vector<std::string> notes;
  ReducedData red = reduce_lossless(x, notes);
  const Eigen::Index r = red.rank;
  if (d && *d > r)
    throw DomainError("gms2: requested dimension " + std::to_string(*d) +
                      " exceeds the data rank " + std::to_string(r));

  // Twice the dimension of the space the points actually live in after
  // reduction. Enough that the artificial cloud fills every direction of the
  // complement, yet few enough that the original points keep the majority:
  // flooding a low-rank span with far more outliers than inliers would break
  // the very recovery the augmentation is meant to rescue.
  const Eigen::Index n_art = n_artificial.value_or(2 * r);
  if (n_art < 1) throw ConfigError("gms2: n_artificial must be >= 1");

  Rng rng(seed);
  PointSet aug(red.y.rows() + n_art, r);
  aug.topRows(red.y.rows()) = red.y;
  aug.bottomRows(n_art) = rng.gaussian_matrix(n_art, r);
  notes.push_back("appended " + std::to_string(n_art) +
                  " artificial spherical outliers");

  SpherizeResult sph = spherize(aug);
  if (sph.dropped > 0)
    notes.push_back("dropped " + std::to_string(sph.dropped) +
                    " zero-norm rows before spherization");
  notes.push_back("normalized all points to the unit sphere");

  SolveReport rep = minimize(sph.points, cfg);
  const Spectrum spec = positive_spectrum(rep.q_hat.matrix());
  Eigen::Index d_eff;
  std::optional<Eigen::Index> estimated;
  if (d) {
    d_eff = *d;
  } else {
    d_eff = estimate_dimension(spec);
    estimated = d_eff;
    notes.push_back("estimated dimension " + std::to_string(d_eff) +
                    " from the log-eigengap");
  }
  return assemble(red, std::move(rep), d_eff, std::move(notes), estimated);
}

RecoveryResult gms_lambda_bisection(const PointSet& x, Eigen::Index d,
                                    const IrlsConfig& cfg,
                                    std::pair<double, double> lambda_range,
                                    double kernel_tol) {
  if (x.rows() == 0 || x.cols() == 0)
    throw DimensionError("gms_lambda_bisection: empty point set");
  const Eigen::Index D = x.cols();
  if (d < 1 || d >= D)
    throw DimensionError("gms_lambda_bisection: need 1 <= d < D");
  if (!(kernel_tol > 0.0) || !(kernel_tol < 1.0))
    throw ConfigError("gms_lambda_bisection: kernel_tol must lie in (0,1)");
  double lo = lambda_range.first, hi = lambda_range.second;
  if (!(lo >= 0.0) || !(hi >= lo))
    throw ConfigError("gms_lambda_bisection: need 0 <= lo <= hi");

  struct Probe {
    SolveReport rep;
    Spectrum spec;
    Eigen::Index kdim;
    double lambda;
  };
  const auto probe = [&](double lambda) {
    IrlsConfig c = cfg;
    c.ridge_lambda = lambda;
    SolveReport rep = minimize(x, c);  // ridge keeps the step well posed
    Spectrum spec = positive_spectrum(rep.q_hat.matrix());
    const double lmax = spec.eigenvalues(0);
    Eigen::Index k = 0;
    while (k < D && spec.eigenvalues(D - 1 - k) < kernel_tol * lmax) ++k;
    return Probe{std::move(rep), std::move(spec), k, lambda};
  };

  const auto finish = [&](Probe p, int steps,
                          std::vector<std::string> extra_notes) {
    std::vector<std::string> notes = std::move(extra_notes);
    notes.push_back("ridge lambda " + std::to_string(p.lambda) + " selected after " +
                    std::to_string(steps) + " bisection steps (kernel dimension " +
                    std::to_string(p.kdim) + ")");
    if (boundary_tie(p.spec, d))
      notes.push_back(
          "eigenvalue tie at the subspace boundary: selection is not unique");
    Subspace subspace{bottom_eigenvectors(p.spec, d)};
    return RecoveryResult{std::move(subspace), p.rep.q_hat, std::move(p.spec),
                          std::nullopt, std::move(p.rep), std::move(notes)};
  };

  Probe at_lo = probe(lo);
  if (at_lo.kdim == d) return finish(std::move(at_lo), 0, {});
  if (lo == hi)
    throw BracketError(
        "gms_lambda_bisection: degenerate bracket attains kernel dimension " +
            std::to_string(at_lo.kdim) + ", not " + std::to_string(d),
        at_lo.kdim, at_lo.kdim);
  Probe at_hi = probe(hi);
  if (at_hi.kdim == d) return finish(std::move(at_hi), 0, {});
  // Kernel dimension is assumed non-increasing in lambda.
  if (at_lo.kdim < d || at_hi.kdim > d)
    throw BracketError(
        "gms_lambda_bisection: bracket cannot attain kernel dimension " +
            std::to_string(d) + " (endpoints attain " +
            std::to_string(at_lo.kdim) + " and " + std::to_string(at_hi.kdim) +
            ")",
        at_lo.kdim, at_hi.kdim);

  Probe last = std::move(at_hi);
  for (int step = 1; step <= 30; ++step) {
    const double mid = (lo > 0.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    Probe at_mid = probe(mid);
    const Eigen::Index k = at_mid.kdim;
    last = std::move(at_mid);
    if (k == d) return finish(std::move(last), step, {});
    if (k > d)
      lo = mid;
    else
      hi = mid;
  }
  return finish(std::move(last), 30,
                {"bisection exhausted after 30 steps without attaining the "
                 "requested kernel dimension"});
}

std::vector<Vector> robust_eigenvectors(const PointSet& x, const IrlsConfig& cfg,
                                        RobustEigMode mode) {
  if (x.rows() == 0 || x.cols() == 0)
    throw DimensionError("robust_eigenvectors: empty point set");
  const Eigen::Index D = x.cols();
  const Eigen::Index r = numerical_rank(x);

  if (mode == RobustEigMode::inverse_order) {
    if (r < D)
      throw RankDeficiencyError(
          "robust_eigenvectors: data spans only " + std::to_string(r) + " of " +
              std::to_string(D) +
              " dimensions; inverse_order is undefined, use egms_sequence",
          r);
    const SolveReport rep = minimize(x, cfg);
    const Spectrum spec = sym_eig(rep.q_hat.matrix());
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(D));
    for (Eigen::Index i = D - 1; i >= 0; --i)
      out.push_back(spec.eigenvectors.col(i));  // ascending eigenvalue
    return out;
  }

  // Deflation order: data-null directions carry no information and are removed
  // first (least significant), then one restricted solve per direction inside
  // the span.
  std::vector<Vector> out(static_cast<std::size_t>(D));
  Matrix removed(D, 0);
  Eigen::Index next_slot = D - 1;  // filled from least significant backwards
  if (r < D) {
    const Subspace span = right_singular_subspace(x, r);
    const Matrix null_basis = complement(span).basis();
    for (Eigen::Index j = 0; j < null_basis.cols(); ++j)
      out[static_cast<std::size_t>(next_slot--)] = null_basis.col(j);
    removed = null_basis;
  }
  while (D - removed.cols() > 1) {
    SolveReport rep = removed.cols() == 0
                          ? minimize(x, cfg)
                          : minimize_restricted(x, Subspace{removed}, cfg);
    const Spectrum spec = sym_eig(rep.q_hat.matrix());
    const Vector u = spec.eigenvectors.col(0);  // top direction of this stage
    out[static_cast<std::size_t>(next_slot--)] = u;
    Matrix stacked(D, removed.cols() + 1);
    stacked << removed, u;
    removed = Eigen::HouseholderQR<Matrix>(stacked).householderQ() *
              Matrix::Identity(D, stacked.cols());
  }
  out[0] = complement(Subspace{removed}).basis().col(0);
  return out;
}

}  // namespace subrec
