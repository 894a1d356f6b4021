#include "subrec/synthdata.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "subrec/errors.hpp"
#include "subrec/numerics.hpp"
#include "subrec/rng.hpp"

namespace subrec {

namespace {

void validate(const SyntheticConfig& cfg) {
  if (cfg.D < 2) throw ConfigError("synthdata: ambient dimension must be >= 2");
  if (cfg.d < 1 || cfg.d >= cfg.D)
    throw ConfigError("synthdata: need 1 <= d < D, got d = " +
                      std::to_string(cfg.d) + ", D = " + std::to_string(cfg.D));
  if (cfg.n1 < 0 || cfg.n0 < 0) throw ConfigError("synthdata: counts must be >= 0");
  if (cfg.n1 + cfg.n0 == 0) throw ConfigError("synthdata: no points requested");
  if (!(cfg.eta >= 0.0)) throw ConfigError("synthdata: eta must be >= 0");
  if (!(cfg.sigma0 > 0.0) || !(cfg.sigma1 > 0.0))
    throw ConfigError("synthdata: scales must be positive");
  if (cfg.model == SyntheticModel::asymmetric_outliers) {
    if (!cfg.sigma0_matrix)
      throw ConfigError("synthdata: asymmetric_outliers requires sigma0_matrix");
    const Matrix& s = *cfg.sigma0_matrix;
    if (s.rows() != cfg.D || s.cols() != cfg.D)
      throw DimensionError("synthdata: sigma0_matrix must be D x D");
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw SymmetryError("synthdata: sigma0_matrix must be symmetric");
  }
}

Matrix psd_sqrt(const Matrix& s) {
  const Spectrum spec = sym_eig(s);
  if (spec.eigenvalues.minCoeff() < -1e-10 * std::abs(spec.eigenvalues.maxCoeff()))
    throw DomainError("synthdata: sigma0_matrix must be positive semidefinite");
  const Vector root = spec.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return spec.eigenvectors * root.asDiagonal() * spec.eigenvectors.transpose();
}

}  // namespace

SyntheticSample generate(const SyntheticConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  const Eigen::Index n1 = cfg.n1, n0 = cfg.n0, D = cfg.D, d = cfg.d;
  const Eigen::Index n = n1 + n0;

  // Uniform subspace via orthonormalized Gaussian frame.
  const Matrix frame = rng.gaussian_matrix(D, d);
  const Matrix basis = Eigen::HouseholderQR<Matrix>(frame)
                           .householderQ() *
                       Matrix::Identity(D, d);
  Subspace l_star{basis};

  PointSet noiseless(n, D);
  switch (cfg.model) {
    case SyntheticModel::haystack_uniform: {
      const Matrix coords = rng.gaussian_matrix(n1, d);
      noiseless.topRows(n1) = coords * basis.transpose();
      // Outliers uniform on the origin-centered cube [-1,1]^D. The centered
      // variant is what reproduces the reference benchmark errors for PCA
      // and both M-estimators; a cube hanging off the origin drags every
      // estimator toward its mean direction and inflates all of them.
      noiseless.bottomRows(n0) =
          2.0 * rng.uniform_matrix(n0, D).array() - 1.0;
      break;
    }
    case SyntheticModel::needle_haystack: {
      const double in_scale = cfg.sigma1 / std::sqrt(static_cast<double>(d));
      const double out_scale = cfg.sigma0 / std::sqrt(static_cast<double>(D));
      const Matrix coords = in_scale * rng.gaussian_matrix(n1, d);
      noiseless.topRows(n1) = coords * basis.transpose();
      noiseless.bottomRows(n0) = out_scale * rng.gaussian_matrix(n0, D);
      break;
    }
    case SyntheticModel::asymmetric_outliers: {
      const double in_scale = cfg.sigma1 / std::sqrt(static_cast<double>(d));
      const Matrix coords = in_scale * rng.gaussian_matrix(n1, d);
      noiseless.topRows(n1) = coords * basis.transpose();
      const Matrix root = psd_sqrt(*cfg.sigma0_matrix /
                                   static_cast<double>(D));
      noiseless.bottomRows(n0) = rng.gaussian_matrix(n0, D) * root.transpose();
      break;
    }
  }

  PointSet points = noiseless;
  if (cfg.eta > 0.0 && n1 > 0)
    points.topRows(n1) += cfg.eta * rng.gaussian_matrix(n1, D);

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n1; ++i) labels[static_cast<std::size_t>(i)] = 1;

  return SyntheticSample{std::move(points), std::move(labels), std::move(l_star),
                         std::move(noiseless)};
}

double snr(const SyntheticConfig& cfg) {
  if (cfg.n0 <= 0)
    throw DomainError("snr: outlier count must be positive");
  if (cfg.n1 < 0) throw ConfigError("snr: inlier count must be >= 0");
  return static_cast<double>(cfg.n1) / static_cast<double>(cfg.n0);
}

double snr_threshold(const SyntheticConfig& cfg) {
  if (cfg.d < 1 || cfg.d >= cfg.D)
    throw ConfigError("snr_threshold: need 1 <= d < D");
  if (!(cfg.sigma0 > 0.0) || !(cfg.sigma1 > 0.0))
    throw ConfigError("snr_threshold: scales must be positive");
  const double D = static_cast<double>(cfg.D), d = static_cast<double>(cfg.d);
  return 4.0 * (cfg.sigma0 / cfg.sigma1) * d / std::sqrt((D - d) * D);
}

}  // namespace subrec
