#include "subrec/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "subrec/errors.hpp"

namespace subrec {

namespace {

constexpr double kSymTol = 1e-10;
constexpr double kBasisTol = 1e-8;

void check_symmetric(const Matrix& a, const char* who) {
  if (a.rows() != a.cols())
    throw DimensionError(std::string(who) + ": operand is " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         ", expected square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymTol * scale)
    throw SymmetryError(std::string(who) + ": operand asymmetry " +
                        std::to_string(asym) + " exceeds tolerance");
}

}  // namespace

Subspace::Subspace(Matrix basis) : basis_(std::move(basis)) {
  if (basis_.cols() > basis_.rows())
    throw BasisError("subspace dimension " + std::to_string(basis_.cols()) +
                     " exceeds ambient dimension " + std::to_string(basis_.rows()));
  if (basis_.cols() > 0) {
    const Matrix gram = basis_.transpose() * basis_;
    const double err = (gram - Matrix::Identity(basis_.cols(), basis_.cols()))
                           .cwiseAbs()
                           .maxCoeff();
    if (err > kBasisTol)
      throw BasisError("basis is not orthonormal (gram deviation " +
                       std::to_string(err) + ")");
  }
}

Subspace Subspace::zero(Eigen::Index ambient_dim) {
  return Subspace(Matrix(ambient_dim, 0));
}

Subspace Subspace::full(Eigen::Index ambient_dim) {
  return Subspace(Matrix::Identity(ambient_dim, ambient_dim));
}

Spectrum sym_eig(const Matrix& a) {
  check_symmetric(a, "sym_eig");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success)
    throw Error("sym_eig: eigendecomposition failed to converge");

  const Eigen::Index n = sym.rows();
  Spectrum s;
  s.eigenvalues = es.eigenvalues().reverse();
  s.eigenvectors = es.eigenvectors().rowwise().reverse();
  if (n > 1) {
    s.eigengaps.resize(n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i)
      s.eigengaps(i) = s.eigenvalues(i) - s.eigenvalues(i + 1);
    if (s.eigenvalues(n - 1) > 0.0) {
      s.log_eigengaps.resize(n - 1);
      for (Eigen::Index i = 0; i + 1 < n; ++i)
        s.log_eigengaps(i) =
            std::log(s.eigenvalues(i)) - std::log(s.eigenvalues(i + 1));
    }
  }
  return s;
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  check_symmetric(a, "solve_spd");
  if (a.rows() != b.rows())
    throw DimensionError("solve_spd: A is " + std::to_string(a.rows()) +
                         "-dim but B has " + std::to_string(b.rows()) + " rows");

  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::LDLT<Matrix> ldlt(sym);
  const Vector diag = ldlt.vectorD();
  const double dmax = diag.maxCoeff();
  const double dmin = diag.minCoeff();
  // The LDLT pivot ratio is a cheap condition estimate for SPD operands.
  const double cond = (dmin > 0.0) ? dmax / dmin
                                   : std::numeric_limits<double>::infinity();
  if (ldlt.info() != Eigen::Success || dmin <= 1e-14 * dmax || dmax <= 0.0)
    throw SingularityError(
        "solve_spd: operand numerically singular (condition estimate " +
            std::to_string(cond) + ")",
        cond);
  return ldlt.solve(b);
}

Matrix projector(const Subspace& s) {
  return s.basis() * s.basis().transpose();
}

double recovery_error(const Subspace& s1, const Subspace& s2) {
  if (s1.ambient_dim() != s2.ambient_dim())
    throw DimensionError("recovery_error: ambient dimensions differ (" +
                         std::to_string(s1.ambient_dim()) + " vs " +
                         std::to_string(s2.ambient_dim()) + ")");
  return (projector(s1) - projector(s2)).norm();
}

Subspace complement(const Subspace& s) {
  const Eigen::Index n = s.ambient_dim();
  const Eigen::Index d = s.dim();
  if (d == 0) return Subspace::full(n);
  if (d == n) return Subspace::zero(n);
  // Null space of B^T from the full SVD: right vectors past the rank.
  Eigen::JacobiSVD<Matrix> svd(s.basis().transpose(), Eigen::ComputeFullV);
  return Subspace(svd.matrixV().rightCols(n - d));
}

Subspace right_singular_subspace(const PointSet& x, Eigen::Index d) {
  if (d < 0 || d > x.cols())
    throw DimensionError("right_singular_subspace: d = " + std::to_string(d) +
                         " out of range for D = " + std::to_string(x.cols()));
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinV);
  const Vector sv = svd.singularValues();
  Eigen::Index rank = 0;
  const double tol = 1e-12 * std::max(sv.size() > 0 ? sv(0) : 0.0, 0.0);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  if (d > rank)
    throw RankDeficiencyError("right_singular_subspace: requested dimension " +
                                  std::to_string(d) + " exceeds data rank " +
                                  std::to_string(rank),
                              rank);
  return Subspace(svd.matrixV().leftCols(d));
}

Eigen::Index numerical_rank(const Matrix& x, double rel_tol) {
  Eigen::BDCSVD<Matrix> svd(x);
  const Vector sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++r;
  return r;
}

}  // namespace subrec
