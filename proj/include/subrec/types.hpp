#pragma once

#include <Eigen/Dense>

namespace subrec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One data point per row, so a sample of N points in R^D is N x D.
using PointSet = Eigen::MatrixXd;

// Linear subspace of R^D held as an orthonormal basis (D x d, columns).
// d = 0 (trivial subspace) and d = D (full space) are both allowed.
class Subspace {
 public:
  explicit Subspace(Matrix basis);  // throws BasisError unless B^T B = I

  static Subspace zero(Eigen::Index ambient_dim);
  static Subspace full(Eigen::Index ambient_dim);

  Eigen::Index ambient_dim() const { return basis_.rows(); }
  Eigen::Index dim() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }

 private:
  Matrix basis_;
};

}  // namespace subrec
