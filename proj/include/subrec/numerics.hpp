#pragma once

#include "subrec/types.hpp"

namespace subrec {

// Full eigendecomposition of a symmetric matrix.
struct Spectrum {
  Vector eigenvalues;    // sorted descending
  Matrix eigenvectors;   // orthonormal columns, order matching eigenvalues
  Vector eigengaps;      // eigenvalues[i] - eigenvalues[i+1], length D-1
  Vector log_eigengaps;  // log(eigenvalues[i]) - log(eigenvalues[i+1]);
                         // empty unless every eigenvalue is strictly positive
};

// Eigendecomposition with descending eigenvalues. The operand is symmetrized
// as (A + A^T)/2 first to absorb rounding drift; genuine asymmetry beyond
// tolerance raises SymmetryError. "Bottom d eigenvectors" always means the
// last d columns of the returned eigenvector matrix.
Spectrum sym_eig(const Matrix& a);

// Solves A X = B for symmetric positive-definite A via a symmetric
// factorization (no explicit inverse). Raises SingularityError, carrying a
// condition estimate, when the smallest eigenvalue falls at or below
// 1e-14 times the largest.
Matrix solve_spd(const Matrix& a, const Matrix& b);

// Orthogonal projector P = B B^T onto the subspace.
Matrix projector(const Subspace& s);

// Frobenius distance between the orthogonal projectors of two subspaces.
double recovery_error(const Subspace& s1, const Subspace& s2);

// Orthonormal basis of the orthogonal complement.
Subspace complement(const Subspace& s);

// Span of the top d right singular vectors of an N x D point set.
Subspace right_singular_subspace(const PointSet& x, Eigen::Index d);

// Numerical rank by singular values above rel_tol * s_max.
Eigen::Index numerical_rank(const Matrix& x, double rel_tol = 1e-12);

}  // namespace subrec
