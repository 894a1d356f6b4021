#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subrec/solver.hpp"

namespace subrec {

struct RecoveryResult {
  Subspace subspace;  // always in the original ambient space
  ScaledQ q_hat;      // embedded back into the original ambient space
  Spectrum spectrum;  // of q_hat
  std::optional<Eigen::Index> estimated_dim;
  SolveReport solve;
  std::vector<std::string> pipeline_notes;  // preprocessing applied, in order
};

// Recovers a d-dimensional subspace as the span of the bottom d eigenvectors
// of the minimizer. When the data does not span the ambient space (and no
// ridge is configured) the objective minimum is zero on the span's
// complement, so the uniform minimizer there is returned without iterating;
// see pipeline_notes.
RecoveryResult gms(const PointSet& x, Eigen::Index d, const IrlsConfig& cfg = {});

// Span of the eigenvectors whose eigenvalues fall below rel_tol * lambda_max.
// Raises DegenerateKernelError when the split is empty or meaningless.
Subspace kernel_subspace(const ScaledQ& q, double rel_tol = 1e-6);

// d = D - (index of the largest log-eigengap); ties break toward smaller d.
// Requires strictly positive eigenvalues.
Eigen::Index estimate_dimension(const Spectrum& spec);

// Deflation recovery: repeatedly solve restricted to the current candidate
// subspace and remove the top `batch` eigenvector directions until dimension
// d remains; the final batch is truncated so d is hit exactly.
RecoveryResult egms(const PointSet& x, Eigen::Index d, const IrlsConfig& cfg = {},
                    Eigen::Index batch = 1);

// Remedy pipeline for outlier-starved instances: lossless reduction, append
// artificial spherical Gaussian outliers (default count twice the reduced
// dimension), normalize all points to the unit sphere, then run the base
// recovery with d (or with the log-eigengap dimension estimate when d is
// absent). Artificial points never appear in reported statistics.
RecoveryResult gms2(const PointSet& x, std::optional<Eigen::Index> d,
                    const IrlsConfig& cfg, std::uint64_t seed,
                    std::optional<Eigen::Index> n_artificial = std::nullopt);

// Bisects the ridge weight until the kernel (eigenvalues below
// kernel_tol * lambda_max) has dimension exactly d, then returns the bottom-d
// subspace at that weight. At most 30 bisection steps; raises BracketError,
// reporting the endpoint kernel dimensions, if d is never attained.
RecoveryResult gms_lambda_bisection(const PointSet& x, Eigen::Index d,
                                    const IrlsConfig& cfg,
                                    std::pair<double, double> lambda_range,
                                    double kernel_tol = 1e-6);

enum class RobustEigMode {
  inverse_order,  // eigenvectors of the full-data minimizer, ascending eigenvalue
  egms_sequence,  // deflation directions in reverse removal order
};

// Ordered robust eigenvector estimates, most significant first.
// inverse_order requires data spanning the ambient space; on rank-deficient
// data it raises RankDeficiencyError directing to egms_sequence, which
// handles degenerate spectra by deflating data-null directions first.
std::vector<Vector> robust_eigenvectors(const PointSet& x, const IrlsConfig& cfg,
                                        RobustEigMode mode);

}  // namespace subrec
