#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "subrec/rng.hpp"
#include "subrec/types.hpp"

namespace subrec {

enum class SyntheticModel {
  haystack_uniform,     // Gaussian inliers on L*, outliers uniform on [-1,1]^D
  needle_haystack,      // Gaussian inliers N(0, sigma1^2 P/d), outliers N(0, sigma0^2 I/D)
  asymmetric_outliers,  // outliers N(0, Sigma0/D) with user-provided SPD Sigma0
};

struct SyntheticConfig {
  SyntheticModel model = SyntheticModel::haystack_uniform;
  Eigen::Index n1 = 0;  // inliers
  Eigen::Index n0 = 0;  // outliers
  Eigen::Index D = 0;
  Eigen::Index d = 0;
  double eta = 0.0;     // inlier noise standard deviation
  double sigma0 = 1.0;
  double sigma1 = 1.0;
  std::optional<Matrix> sigma0_matrix;  // asymmetric_outliers only
  std::uint64_t seed = 0;
};

struct SyntheticSample {
  PointSet points;           // inliers first, then outliers
  std::vector<int> labels;   // 1 inlier, 0 outlier, aligned with rows
  Subspace l_star;           // ground truth
  PointSet noiseless_points; // inlier rows before noise; outlier rows unchanged
};

// Deterministic for a fixed config (including seed). The subspace is uniform
// on the Grassmannian via an orthonormalized Gaussian matrix; counts are
// fixed at (n1, n0) in all models rather than drawn from mixture weights.
SyntheticSample generate(const SyntheticConfig& cfg);

// Inlier-to-outlier count ratio n1/n0.
double snr(const SyntheticConfig& cfg);

// The exact-recovery threshold 4 (sigma0/sigma1) d / sqrt((D-d) D) that the
// SNR must exceed for high-probability recovery in the Gaussian model.
double snr_threshold(const SyntheticConfig& cfg);

}  // namespace subrec
