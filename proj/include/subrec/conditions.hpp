#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "subrec/solver.hpp"

namespace subrec {

// Ground-truth-labeled sample: inliers must lie on l_star to relative
// tolerance 1e-8 (noisy data should be labeled against its noiseless
// counterpart, not against itself).
class LabeledData {
 public:
  LabeledData(PointSet inliers, PointSet outliers, Subspace l_star);

  const PointSet& inliers() const { return inliers_; }
  const PointSet& outliers() const { return outliers_; }
  const Subspace& l_star() const { return l_star_; }

 private:
  PointSet inliers_;
  PointSet outliers_;
  Subspace l_star_;
};

struct ConditionReport {
  double lhs_permeance = 0.0;
  double rhs_c1 = 0.0;
  double rhs_c2 = 0.0;
  bool holds_c1 = false;
  bool holds_c2 = false;
  Eigen::Index rank_q0 = 0;
  bool holds_rank = false;
  double rhs_c13 = 0.0;
  double rhs_c14 = 0.0;
  bool holds_c13 = false;
  bool holds_c14 = false;
  std::vector<std::string> approximation_flags;
};

// Restricted minimizer annihilating l_star, plus its numerical rank
// (eigenvalues >= kernel_tol * lambda_max).
std::pair<ScaledQ, Eigen::Index> oracle_q0(const LabeledData& data,
                                           const IrlsConfig& cfg = {},
                                           double kernel_tol = 1e-6);

struct PermeanceResult {
  double value = 0.0;
  bool degenerate = false;  // inliers rank-deficient within l_star; value is 0
};

// How thoroughly the inliers fill l_star: the restricted minimum of
// sum ||Q x|| over trace-1 symmetric Q supported on l_star.
PermeanceResult lhs_permeance(const LabeledData& data, const IrlsConfig& cfg = {});

struct SphereOptResult {
  double value = 0.0;
  bool approximate = false;
};

// sqrt(2) * min over unit v in the complement of l_star of sum |v.x| over
// outliers. Exact (grid + descent) when the complement dimension is <= 3;
// otherwise multi-start subgradient descent, flagged approximate (the value
// then upper-bounds the true minimum).
SphereOptResult rhs_condition1(const LabeledData& data, int grid_resolution = 2048);

// sqrt(2) * max over unit v in l_star of sum |v.x| over outliers. Exact for
// d <= 3; otherwise sign-iteration ascent from n_starts random starts plus
// the l_star coordinate axes, flagged approximate (lower bound).
SphereOptResult rhs_condition2(const LabeledData& data, int n_starts = 64,
                               std::uint64_t seed = 0);

// Spectral-norm statistics of the weaker recovery conditions, scaled by
// sqrt(2). Raises PreconditionError naming the offending point indices when
// some outlier has ||Q0 x|| <= delta.
std::pair<double, double> check_conditions_13_14(const LabeledData& data,
                                                 const ScaledQ& q0,
                                                 double delta = 1e-20);

// Runs every checker and evaluates the strict inequalities.
ConditionReport full_report(const LabeledData& data, const IrlsConfig& cfg = {});

// Randomized sufficient check that no two hyperplanes spanned by sampled
// (D-1)-subsets of the data jointly cover the whole sample. Returns false as
// soon as a covering pair is found; true after k_pairs clean draws.
bool two_hyperplanes_surrogate(const PointSet& x, int k_pairs = 200,
                               std::uint64_t seed = 0);

}  // namespace subrec
