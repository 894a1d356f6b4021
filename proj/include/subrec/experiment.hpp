#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subrec/solver.hpp"
#include "subrec/synthdata.hpp"

namespace subrec {

enum class Algorithm { gms, gms2, egms, gms_ridge, pca, l2, m_est };

Algorithm algorithm_from_name(const std::string& name);  // ConfigError on unknown
std::string algorithm_name(Algorithm a);

struct ExperimentSpec {
  Algorithm algorithm = Algorithm::gms;
  std::optional<SyntheticConfig> synthetic;
  std::optional<std::string> input_path;  // exactly one of synthetic/input_path
  int trials = 1;
  IrlsConfig solver;
  std::optional<Eigen::Index> d;
  std::string output_path;  // empty: no report file written
  bool emit_spectrum = false;
  std::uint64_t master_seed = 0;  // trial i uses substream_seed(master_seed, i)
  int threads = 0;                // 0 = hardware concurrency
};

struct TrialResult {
  int trial_index = 0;
  std::optional<double> recovery_error;  // absent without ground truth
  double runtime_seconds = 0.0;
  std::optional<int> iterations;
  std::optional<Eigen::Index> estimated_dim;
  std::optional<std::string> error;  // per-trial failure, batch continues
};

struct ExperimentResult {
  std::vector<TrialResult> per_trial;  // sorted by trial index
  std::optional<double> mean_error;
  std::optional<double> std_error;
  double mean_runtime = 0.0;
  double std_runtime = 0.0;
};

// Runs spec.trials trials (concurrently when threads allow; numeric output is
// independent of the thread count) and optionally writes the JSON report.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Reruns the recovery of `spec` once per delta; rows are (delta, mean error).
std::vector<std::pair<double, double>> delta_sweep(const ExperimentSpec& spec,
                                                   const std::vector<double>& deltas);

// Least-squares slope of log(error) against log(delta).
double log_log_slope(const std::vector<std::pair<double, double>>& table);

// Solves once and writes rows (index, eigenvalue, log_eigenvalue,
// log_eigengap) followed by a final "estimated_dim,<k>" row.
void spectrum_dump(const ExperimentSpec& spec, const std::string& out_path);

// Reads labeled data (inliers, outliers, subspace basis as CSV matrices),
// evaluates the recovery conditions, writes the JSON report.
void conditions_report(const std::string& inliers_csv,
                       const std::string& outliers_csv,
                       const std::string& l_star_csv,
                       const std::string& out_path);

// Headerless CSV matrix I/O, one point per row.
PointSet load_csv(const std::string& path);
void save_csv(const PointSet& x, const std::string& path);

std::string report_json(const ExperimentResult& result, const ExperimentSpec& spec);

}  // namespace subrec
