#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subrec/errors.hpp"
#include "subrec/experiment.hpp"

namespace {

using subrec::ConfigError;

struct CommonOpts {
  std::string algorithm = "gms";
  std::string synthetic;
  std::string sigma0_matrix;
  std::string input;
  std::string output;
  long long d = 0;
  double delta = 1e-20;
  double lambda = 0.0;
  int max_iter = 100;
  int trials = 1;
  int threads = 0;
  std::uint64_t seed = 0;
  bool emit_spectrum = false;

  CLI::Option* d_opt = nullptr;
  CLI::Option* delta_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* max_iter_opt = nullptr;
};

long long parse_count(const std::string& field, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(field, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " '" + field + "'");
  }
  if (used != field.size()) throw ConfigError("cannot parse " + what + " '" + field + "'");
  return v;
}

double parse_real(const std::string& field, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " '" + field + "'");
  }
  if (used != field.size()) throw ConfigError("cannot parse " + what + " '" + field + "'");
  return v;
}

// "model:N1:N0:D:d:eta" with optional ":sigma0:sigma1" tail.
subrec::SyntheticConfig parse_synthetic(const std::string& text,
                                        const std::string& sigma0_matrix_path) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t colon = text.find(':', pos);
    fields.push_back(text.substr(
        pos, colon == std::string::npos ? std::string::npos : colon - pos));
    if (colon == std::string::npos) break;
    pos = colon + 1;
  }
  if (fields.size() < 6 || fields.size() > 8)
    throw ConfigError("synthetic spec must be model:N1:N0:D:d:eta with an "
                      "optional :sigma0:sigma1 tail, got '" + text + "'");

  subrec::SyntheticConfig cfg;
  const std::string& model = fields[0];
  if (model == "haystack" || model == "haystack_uniform")
    cfg.model = subrec::SyntheticModel::haystack_uniform;
  else if (model == "needle" || model == "needle_haystack")
    cfg.model = subrec::SyntheticModel::needle_haystack;
  else if (model == "asymmetric" || model == "asymmetric_outliers")
    cfg.model = subrec::SyntheticModel::asymmetric_outliers;
  else
    throw ConfigError("unknown synthetic model '" + model +
                      "' (expected haystack, needle, or asymmetric)");

  cfg.n1 = parse_count(fields[1], "inlier count");
  cfg.n0 = parse_count(fields[2], "outlier count");
  cfg.D = parse_count(fields[3], "ambient dimension");
  cfg.d = parse_count(fields[4], "subspace dimension");
  cfg.eta = parse_real(fields[5], "noise level");
  if (fields.size() > 6) cfg.sigma0 = parse_real(fields[6], "sigma0");
  if (fields.size() > 7) cfg.sigma1 = parse_real(fields[7], "sigma1");
  if (!sigma0_matrix_path.empty())
    cfg.sigma0_matrix = subrec::load_csv(sigma0_matrix_path);
  return cfg;
}

void add_common_flags(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--algorithm", o.algorithm,
                  "gms, gms2, egms, gms_ridge, pca, l2, or m_est")
      ->capture_default_str();
  sub->add_option("--synthetic", o.synthetic,
                  "synthetic data spec model:N1:N0:D:d:eta[:sigma0[:sigma1]]");
  sub->add_option("--sigma0-matrix", o.sigma0_matrix,
                  "CSV covariance for the asymmetric outlier model");
  sub->add_option("--input", o.input, "CSV data file, one point per row");
  o.d_opt = sub->add_option("--d", o.d, "target subspace dimension");
  o.delta_opt = sub->add_option("--delta", o.delta, "solver regularization");
  o.lambda_opt = sub->add_option("--lambda", o.lambda, "ridge weight");
  o.max_iter_opt = sub->add_option("--max-iter", o.max_iter, "solver iteration cap");
  sub->add_option("--trials", o.trials, "number of trials")->capture_default_str();
  sub->add_option("--seed", o.seed, "master seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "worker threads (0 = hardware)")
      ->capture_default_str();
  sub->add_option("--output", o.output, "report output path");
  sub->add_flag("--emit-spectrum", o.emit_spectrum,
                "also write the minimizer spectrum CSV");
  sub->set_config("--config", "", "read options from a key=value file");
}

subrec::ExperimentSpec build_spec(const CommonOpts& o) {
  subrec::ExperimentSpec spec;
  spec.algorithm = subrec::algorithm_from_name(o.algorithm);
  if (!o.synthetic.empty())
    spec.synthetic = parse_synthetic(o.synthetic, o.sigma0_matrix);
  if (!o.input.empty()) spec.input_path = o.input;
  spec.trials = o.trials;
  spec.master_seed = o.seed;
  spec.threads = o.threads;
  spec.output_path = o.output;
  spec.emit_spectrum = o.emit_spectrum;
  if (o.d_opt->count()) {
    if (o.d < 1) throw ConfigError("--d must be at least 1");
    spec.d = static_cast<Eigen::Index>(o.d);
  }
  if (o.delta_opt->count()) {
    if (!(o.delta > 0.0)) throw ConfigError("--delta must be positive");
    spec.solver.delta = o.delta;
  }
  if (o.lambda_opt->count()) {
    if (!(o.lambda >= 0.0)) throw ConfigError("--lambda must be nonnegative");
    spec.solver.ridge_lambda = o.lambda;
  }
  if (o.max_iter_opt->count()) {
    if (o.max_iter < 1) throw ConfigError("--max-iter must be at least 1");
    spec.solver.max_iter = o.max_iter;
  }
  return spec;
}

int run_experiment_cmd(const CommonOpts& o) {
  subrec::ExperimentSpec spec = build_spec(o);
  subrec::ExperimentResult result = subrec::run_experiment(spec);

  int failed = 0;
  for (const subrec::TrialResult& t : result.per_trial)
    if (t.error) {
      ++failed;
      std::cerr << "trial " << t.trial_index << ": " << *t.error << "\n";
    }

  std::cout << "algorithm: " << subrec::algorithm_name(spec.algorithm) << "\n";
  std::cout << "trials: " << spec.trials << " (" << failed << " failed)\n";
  if (result.mean_error) {
    std::cout << "mean_error: " << *result.mean_error << "\n";
    std::cout << "std_error: " << *result.std_error << "\n";
  }
  std::cout << "mean_runtime_seconds: " << result.mean_runtime << "\n";
  std::cout << "std_runtime_seconds: " << result.std_runtime << "\n";
  for (const subrec::TrialResult& t : result.per_trial)
    if (t.estimated_dim)
      std::cout << "trial " << t.trial_index << " estimated_dim: "
                << *t.estimated_dim << "\n";
  if (!spec.output_path.empty())
    std::cout << "report: " << spec.output_path << "\n";

  return failed == spec.trials ? 2 : 0;
}

int run_sweep_cmd(const CommonOpts& o, const std::vector<double>& deltas) {
  subrec::ExperimentSpec spec = build_spec(o);
  spec.output_path.clear();
  auto table = subrec::delta_sweep(spec, deltas);
  std::ostringstream rows;
  rows.precision(17);
  for (const auto& [delta, err] : table) rows << delta << ',' << err << '\n';
  std::cout << rows.str();
  bool plateau_range = false;
  for (double delta : deltas)
    if (delta < 1e-15) plateau_range = true;
  if (plateau_range)
    std::cerr << "note: deltas below 1e-15 are typically rounding-dominated; "
                 "the error plateaus there\n";
  try {
    std::cout << "slope," << subrec::log_log_slope(table) << "\n";
  } catch (const subrec::DomainError&) {
    std::cout << "slope,nan\n";
  }
  if (!o.output.empty()) {
    std::ofstream out(o.output);
    if (!out) throw ConfigError("cannot open output file '" + o.output + "'");
    out << rows.str();
    if (!out) throw ConfigError("failed writing '" + o.output + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust subspace recovery benchmarks"};
  app.require_subcommand(1);

  CommonOpts exp_opts;
  CLI::App* exp = app.add_subcommand("experiment", "run recovery trials");
  add_common_flags(exp, exp_opts);

  CommonOpts sweep_opts;
  std::vector<double> deltas;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "rerun recovery over a list of solver deltas");
  add_common_flags(sweep, sweep_opts);
  sweep->add_option("--deltas", deltas, "comma-separated delta list")
      ->required()
      ->delimiter(',');

  CommonOpts spect_opts;
  CLI::App* spect = app.add_subcommand(
      "spectrum", "write the minimizer eigenvalue table");
  add_common_flags(spect, spect_opts);

  CommonOpts cond_opts;
  std::string inliers_csv;
  std::string outliers_csv;
  std::string l_star_csv;
  CLI::App* cond = app.add_subcommand(
      "conditions", "evaluate the exact-recovery conditions on labeled data");
  cond->add_option("--inliers", inliers_csv, "inlier CSV")->required();
  cond->add_option("--outliers", outliers_csv, "outlier CSV")->required();
  cond->add_option("--l-star", l_star_csv,
                   "subspace basis CSV (ambient rows, basis columns)")
      ->required();
  cond->add_option("--output", cond_opts.output, "report path")->required();
  cond->set_config("--config", "", "read options from a key=value file");

  try {
    app.parse(argc, argv);
    if (exp->parsed()) return run_experiment_cmd(exp_opts);
    if (sweep->parsed()) return run_sweep_cmd(sweep_opts, deltas);
    if (spect->parsed()) {
      subrec::ExperimentSpec spec = build_spec(spect_opts);
      std::string path = spect_opts.output.empty() ? "spectrum.csv" : spect_opts.output;
      subrec::spectrum_dump(spec, path);
      std::cout << "spectrum: " << path << "\n";
      return 0;
    }
    if (cond->parsed()) {
      subrec::conditions_report(inliers_csv, outliers_csv, l_star_csv,
                                cond_opts.output);
      std::cout << "report: " << cond_opts.output << "\n";
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const subrec::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const subrec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
