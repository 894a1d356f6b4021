#include "subrec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "subrec/baselines.hpp"
#include "subrec/conditions.hpp"
#include "subrec/errors.hpp"
#include "subrec/recovery.hpp"

namespace subrec {

namespace {

using Json = nlohmann::ordered_json;

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double t : v) s += t;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double t : v) s += (t - mean) * (t - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

bool needs_dimension(Algorithm a) { return a != Algorithm::gms2; }

// Per-trial dispatch. `d` has already been validated for algorithms that
// require it; gms2 may run without it and report an estimate instead.
struct AlgoOutput {
  Subspace subspace;
  std::optional<int> iterations;
  std::optional<Eigen::Index> estimated_dim;
};

AlgoOutput run_algorithm(const ExperimentSpec& spec, const PointSet& x,
                         std::optional<Eigen::Index> d, std::uint64_t aux_seed) {
  switch (spec.algorithm) {
    case Algorithm::gms: {
      RecoveryResult r = gms(x, *d, spec.solver);
      return {r.subspace, r.solve.iterations, r.estimated_dim};
    }
    case Algorithm::gms2: {
      RecoveryResult r = gms2(x, spec.d, spec.solver, aux_seed);
      return {r.subspace, r.solve.iterations, r.estimated_dim};
    }
    case Algorithm::egms: {
      RecoveryResult r = egms(x, *d, spec.solver);
      return {r.subspace, r.solve.iterations, r.estimated_dim};
    }
    case Algorithm::gms_ridge: {
      if (!spec.solver.ridge_lambda)
        throw ConfigError("gms_ridge requires a ridge weight (--lambda)");
      double lam = *spec.solver.ridge_lambda;
      RecoveryResult r = gms_lambda_bisection(x, *d, spec.solver, {lam, lam});
      return {r.subspace, r.solve.iterations, r.estimated_dim};
    }
    case Algorithm::pca:
      return {pca_subspace(x, *d), std::nullopt, std::nullopt};
    case Algorithm::l2: {
      ScaledQ q = l2_minimizer(x);
      Spectrum s = sym_eig(q.matrix());
      return {Subspace(s.eigenvectors.rightCols(*d)), std::nullopt, std::nullopt};
    }
    case Algorithm::m_est: {
      MEstimate m = common_m_estimator(x);
      Spectrum s = sym_eig(m.covariance);
      return {Subspace(s.eigenvectors.leftCols(*d)), m.report.iterations,
              std::nullopt};
    }
  }
  throw ConfigError("unhandled algorithm");
}

void validate_spec(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw ConfigError("trials must be at least 1");
  if (spec.threads < 0) throw ConfigError("threads must be nonnegative");
  if (spec.synthetic.has_value() == spec.input_path.has_value())
    throw ConfigError("exactly one of a synthetic model and an input file is required");
}

std::optional<Eigen::Index> effective_dimension(const ExperimentSpec& spec) {
  if (spec.d) return spec.d;
  if (spec.synthetic) return spec.synthetic->d;
  return std::nullopt;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

Json solver_json(const IrlsConfig& cfg) {
  Json j;
  j["delta"] = cfg.delta;
  j["max_iter"] = cfg.max_iter;
  j["check_every"] = cfg.check_every;
  if (cfg.ridge_lambda)
    j["ridge_lambda"] = *cfg.ridge_lambda;
  else
    j["ridge_lambda"] = nullptr;
  return j;
}

std::string model_name(SyntheticModel m) {
  switch (m) {
    case SyntheticModel::haystack_uniform: return "haystack_uniform";
    case SyntheticModel::needle_haystack: return "needle_haystack";
    case SyntheticModel::asymmetric_outliers: return "asymmetric_outliers";
  }
  return "unknown";
}

}  // namespace

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "gms") return Algorithm::gms;
  if (name == "gms2") return Algorithm::gms2;
  if (name == "egms") return Algorithm::egms;
  if (name == "gms_ridge") return Algorithm::gms_ridge;
  if (name == "pca") return Algorithm::pca;
  if (name == "l2") return Algorithm::l2;
  if (name == "m_est") return Algorithm::m_est;
  throw ConfigError("unknown algorithm '" + name +
                    "' (expected gms, gms2, egms, gms_ridge, pca, l2, m_est)");
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::gms: return "gms";
    case Algorithm::gms2: return "gms2";
    case Algorithm::egms: return "egms";
    case Algorithm::gms_ridge: return "gms_ridge";
    case Algorithm::pca: return "pca";
    case Algorithm::l2: return "l2";
    case Algorithm::m_est: return "m_est";
  }
  return "unknown";
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  validate_spec(spec);
  std::optional<Eigen::Index> d = effective_dimension(spec);
  if (needs_dimension(spec.algorithm) && !d)
    throw ConfigError(algorithm_name(spec.algorithm) +
                      " requires a target dimension (--d)");
  if (spec.algorithm == Algorithm::gms_ridge && !spec.solver.ridge_lambda)
    throw ConfigError("gms_ridge requires a ridge weight (--lambda)");

  PointSet shared;
  if (spec.input_path) shared = load_csv(*spec.input_path);

  auto run_trial = [&](int i) {
    TrialResult t;
    t.trial_index = i;
    auto start = std::chrono::steady_clock::now();
    try {
      PointSet x;
      std::optional<Subspace> truth;
      if (spec.synthetic) {
        SyntheticConfig cfg = *spec.synthetic;
        cfg.seed = substream_seed(spec.master_seed, 2 * static_cast<std::uint64_t>(i));
        SyntheticSample sample = generate(cfg);
        x = std::move(sample.points);
        truth = std::move(sample.l_star);
      } else {
        x = shared;
      }
      std::uint64_t aux =
          substream_seed(spec.master_seed, 2 * static_cast<std::uint64_t>(i) + 1);
      AlgoOutput out = run_algorithm(spec, x, d, aux);
      if (truth) t.recovery_error = recovery_error(out.subspace, *truth);
      t.iterations = out.iterations;
      t.estimated_dim = out.estimated_dim;
    } catch (const std::exception& e) {
      t.error = e.what();
    }
    auto stop = std::chrono::steady_clock::now();
    t.runtime_seconds = std::chrono::duration<double>(stop - start).count();
    return t;
  };

  ExperimentResult result;
  result.per_trial.resize(static_cast<std::size_t>(spec.trials));
  unsigned workers = spec.threads > 0
                         ? static_cast<unsigned>(spec.threads)
                         : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(spec.trials));
  if (workers <= 1) {
    for (int i = 0; i < spec.trials; ++i)
      result.per_trial[static_cast<std::size_t>(i)] = run_trial(i);
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (int i = next.fetch_add(1); i < spec.trials; i = next.fetch_add(1))
        result.per_trial[static_cast<std::size_t>(i)] = run_trial(i);
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<double> errs;
  std::vector<double> times;
  for (const TrialResult& t : result.per_trial) {
    if (t.recovery_error) errs.push_back(*t.recovery_error);
    times.push_back(t.runtime_seconds);
  }
  if (!errs.empty()) {
    result.mean_error = mean_of(errs);
    result.std_error = sample_std(errs, *result.mean_error);
  }
  result.mean_runtime = mean_of(times);
  result.std_runtime = sample_std(times, result.mean_runtime);

  if (!spec.output_path.empty()) {
    std::ofstream out(spec.output_path);
    if (!out) throw ConfigError("cannot open output file '" + spec.output_path + "'");
    out << report_json(result, spec) << "\n";
    if (!out) throw ConfigError("failed writing '" + spec.output_path + "'");
  }
  if (spec.emit_spectrum) {
    std::string path = spec.output_path.empty() ? "spectrum.csv"
                                                : spec.output_path + ".spectrum.csv";
    spectrum_dump(spec, path);
  }
  return result;
}

std::vector<std::pair<double, double>> delta_sweep(const ExperimentSpec& spec,
                                                   const std::vector<double>& deltas) {
  validate_spec(spec);
  if (!spec.synthetic)
    throw ConfigError("a delta sweep needs synthetic data with known ground truth");
  if (deltas.empty()) throw ConfigError("empty delta list");
  std::vector<std::pair<double, double>> table;
  table.reserve(deltas.size());
  for (double delta : deltas) {
    if (!(delta > 0.0)) throw ConfigError("deltas must be positive");
    ExperimentSpec s = spec;
    s.solver.delta = delta;
    s.output_path.clear();
    s.emit_spectrum = false;
    ExperimentResult r = run_experiment(s);
    double err = r.mean_error ? *r.mean_error
                              : std::numeric_limits<double>::quiet_NaN();
    table.emplace_back(delta, err);
  }
  return table;
}

double log_log_slope(const std::vector<std::pair<double, double>>& table) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& [delta, err] : table) {
    if (delta > 0.0 && err > 0.0 && std::isfinite(err)) {
      lx.push_back(std::log(delta));
      ly.push_back(std::log(err));
    }
  }
  if (lx.size() < 2)
    throw DomainError("slope needs at least two rows with positive error");
  double mx = mean_of(lx);
  double my = mean_of(ly);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 0.0) throw DomainError("slope needs at least two distinct deltas");
  return sxy / sxx;
}

void spectrum_dump(const ExperimentSpec& spec, const std::string& out_path) {
  validate_spec(spec);
  PointSet x;
  if (spec.synthetic) {
    SyntheticConfig cfg = *spec.synthetic;
    cfg.seed = substream_seed(spec.master_seed, 0);
    x = generate(cfg).points;
  } else {
    x = load_csv(*spec.input_path);
  }

  Spectrum s;
  std::optional<Eigen::Index> est;
  switch (spec.algorithm) {
    case Algorithm::gms:
    case Algorithm::egms: {
      RecoveryResult r = gms(x, 1, spec.solver);
      s = std::move(r.spectrum);
      break;
    }
    case Algorithm::gms_ridge: {
      if (!spec.solver.ridge_lambda)
        throw ConfigError("gms_ridge requires a ridge weight (--lambda)");
      RecoveryResult r = gms(x, 1, spec.solver);
      s = std::move(r.spectrum);
      break;
    }
    case Algorithm::gms2: {
      RecoveryResult r = gms2(x, std::nullopt, spec.solver,
                              substream_seed(spec.master_seed, 1));
      s = std::move(r.spectrum);
      est = r.estimated_dim;
      break;
    }
    case Algorithm::l2: {
      s = sym_eig(l2_minimizer(x).matrix());
      break;
    }
    case Algorithm::m_est: {
      s = sym_eig(common_m_estimator(x).covariance);
      break;
    }
    case Algorithm::pca:
      throw ConfigError("pca has no minimizer spectrum to dump");
  }

  Eigen::Index n = s.eigenvalues.size();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(s.eigenvalues[i] > 0.0))
      throw DomainError("spectrum dump needs strictly positive eigenvalues");
  if (!est) est = estimate_dimension(s);

  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot open output file '" + out_path + "'");
  for (Eigen::Index i = 0; i < n; ++i) {
    out << (i + 1) << ',' << format_double(s.eigenvalues[i]) << ','
        << format_double(std::log(s.eigenvalues[i])) << ',';
    if (i + 1 < n) out << format_double(s.log_eigengaps[i]);
    out << '\n';
  }
  out << "estimated_dim," << *est << '\n';
  if (!out) throw ConfigError("failed writing '" + out_path + "'");
}

void conditions_report(const std::string& inliers_csv,
                       const std::string& outliers_csv,
                       const std::string& l_star_csv,
                       const std::string& out_path) {
  PointSet inliers = load_csv(inliers_csv);
  PointSet outliers = load_csv(outliers_csv);
  Matrix basis = load_csv(l_star_csv);
  LabeledData data(inliers, outliers, Subspace(basis));
  ConditionReport rep = full_report(data);

  Json j;
  j["schema_version"] = 1;
  j["lhs_permeance"] = rep.lhs_permeance;
  j["rhs_c1"] = rep.rhs_c1;
  j["rhs_c2"] = rep.rhs_c2;
  j["holds_c1"] = rep.holds_c1;
  j["holds_c2"] = rep.holds_c2;
  j["rank_q0"] = rep.rank_q0;
  j["holds_rank"] = rep.holds_rank;
  j["rhs_c13"] = rep.rhs_c13;
  j["rhs_c14"] = rep.rhs_c14;
  j["holds_c13"] = rep.holds_c13;
  j["holds_c14"] = rep.holds_c14;
  j["approximation_flags"] = rep.approximation_flags;

  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot open output file '" + out_path + "'");
  out << j.dump(2) << "\n";
  if (!out) throw ConfigError("failed writing '" + out_path + "'");
}

PointSet load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      std::string cell = line.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      const char* begin = cell.c_str();
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      while (end && *end != '\0' && (*end == ' ' || *end == '\t' || *end == '\r'))
        ++end;
      if (end == begin || (end && *end != '\0'))
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": cannot parse '" + cell + "' as a number");
      row.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(rows.front().size()) + " columns, got " +
                        std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError(path + ": no data rows");
  PointSet x(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return x;
}

void save_csv(const PointSet& x, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j) out << ',';
      out << x(i, j);
    }
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

std::string report_json(const ExperimentResult& result, const ExperimentSpec& spec) {
  Json j;
  j["schema_version"] = 1;
  j["algorithm"] = algorithm_name(spec.algorithm);
  j["trials"] = spec.trials;
  j["master_seed"] = spec.master_seed;
  if (spec.d)
    j["d"] = *spec.d;
  else
    j["d"] = nullptr;
  j["solver"] = solver_json(spec.solver);
  if (spec.synthetic) {
    const SyntheticConfig& c = *spec.synthetic;
    Json s;
    s["model"] = model_name(c.model);
    s["n1"] = c.n1;
    s["n0"] = c.n0;
    s["D"] = c.D;
    s["d"] = c.d;
    s["eta"] = c.eta;
    s["sigma0"] = c.sigma0;
    s["sigma1"] = c.sigma1;
    j["synthetic"] = s;
  } else {
    j["synthetic"] = nullptr;
  }
  if (spec.input_path)
    j["input_path"] = *spec.input_path;
  else
    j["input_path"] = nullptr;

  Json trials = Json::array();
  for (const TrialResult& t : result.per_trial) {
    Json row;
    row["trial"] = t.trial_index;
    if (t.recovery_error)
      row["recovery_error"] = *t.recovery_error;
    else
      row["recovery_error"] = nullptr;
    row["runtime_seconds"] = t.runtime_seconds;
    if (t.iterations)
      row["iterations"] = *t.iterations;
    else
      row["iterations"] = nullptr;
    if (t.estimated_dim)
      row["estimated_dim"] = *t.estimated_dim;
    else
      row["estimated_dim"] = nullptr;
    if (t.error)
      row["error"] = *t.error;
    else
      row["error"] = nullptr;
    trials.push_back(row);
  }
  j["per_trial"] = trials;

  Json agg;
  if (result.mean_error)
    agg["mean_error"] = *result.mean_error;
  else
    agg["mean_error"] = nullptr;
  if (result.std_error)
    agg["std_error"] = *result.std_error;
  else
    agg["std_error"] = nullptr;
  agg["mean_runtime"] = result.mean_runtime;
  agg["std_runtime"] = result.std_runtime;
  j["aggregates"] = agg;

  return j.dump(2);
}

}  // namespace subrec
