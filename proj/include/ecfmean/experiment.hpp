#pragma once

#include "ecfmean/norms.hpp"
#include "ecfmean/refinement.hpp"
#include "ecfmean/simulation.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ecfmean {

/// Invalid configuration; the message starts with the offending field path.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure to read or write a file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RateFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Oracle radii use the true mean, covariance and a Monte Carlo C_n; plug-in
/// radii use the coordinate median, sample covariance and a sample C_n.
enum class RadiusMode { Oracle, Plugin };

const std::vector<std::string>& known_estimators();

struct ExperimentConfig {
  DistributionSpec distribution;
  std::optional<AdversarySpec> adversary;
  std::vector<std::size_t> n_grid;
  std::size_t d = 1;
  double delta = 0.1;
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  std::vector<std::string> estimators{"ecf"};
  NormKind norm = NormKind::L2;
  RadiusMode radius_mode = RadiusMode::Oracle;
  std::size_t cn_draws = 200;        // Monte Carlo draws for C_n
  double refine_eps0_factor = 4.0;   // initial accuracy of ecf_refined, in units of the floor
  SolverConfigs solver;

  void validate() const;
};

/// Parses a JSON document; throws ConfigError naming the field path.
ExperimentConfig parse_config(std::string_view json_text);
/// Reads and parses a file; throws IoError if unreadable.
ExperimentConfig load_config(const std::string& path);

struct TrialRecord {
  std::size_t trial_index = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  double eta = 0.0;
  std::string estimator_id;
  double error = 0.0;  // primal norm of mu_hat - mu_star
  double runtime_ms = 0.0;
  std::optional<double> objective_value;  // ECF variants only
  bool converged = true;

  bool operator==(const TrialRecord&) const = default;
};

/// Radius inputs for one sample size.
struct RadiusInputs {
  double Cn = 0.0;
  double sigma_op = 0.0;
  double mu_norm = 0.0;
  double eta = 0.0;
  double eps = 0.0;        // accuracy used for the ECF radius
  double eps_floor = 0.0;  // mean-free part, the refinement target
  double r = 0.0;
};

/// Oracle inputs: true covariance and mean, C_n averaged over `draws` fresh samples.
RadiusInputs oracle_radius_inputs(const ExperimentConfig& cfg, std::size_t n);

/// Plug-in inputs computed from the (possibly contaminated) sample itself.
RadiusInputs plugin_radius_inputs(const ExperimentConfig& cfg, const SampleSet& samples, std::uint64_t seed);

struct RunOptions {
  std::size_t jobs = 1;
  bool deterministic = false;  // zero runtime_ms
};

/// Records ordered by (n, trial_index, estimator_id).
std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Seed of the sample drawn for (n, trial).
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial);

enum class OutputFormat { Csv, Jsonl };
OutputFormat format_from_string(std::string_view name);

extern const char* const kCsvHeader;

void emit(const std::vector<TrialRecord>& records, OutputFormat format, std::ostream& out);
/// Writes to `path`; throws IoError verbatim from the OS.
void emit(const std::vector<TrialRecord>& records, OutputFormat format, const std::string& path);
std::vector<TrialRecord> parse_csv_records(std::string_view text);

struct RateRow {
  std::string estimator_id;
  std::size_t n = 0;
  std::size_t trials = 0;
  double median_error = 0.0;
  double q95_error = 0.0;
  double slope = 0.0;  // per estimator, repeated on each row
};

/// Least-squares slope of log(values) against log(ns).
double fit_loglog_slope(const std::vector<double>& ns, const std::vector<double>& values);

/// Per-estimator median and 95% quantile error for each n with the fitted slope.
std::vector<RateRow> summarize_rates(const std::vector<TrialRecord>& records);
std::vector<RateRow> rate_sweep(const ExperimentConfig& cfg, const RunOptions& opts = {});
void emit_rates(const std::vector<RateRow>& rows, OutputFormat format, std::ostream& out);

/// Reads an n x d numeric CSV, optionally skipping one header line.
SampleSet read_dataset(const std::string& path, bool header);

}  // namespace ecfmean
