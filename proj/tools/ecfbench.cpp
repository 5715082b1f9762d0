// Benchmark driver for the ECF mean estimator and its baselines.
//
//   ecfbench estimate  data.csv [--radius R | --eps E] [--delta D] [--norm l2]
//   ecfbench benchmark config.json [--out file] [--format csv|jsonl] [--jobs J]
//   ecfbench rates     config.json [--out file] [--format csv|jsonl] [--jobs J]
//   ecfbench verify    [--seed S]
//
// Exit status: 0 success, 1 invalid input or failed verification, 2 I/O error.

#include "ecfmean/baselines.hpp"
#include "ecfmean/ecf_core.hpp"
#include "ecfmean/experiment.hpp"
#include "ecfmean/refinement.hpp"
#include "ecfmean/theory_checks.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace ecfmean;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kIo = 2;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  bool deterministic = false;
  std::size_t jobs = 1;
};

// Writes through a file when --out is given, stdout otherwise.
template <typename F>
void with_output(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing: " + std::strerror(errno));
  write(out);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

ExperimentConfig load(const std::string& path, const Common& c) {
  ExperimentConfig cfg = load_config(path);
  if (c.seed) cfg.base_seed = *c.seed;
  return cfg;
}

int run_estimate(const std::string& data_path, bool header, std::optional<double> radius, std::optional<double> eps,
                 double delta, const std::string& norm_name, const std::string& estimator, const Common& c) {
  const SampleSet samples = read_dataset(data_path, header);
  const NormPair norm{norm_from_string(norm_name)};
  SolverConfigs solver;
  if (c.seed) solver.inner.seed = *c.seed;

  Vector mu;
  std::optional<double> objective;
  bool converged = true;
  std::optional<double> used_radius;
  if (estimator == "ecf") {
    double r = 0.0;
    if (radius) {
      r = *radius;
    } else if (eps) {
      r = choose_radius(*eps, delta, samples.n());
    } else {
      ExperimentConfig cfg;
      cfg.d = samples.d();
      cfg.delta = delta;
      cfg.norm = norm.primal;
      r = plugin_radius_inputs(cfg, samples, c.seed.value_or(0)).r;
    }
    const EstimateOutcome o = estimate_mean(samples, r, norm, solver.inner, solver.outer);
    mu = o.mu_hat;
    objective = o.objective_value;
    converged = o.converged;
    used_radius = r;
  } else if (estimator == "ecf_oblivious") {
    const ObliviousResult o = oblivious_estimate(samples, delta, norm, solver);
    mu = o.mu_hat;
    objective = o.eps0;
  } else if (estimator == "mean") {
    mu = empirical_mean(samples);
  } else if (estimator == "gmom") {
    mu = geometric_median_of_means(samples, default_block_count(samples.n(), delta), 1e-10, c.seed);
  } else {
    throw std::invalid_argument("estimate: unsupported estimator '" + estimator +
                                "' (expected ecf, ecf_oblivious, mean or gmom)");
  }

  with_output(c.out, [&](std::ostream& os) {
    if (format_from_string(c.format) == OutputFormat::Jsonl) {
      nlohmann::ordered_json j;
      j["estimator_id"] = estimator;
      j["mu_hat"] = std::vector<double>(mu.data(), mu.data() + mu.size());
      j["radius"] = used_radius ? nlohmann::json(*used_radius) : nlohmann::json(nullptr);
      j["objective_value"] = objective ? nlohmann::json(*objective) : nlohmann::json(nullptr);
      j["converged"] = converged;
      os << j.dump() << '\n';
    } else {
      os.precision(17);
      for (Eigen::Index k = 0; k < mu.size(); ++k) os << (k ? "," : "") << mu(k);
      os << '\n';
    }
  });
  return kOk;
}

int run_verify(const Common& c) {
  const std::uint64_t seed = c.seed.value_or(20240601);
  bool ok = true;
  const SuiteReport sin = sin_gap_suite(100000, seed);
  const SuiteReport conj = conjugate_suite(1000, seed);
  std::ostringstream report;
  for (const auto& rep : {sin, conj}) {
    report << rep.name << ": cases=" << rep.cases << " violations=" << rep.violations << " worst=" << rep.worst
           << (rep.passed ? " PASS" : " FAIL") << '\n';
    ok = ok && rep.passed;
  }
  // Exact and Monte Carlo Rademacher complexity on a small Gaussian sample.
  DistributionSpec gauss;
  const SampleSet small = sample(gauss, 10, 2, seed);
  const Vector zero = Vector::Zero(2);
  const RademacherEstimate exact = rademacher_complexity(small, zero, 0, seed, {}, RademacherMode::Exact);
  const RademacherEstimate mc = rademacher_complexity(small, zero, 20000, seed, {}, RademacherMode::MonteCarlo);
  const bool agree = std::abs(exact.value - mc.value) <= 3.0 * mc.std_error;
  report << "rademacher: exact=" << exact.value << " monte_carlo=" << mc.value << " se=" << mc.std_error
         << (agree ? " PASS" : " FAIL") << '\n';
  ok = ok && agree;
  with_output(c.out, [&](std::ostream& os) { os << report.str(); });
  return ok ? kOk : kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical characteristic function mean estimation benchmarks"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Override the base seed");
    sub->add_option("--out", common.out, "Output file (default: stdout)");
    sub->add_option("--format", common.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    sub->add_flag("--deterministic", common.deterministic, "Zero the runtime column");
    sub->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  std::string data_path;
  bool header = false;
  std::optional<double> radius;
  std::optional<double> eps;
  double delta = 0.1;
  std::string norm_name = "l2";
  std::string estimator = "ecf";
  auto* estimate = app.add_subcommand("estimate", "Estimate the mean of one dataset (CSV, n rows x d columns)");
  estimate->add_option("data", data_path, "Dataset CSV")->required();
  estimate->add_flag("--header", header, "Skip the first line");
  estimate->add_option("--radius", radius, "Dual-ball radius r")->check(CLI::PositiveNumber);
  estimate->add_option("--eps", eps, "Target accuracy; r = 22 log(1/delta) / (n eps)")->check(CLI::PositiveNumber);
  estimate->add_option("--delta", delta, "Failure probability")->check(CLI::Range(0.0, 1.0));
  estimate->add_option("--norm", norm_name, "l2, l1 or linf");
  estimate->add_option("--estimator", estimator, "ecf, ecf_oblivious, mean or gmom");
  add_common(estimate);

  std::string config_path;
  auto* bench = app.add_subcommand("benchmark", "Run a Monte Carlo experiment and emit one record per trial");
  bench->add_option("config", config_path, "Experiment config (JSON)")->required();
  add_common(bench);

  auto* rates = app.add_subcommand("rates", "Run an experiment over n_grid and emit the error-rate table");
  rates->add_option("config", config_path, "Experiment config (JSON)")->required();
  add_common(rates);

  auto* verify = app.add_subcommand("verify", "Run the randomized inequality suites");
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (estimate->parsed()) {
      return run_estimate(data_path, header, radius, eps, delta, norm_name, estimator, common);
    }
    const RunOptions run{common.jobs, common.deterministic};
    const OutputFormat format = format_from_string(common.format);
    if (bench->parsed()) {
      const auto records = run_experiment(load(config_path, common), run);
      with_output(common.out, [&](std::ostream& os) { emit(records, format, os); });
      return kOk;
    }
    if (rates->parsed()) {
      const auto rows = rate_sweep(load(config_path, common), run);
      with_output(common.out, [&](std::ostream& os) { emit_rates(rows, format, os); });
      return kOk;
    }
    if (verify->parsed()) return run_verify(common);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
