#include "ecfmean/experiment.hpp"

#include "ecfmean/baselines.hpp"
#include "ecfmean/seeding.hpp"
#include "ecfmean/theory_checks.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <map>
#include <functional>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace ecfmean {

using Json = nlohmann::json;

const std::vector<std::string>& known_estimators() {
  static const std::vector<std::string> ids{"catoni", "ecf", "ecf_oblivious", "ecf_refined",
                                            "gmom",   "mean", "mom",          "trimmed"};
  return ids;
}

void ExperimentConfig::validate() const {
  if (d < 1) throw ConfigError("config.d: must be >= 1");
  try {
    distribution.validate(d);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.distribution: ") + e.what());
  }
  if (adversary) {
    try {
      adversary->validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config.adversary: ") + e.what());
    }
  }
  if (n_grid.empty()) throw ConfigError("config.n_grid: must be nonempty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw ConfigError("config.n_grid[" + std::to_string(i) + "]: must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
      throw ConfigError("config.n_grid[" + std::to_string(i) + "]: must be strictly ascending");
    }
  }
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("config.delta: must lie in (0, 1)");
  if (trials < 1) throw ConfigError("config.trials: must be >= 1");
  if (estimators.empty()) throw ConfigError("config.estimators: must be nonempty");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < estimators.size(); ++i) {
    const auto& id = estimators[i];
    const std::string path = "config.estimators[" + std::to_string(i) + "]";
    if (std::find(known_estimators().begin(), known_estimators().end(), id) == known_estimators().end()) {
      throw ConfigError(path + ": unknown estimator '" + id + "'");
    }
    if (!seen.insert(id).second) throw ConfigError(path + ": duplicate estimator '" + id + "'");
  }
  if (seen.count("ecf_refined") && static_cast<double>(n_grid.front()) < 30.0 * std::log(1.0 / delta)) {
    throw ConfigError("config.n_grid: ecf_refined needs n >= 30 log(1/delta)");
  }
  if (cn_draws < 1) throw ConfigError("config.cn_draws: must be >= 1");
  if (!(refine_eps0_factor >= 1.0)) throw ConfigError("config.refine_eps0_factor: must be >= 1");
  try {
    solver.inner.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.solver.inner: ") + e.what());
  }
  try {
    solver.outer.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.solver.outer: ") + e.what());
  }
}

namespace {

// ---- config parsing ---------------------------------------------------------

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_ + ": " + msg); }
  std::string at(const std::string& key) const { return path_ + "." + key; }

  bool has(const std::string& key) const { return j_.contains(key); }
  const Json& raw(const std::string& key) const { return j_.at(key); }

  void only(std::initializer_list<const char*> keys) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
        throw ConfigError(at(it.key()) + ": unknown key");
      }
    }
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(at(key) + ": expected a number");
    return v.get<double>();
  }

  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError(at(key) + ": expected a nonnegative integer");
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
    return v.get<std::string>();
  }

 private:
  const Json& j_;
  std::string path_;
};

Vector parse_vector(const Json& v, const std::string& path, std::size_t d) {
  if (v.is_number()) return Vector::Constant(static_cast<Eigen::Index>(d), v.get<double>());
  if (!v.is_array()) throw ConfigError(path + ": expected a number or an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected a number");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  if (static_cast<std::size_t>(out.size()) != d) throw ConfigError(path + ": expected " + std::to_string(d) + " entries");
  return out;
}

Matrix parse_matrix(const Json& v, const std::string& path, std::size_t d) {
  if (v.is_number()) return v.get<double>() * Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  if (!v.is_array() || v.size() != d) throw ConfigError(path + ": expected a number or a d x d array");
  Matrix out(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    out.row(static_cast<Eigen::Index>(i)) = parse_vector(v[i], path + "[" + std::to_string(i) + "]", d).transpose();
  }
  return out;
}

DistributionSpec parse_distribution(const Json& j, const std::string& path, std::size_t d) {
  Reader r(j, path);
  r.only({"family", "param", "shift", "scale"});
  DistributionSpec dist;
  try {
    dist.family = family_from_string(r.string("family", "gaussian"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.at("family") + ": " + e.what());
  }
  dist.param = r.number("param", 0.0);
  if (r.has("shift")) dist.shift = parse_vector(r.raw("shift"), r.at("shift"), d);
  if (r.has("scale")) dist.scale = parse_matrix(r.raw("scale"), r.at("scale"), d);
  return dist;
}

AdversarySpec parse_adversary(const Json& j, const std::string& path, std::size_t d) {
  Reader r(j, path);
  r.only({"eta", "strategy", "magnitude", "direction", "factor"});
  AdversarySpec adv;
  adv.eta = r.number("eta", 0.0);
  const std::string name = r.string("strategy", "point_mass");
  Vector direction;
  if (r.has("direction")) direction = parse_vector(r.raw("direction"), r.at("direction"), d);
  if (name == "point_mass") {
    adv.strategy = PointMass{direction, r.number("magnitude", 1e6)};
  } else if (name == "scaled_copies") {
    adv.strategy = ScaledCopies{r.number("factor", 10.0)};
  } else if (name == "sign_flip") {
    adv.strategy = SignFlip{};
  } else if (name == "oracle_shift") {
    adv.strategy = OracleShift{r.number("magnitude", 1e6), direction};
  } else {
    throw ConfigError(r.at("strategy") + ": unknown strategy '" + name + "'");
  }
  return adv;
}

void parse_solver(const Json& j, const std::string& path, SolverConfigs& s) {
  Reader r(j, path);
  r.only({"inner", "outer"});
  if (r.has("inner")) {
    Reader in(r.raw("inner"), r.at("inner"));
    in.only({"grid_points", "random_starts", "screen_points", "ascent_max_steps", "ascent_tol", "top_k_refine",
             "max_evals", "seed"});
    s.inner.grid_points = in.unsigned_int("grid_points", s.inner.grid_points);
    s.inner.random_starts = in.unsigned_int("random_starts", s.inner.random_starts);
    s.inner.screen_points = in.unsigned_int("screen_points", s.inner.screen_points);
    s.inner.ascent_max_steps = in.unsigned_int("ascent_max_steps", s.inner.ascent_max_steps);
    s.inner.ascent_tol = in.number("ascent_tol", s.inner.ascent_tol);
    s.inner.top_k_refine = in.unsigned_int("top_k_refine", s.inner.top_k_refine);
    s.inner.max_evals = in.unsigned_int("max_evals", s.inner.max_evals);
    s.inner.seed = in.unsigned_int("seed", s.inner.seed);
  }
  if (r.has("outer")) {
    Reader out(r.raw("outer"), r.at("outer"));
    out.only({"max_cuts", "master_max_pivots", "tol_abs", "init"});
    s.outer.max_cuts = out.unsigned_int("max_cuts", s.outer.max_cuts);
    s.outer.master_max_pivots = out.unsigned_int("master_max_pivots", s.outer.master_max_pivots);
    s.outer.tol_abs = out.number("tol_abs", s.outer.tol_abs);
    const std::string init = out.string("init", "coordinate_median");
    if (init == "coordinate_median") {
      s.outer.init = InitKind::CoordinateMedian;
    } else if (init == "empirical_mean") {
      s.outer.init = InitKind::EmpiricalMean;
    } else if (init == "zero") {
      s.outer.init = InitKind::Zero;
    } else {
      throw ConfigError(out.at("init") + ": expected coordinate_median, empirical_mean or zero");
    }
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text.begin(), json_text.end());
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  Reader r(j, "config");
  r.only({"distribution", "adversary", "n_grid", "d", "delta", "trials", "base_seed", "estimators", "norm",
          "radius_mode", "cn_draws", "refine_eps0_factor", "solver"});
  ExperimentConfig cfg;
  cfg.d = r.unsigned_int("d", 1);
  if (cfg.d < 1) throw ConfigError("config.d: must be >= 1");
  if (!r.has("distribution")) throw ConfigError("config.distribution: required");
  cfg.distribution = parse_distribution(r.raw("distribution"), r.at("distribution"), cfg.d);
  if (r.has("adversary") && !r.raw("adversary").is_null()) {
    cfg.adversary = parse_adversary(r.raw("adversary"), r.at("adversary"), cfg.d);
  }
  if (!r.has("n_grid")) throw ConfigError("config.n_grid: required");
  const Json& grid = r.raw("n_grid");
  if (!grid.is_array()) throw ConfigError("config.n_grid: expected an array of integers");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid[i].is_number_unsigned()) {
      throw ConfigError("config.n_grid[" + std::to_string(i) + "]: expected a positive integer");
    }
    cfg.n_grid.push_back(grid[i].get<std::size_t>());
  }
  cfg.delta = r.number("delta", cfg.delta);
  cfg.trials = r.unsigned_int("trials", cfg.trials);
  cfg.base_seed = r.unsigned_int("base_seed", cfg.base_seed);
  if (r.has("estimators")) {
    const Json& est = r.raw("estimators");
    if (!est.is_array()) throw ConfigError("config.estimators: expected an array of strings");
    cfg.estimators.clear();
    for (std::size_t i = 0; i < est.size(); ++i) {
      if (!est[i].is_string()) throw ConfigError("config.estimators[" + std::to_string(i) + "]: expected a string");
      cfg.estimators.push_back(est[i].get<std::string>());
    }
  }
  try {
    cfg.norm = norm_from_string(r.string("norm", "l2"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.norm: ") + e.what());
  }
  const std::string mode = r.string("radius_mode", "oracle");
  if (mode == "oracle") {
    cfg.radius_mode = RadiusMode::Oracle;
  } else if (mode == "plugin") {
    cfg.radius_mode = RadiusMode::Plugin;
  } else {
    throw ConfigError("config.radius_mode: expected oracle or plugin");
  }
  cfg.cn_draws = r.unsigned_int("cn_draws", cfg.cn_draws);
  cfg.refine_eps0_factor = r.number("refine_eps0_factor", cfg.refine_eps0_factor);
  if (r.has("solver")) parse_solver(r.raw("solver"), r.at("solver"), cfg.solver);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "': " + std::strerror(errno));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---- radius inputs ----------------------------------------------------------

namespace {

double eta_of(const ExperimentConfig& cfg) { return cfg.adversary ? cfg.adversary->eta : 0.0; }

void finish_radius(RadiusInputs& in, double delta, std::size_t n) {
  in.eps_floor = accuracy_floor(in.Cn, in.sigma_op, delta, n, 0.0);
  if (in.eta > 0.0) {
    in.eps = accuracy_floor_contaminated(in.Cn, in.sigma_op, delta, n, in.mu_norm, in.eta);
    in.r = choose_radius_contaminated(in.eps, delta, n, in.eta);
  } else {
    in.eps = accuracy_floor(in.Cn, in.sigma_op, delta, n, in.mu_norm);
    in.r = choose_radius(in.eps, delta, n);
  }
}

}  // namespace

RadiusInputs oracle_radius_inputs(const ExperimentConfig& cfg, std::size_t n) {
  const NormPair norm{cfg.norm};
  const GroundTruth gt = ground_truth(cfg.distribution, cfg.d);
  RadiusInputs in;
  in.sigma_op = gt.cov_opnorm;
  in.mu_norm = norm.primal_norm(gt.mean);
  in.eta = eta_of(cfg);
  // One sign pattern per fresh sample: an unbiased draw of E||sum eps_i (X_i - mu*)|| / sqrt(n).
  const std::uint64_t base = derive_seed(cfg.base_seed, "cn", n);
  std::mt19937_64 signs(derive_seed(base, "signs"));
  double acc = 0.0;
  for (std::size_t j = 0; j < cfg.cn_draws; ++j) {
    const SampleSet s = sample(cfg.distribution, n, cfg.d, derive_seed(base, "draw", j));
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(cfg.d));
    for (std::size_t i = 0; i < n; ++i) {
      const Vector row = s.row(i).transpose() - gt.mean;
      if (signs() >> 63) sum += row; else sum -= row;
    }
    acc += norm.primal_norm(sum);
  }
  in.Cn = acc / static_cast<double>(cfg.cn_draws) / std::sqrt(static_cast<double>(n));
  finish_radius(in, cfg.delta, n);
  return in;
}

RadiusInputs plugin_radius_inputs(const ExperimentConfig& cfg, const SampleSet& samples, std::uint64_t seed) {
  const NormPair norm{cfg.norm};
  const Vector center = coordinate_median(samples);
  RadiusInputs in;
  in.mu_norm = norm.primal_norm(center);
  in.eta = eta_of(cfg);
  const Matrix c = samples.data().rowwise() - samples.mean().transpose();
  const double denom = std::max<double>(1.0, static_cast<double>(samples.n()) - 1.0);
  const Matrix cov = c.transpose() * c / denom;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  in.sigma_op = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  in.Cn = rademacher_complexity(samples, center, cfg.cn_draws, seed, norm, RademacherMode::MonteCarlo).value;
  finish_radius(in, cfg.delta, samples.n());
  return in;
}

// ---- experiment -------------------------------------------------------------

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t n, std::size_t trial) {
  return derive_seed(derive_seed(base_seed, "n", n), "trial", trial);
}

namespace {

SampleSet column(const SampleSet& s, Eigen::Index k) { return SampleSet::univariate(s.data().col(k)); }

Vector coordinatewise(const SampleSet& s, const std::function<double(const SampleSet&)>& f) {
  Vector out(static_cast<Eigen::Index>(s.d()));
  for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = f(column(s, k));
  return out;
}

struct EstimateResult {
  Vector mu;
  std::optional<double> objective;
  bool converged = true;
};

EstimateResult run_estimator(const std::string& id, const SampleSet& samples, const ExperimentConfig& cfg,
                             const RadiusInputs& radius, std::uint64_t seed) {
  const NormPair norm{cfg.norm};
  const std::size_t n = samples.n();
  const std::size_t k = default_block_count(n, cfg.delta);
  const std::uint64_t block_seed = derive_seed(seed, "blocks");
  EstimateResult res;
  if (id == "mean") {
    res.mu = empirical_mean(samples);
  } else if (id == "catoni") {
    res.mu = coordinatewise(samples, [&](const SampleSet& c) {
      CatoniConfig cc;
      cc.alpha = catoni_alpha(c, cfg.delta);
      return catoni(c, cc);
    });
  } else if (id == "mom") {
    res.mu = coordinatewise(samples, [&](const SampleSet& c) { return median_of_means(c, k, block_seed); });
  } else if (id == "gmom") {
    res.mu = geometric_median_of_means(samples, k, 1e-10, block_seed);
  } else if (id == "trimmed") {
    const double eta = eta_of(cfg);
    res.mu = coordinatewise(samples, [&](const SampleSet& c) { return trimmed_mean(c, eta, cfg.delta); });
  } else if (id == "ecf") {
    const EstimateOutcome o = estimate_mean(samples, radius.r, norm, cfg.solver.inner, cfg.solver.outer);
    res.mu = o.mu_hat;
    res.objective = o.objective_value;
    res.converged = o.converged;
  } else if (id == "ecf_refined") {
    RefinementSchedule sched;
    sched.eps_floor = radius.eps_floor;
    sched.eps0 = cfg.refine_eps0_factor * radius.eps_floor;
    sched.delta = cfg.delta;
    sched.n = n;
    sched.max_k = steps_to_floor(sched.eps0, sched.eps_floor);
    Vector mu = geometric_median_of_means(samples, k, 1e-10, block_seed);
    res.objective = std::nullopt;
    for (double eps : epsilon_schedule(sched)) {
      const SampleSet centered = samples.translated(-mu);
      const EstimateOutcome o =
          estimate_mean(centered, choose_radius(eps, cfg.delta, n), norm, cfg.solver.inner, cfg.solver.outer);
      mu += o.mu_hat;
      res.objective = o.objective_value;
      res.converged = res.converged && o.converged;
    }
    res.mu = mu;
  } else if (id == "ecf_oblivious") {
    const ObliviousResult o = oblivious_estimate(samples, cfg.delta, norm, cfg.solver);
    res.mu = o.mu_hat;
    if (!o.probes.empty()) {
      for (const auto& p : o.probes) {
        if (p.t == o.eps0) res.objective = p.min_value;
      }
    }
  } else {
    throw ConfigError("config.estimators: unknown estimator '" + id + "'");
  }
  return res;
}

std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, std::size_t n, std::size_t trial,
                                   const std::optional<RadiusInputs>& oracle, const std::vector<std::string>& ids,
                                   bool deterministic) {
  const std::uint64_t seed = trial_seed(cfg.base_seed, n, trial);
  const SampleSet clean = sample(cfg.distribution, n, cfg.d, seed);
  const GroundTruth gt = ground_truth(cfg.distribution, cfg.d);
  const NormPair norm{cfg.norm};
  SampleSet data = clean;
  if (cfg.adversary) data = contaminate(clean, *cfg.adversary, ContaminationContext{clean.mean()}, derive_seed(seed, "adversary"));
  const RadiusInputs radius = oracle ? *oracle : plugin_radius_inputs(cfg, data, derive_seed(seed, "plugin-cn"));

  std::vector<TrialRecord> out;
  for (const auto& id : ids) {
    const auto start = std::chrono::steady_clock::now();
    const EstimateResult est = run_estimator(id, data, cfg, radius, seed);
    const auto stop = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.trial_index = trial;
    rec.seed = seed;
    rec.n = n;
    rec.d = cfg.d;
    rec.eta = eta_of(cfg);
    rec.estimator_id = id;
    rec.error = norm.primal_norm(est.mu - gt.mean);
    rec.runtime_ms = deterministic ? 0.0 : std::chrono::duration<double, std::milli>(stop - start).count();
    rec.objective_value = est.objective;
    rec.converged = est.converged;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  std::vector<std::string> ids = cfg.estimators;
  std::sort(ids.begin(), ids.end());

  std::vector<std::optional<RadiusInputs>> oracle(cfg.n_grid.size());
  if (cfg.radius_mode == RadiusMode::Oracle) {
    for (std::size_t g = 0; g < cfg.n_grid.size(); ++g) oracle[g] = oracle_radius_inputs(cfg, cfg.n_grid[g]);
  }

  const std::size_t tasks = cfg.n_grid.size() * cfg.trials;
  std::vector<std::vector<TrialRecord>> slots(tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks) return;
      const std::size_t g = t / cfg.trials;
      try {
        slots[t] = run_trial(cfg, cfg.n_grid[g], t % cfg.trials, oracle[g], ids, opts.deterministic);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks);
        return;
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(opts.jobs, tasks));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<TrialRecord> out;
  out.reserve(tasks * ids.size());
  for (auto& s : slots) {
    for (auto& r : s) out.push_back(std::move(r));
  }
  return out;
}

// ---- output -----------------------------------------------------------------

const char* const kCsvHeader = "trial_index,seed,n,d,eta,estimator_id,error,runtime_ms,objective_value,converged";

OutputFormat format_from_string(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "jsonl") return OutputFormat::Jsonl;
  throw std::invalid_argument("unknown output format '" + std::string(name) + "' (expected csv or jsonl)");
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Json to_json(const TrialRecord& r) {
  nlohmann::ordered_json j;
  j["trial_index"] = r.trial_index;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["d"] = r.d;
  j["eta"] = r.eta;
  j["estimator_id"] = r.estimator_id;
  j["error"] = r.error;
  j["runtime_ms"] = r.runtime_ms;
  j["objective_value"] = r.objective_value ? Json(*r.objective_value) : Json(nullptr);
  j["converged"] = r.converged;
  return j;
}

// Splits one RFC-4180 record starting at pos; advances pos past the line break.
std::vector<std::string> split_csv_record(std::string_view text, std::size_t& pos) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  while (pos < text.size()) {
    const char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          cur += '"';
          pos += 2;
          continue;
        }
        quoted = false;
      } else {
        cur += c;
      }
      ++pos;
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\r' || c == '\n') {
      pos += (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ? 2 : 1;
      fields.push_back(std::move(cur));
      return fields;
    } else {
      cur += c;
    }
    ++pos;
  }
  if (quoted) throw std::invalid_argument("csv: unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

template <typename T>
T parse_number(const std::string& s, const char* field) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    if constexpr (std::is_floating_point_v<T>) {
      if (s == "nan") return std::numeric_limits<T>::quiet_NaN();
      if (s == "inf") return std::numeric_limits<T>::infinity();
      if (s == "-inf") return -std::numeric_limits<T>::infinity();
    }
    throw std::invalid_argument(std::string("csv: bad value '") + s + "' in column " + field);
  }
  return v;
}

}  // namespace

void emit(const std::vector<TrialRecord>& records, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::Jsonl) {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
    return;
  }
  out << kCsvHeader << "\r\n";
  for (const auto& r : records) {
    out << r.trial_index << ',' << r.seed << ',' << r.n << ',' << r.d << ',' << format_double(r.eta) << ','
        << csv_field(r.estimator_id) << ',' << format_double(r.error) << ',' << format_double(r.runtime_ms) << ','
        << (r.objective_value ? format_double(*r.objective_value) : std::string()) << ','
        << (r.converged ? "true" : "false") << "\r\n";
  }
}

void emit(const std::vector<TrialRecord>& records, OutputFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing: " + std::strerror(errno));
  emit(records, format, out);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed: " + std::strerror(errno));
}

std::vector<TrialRecord> parse_csv_records(std::string_view text) {
  std::size_t pos = 0;
  if (text.empty()) throw std::invalid_argument("csv: missing header");
  const auto header = split_csv_record(text, pos);
  std::string joined;
  for (std::size_t i = 0; i < header.size(); ++i) joined += (i ? "," : "") + header[i];
  if (joined != kCsvHeader) throw std::invalid_argument("csv: unexpected header '" + joined + "'");
  std::vector<TrialRecord> out;
  while (pos < text.size()) {
    const auto f = split_csv_record(text, pos);
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 10) throw std::invalid_argument("csv: expected 10 fields per record");
    TrialRecord r;
    r.trial_index = parse_number<std::size_t>(f[0], "trial_index");
    r.seed = parse_number<std::uint64_t>(f[1], "seed");
    r.n = parse_number<std::size_t>(f[2], "n");
    r.d = parse_number<std::size_t>(f[3], "d");
    r.eta = parse_number<double>(f[4], "eta");
    r.estimator_id = f[5];
    r.error = parse_number<double>(f[6], "error");
    r.runtime_ms = parse_number<double>(f[7], "runtime_ms");
    if (!f[8].empty()) r.objective_value = parse_number<double>(f[8], "objective_value");
    if (f[9] != "true" && f[9] != "false") throw std::invalid_argument("csv: converged must be true or false");
    r.converged = f[9] == "true";
    out.push_back(std::move(r));
  }
  return out;
}

// ---- rates ------------------------------------------------------------------

double fit_loglog_slope(const std::vector<double>& ns, const std::vector<double>& values) {
  if (ns.size() != values.size()) throw RateFitError("rate fit: size mismatch");
  std::set<double> distinct(ns.begin(), ns.end());
  if (distinct.size() < 3) throw RateFitError("rate fit: need at least 3 distinct sample sizes");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(ns[i] > 0.0) || !(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw RateFitError("rate fit: sample sizes and errors must be positive and finite");
    }
    x.push_back(std::log(ns[i]));
    y.push_back(std::log(values[i]));
  }
  const double m = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

namespace {

// Linear interpolation between order statistics (the common "type 7" rule).
double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

std::vector<RateRow> summarize_rates(const std::vector<TrialRecord>& records) {
  std::map<std::string, std::map<std::size_t, std::vector<double>>> groups;
  for (const auto& r : records) groups[r.estimator_id][r.n].push_back(r.error);
  std::vector<RateRow> rows;
  for (const auto& [id, by_n] : groups) {
    std::vector<double> ns, med;
    const std::size_t first = rows.size();
    for (const auto& [n, errs] : by_n) {
      RateRow row;
      row.estimator_id = id;
      row.n = n;
      row.trials = errs.size();
      row.median_error = quantile(errs, 0.5);
      row.q95_error = quantile(errs, 0.95);
      ns.push_back(static_cast<double>(n));
      med.push_back(row.median_error);
      rows.push_back(row);
    }
    const double slope = fit_loglog_slope(ns, med);
    for (std::size_t i = first; i < rows.size(); ++i) rows[i].slope = slope;
  }
  return rows;
}

std::vector<RateRow> rate_sweep(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (cfg.n_grid.size() < 3) throw RateFitError("rate sweep: n_grid needs at least 3 sample sizes");
  return summarize_rates(run_experiment(cfg, opts));
}

void emit_rates(const std::vector<RateRow>& rows, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::Jsonl) {
    for (const auto& r : rows) {
      nlohmann::ordered_json j;
      j["estimator_id"] = r.estimator_id;
      j["n"] = r.n;
      j["trials"] = r.trials;
      j["median_error"] = r.median_error;
      j["q95_error"] = r.q95_error;
      j["slope"] = r.slope;
      out << j.dump() << '\n';
    }
    return;
  }
  out << "estimator_id,n,trials,median_error,q95_error,slope\r\n";
  for (const auto& r : rows) {
    out << csv_field(r.estimator_id) << ',' << r.n << ',' << r.trials << ',' << format_double(r.median_error) << ','
        << format_double(r.q95_error) << ',' << format_double(r.slope) << "\r\n";
  }
}

SampleSet read_dataset(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path + "': " + std::strerror(errno));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header && lineno == 1) continue;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    for (const auto& field : split_csv_record(line, pos)) {
      const auto b = field.find_first_not_of(" \t");
      const auto e = field.find_last_not_of(" \t");
      const std::string f = b == std::string::npos ? std::string() : field.substr(b, e - b + 1);
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || res.ec != std::errc{} || res.ptr != f.data() + f.size()) {
        throw std::invalid_argument("dataset line " + std::to_string(lineno) + ": '" + f + "' is not a number");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("dataset line " + std::to_string(lineno) + ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read from '" + path + "' failed");
  if (rows.empty()) throw std::invalid_argument("dataset '" + path + "' has no rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return SampleSet(std::move(m));
}

}  // namespace ecfmean
