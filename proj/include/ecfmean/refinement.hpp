#pragma once

#include "ecfmean/ecf_core.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ecfmean {

class ScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SearchBoundsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfigs {
  InnerSolverConfig inner;
  OuterSolverConfig outer;
};

/// Geometric accuracy schedule eps_k = max(eps_floor, (9/10)^{2/3} eps_{k-1}).
struct RefinementSchedule {
  double eps0 = 1.0;
  double eps_floor = 1.0;
  double delta = 0.1;
  std::size_t n = 0;
  std::size_t max_k = 0;

  /// n >= 30 log(1/delta) and positive accuracies.
  bool valid() const;
  void validate() const;
};

/// (eps_1, ..., eps_{max_k}).
std::vector<double> epsilon_schedule(const RefinementSchedule& schedule);

/// Number of schedule steps after which eps_k has reached eps_floor.
std::size_t steps_to_floor(double eps0, double eps_floor);

/// prev_mu + estimate_mean(samples - prev_mu, r_k).
Vector refine_step(const SampleSet& samples, const Vector& prev_mu, double r_k, const NormPair& norm,
                   const SolverConfigs& cfgs);

/// Trajectory (mu0, mu1, ..., mu_{max_k}) of re-centered estimates.
std::vector<Vector> refine(const SampleSet& samples, const Vector& mu0, const RefinementSchedule& schedule,
                           const NormPair& norm, const SolverConfigs& cfgs);

struct SublevelProbe {
  double t = 0.0;
  double min_value = 0.0;  // g_t at the witness (an upper bound on min g_t)
  Vector witness_mu;
  bool nonempty = false;
  /// When probed with early exit and found empty, min_value is a certified
  /// lower bound on min g_t rather than a value at the witness.
  bool early_exit = false;
};

/// Minimizes g_t(mu) = n / (11 log(1/delta)) sup_{||w||_* <= r_t} |<w, mu> - Im ecf(w)|
/// with r_t = 22 log(1/delta) / (n t); M_t is reported nonempty iff
/// min g_t <= 1 + tol, tol = min(2 tol_abs / t, 1e-6).
///
/// With `early_exit` the cutting-plane loop stops as soon as the answer to
/// "min g_t <= 1?" is settled.
SublevelProbe sublevel_nonempty(const SampleSet& samples, double t, double delta, const NormPair& norm,
                                const SolverConfigs& cfgs, bool early_exit = false);

struct ObliviousResult {
  Vector mu_hat;
  double eps0 = 0.0;
  bool scenario_one = false;
  /// Scenario one was decided on the largest probed ball only.
  bool scenario_one_approximate = false;
  std::vector<SublevelProbe> probes;
};

/// (1e-8 * scale, 2 * scale) with scale = max_i ||X_i|| (1 for all-zero data).
std::pair<double, double> default_t_bounds(const SampleSet& samples, const NormPair& norm);

/// Accuracy-free estimate: bisection over log t for the smallest nonempty
/// sublevel set, to within a factor 2, returning one of its points.
///
/// Returns (0, t_lo) when the sup of Im ecf over the largest probed ball
/// (radius r_{t_lo}) is at most 11 log(1/delta) / n.
ObliviousResult oblivious_estimate(const SampleSet& samples, double delta, const NormPair& norm,
                                   const SolverConfigs& cfgs,
                                   std::optional<std::pair<double, double>> t_bounds = std::nullopt,
                                   std::size_t max_iter = 40);

}  // namespace ecfmean
