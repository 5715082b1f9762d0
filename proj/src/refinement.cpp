#include "ecfmean/refinement.hpp"

#include <algorithm>
#include <cmath>

namespace ecfmean {

namespace {

const double kDecay = std::pow(0.9, 2.0 / 3.0);
constexpr double kRelativeProbeTol = 1e-6;

void require_delta(double delta, const char* who) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument(std::string(who) + ": delta must lie in (0, 1)");
}

}  // namespace

bool RefinementSchedule::valid() const {
  if (!(eps0 > 0.0) || !(eps_floor > 0.0) || !(delta > 0.0 && delta < 1.0) || n == 0) return false;
  return static_cast<double>(n) >= 30.0 * std::log(1.0 / delta);
}

void RefinementSchedule::validate() const {
  if (!(eps0 > 0.0) || !std::isfinite(eps0)) throw ScheduleError("RefinementSchedule: eps0 must be positive");
  if (!(eps_floor > 0.0) || !std::isfinite(eps_floor)) {
    throw ScheduleError("RefinementSchedule: eps_floor must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw ScheduleError("RefinementSchedule: delta must lie in (0, 1)");
  if (!valid()) throw ScheduleError("RefinementSchedule: need n >= 30 log(1/delta)");
}

std::vector<double> epsilon_schedule(const RefinementSchedule& schedule) {
  schedule.validate();
  std::vector<double> out;
  out.reserve(schedule.max_k);
  double eps = schedule.eps0;
  for (std::size_t k = 0; k < schedule.max_k; ++k) {
    eps = std::max(schedule.eps_floor, kDecay * eps);
    out.push_back(eps);
  }
  return out;
}

std::size_t steps_to_floor(double eps0, double eps_floor) {
  if (!(eps0 > 0.0) || !(eps_floor > 0.0)) throw std::invalid_argument("steps_to_floor: accuracies must be positive");
  if (eps_floor >= eps0) return 0;
  return static_cast<std::size_t>(std::ceil(std::log(eps0 / eps_floor) / ((2.0 / 3.0) * std::log(10.0 / 9.0))));
}

Vector refine_step(const SampleSet& samples, const Vector& prev_mu, double r_k, const NormPair& norm,
                   const SolverConfigs& cfgs) {
  if (!(r_k > 0.0)) throw std::invalid_argument("refine_step: r_k must be > 0");
  const SampleSet centered = samples.translated(-prev_mu);
  return prev_mu + estimate_mean(centered, r_k, norm, cfgs.inner, cfgs.outer).mu_hat;
}

std::vector<Vector> refine(const SampleSet& samples, const Vector& mu0, const RefinementSchedule& schedule,
                           const NormPair& norm, const SolverConfigs& cfgs) {
  if (schedule.n != samples.n()) throw std::invalid_argument("refine: schedule.n must equal the sample count");
  if (static_cast<std::size_t>(mu0.size()) != samples.d()) throw std::invalid_argument("refine: mu0 has wrong dimension");
  std::vector<Vector> traj{mu0};
  for (double eps : epsilon_schedule(schedule)) {
    const double r = choose_radius(eps, schedule.delta, schedule.n);
    traj.push_back(refine_step(samples, traj.back(), r, norm, cfgs));
  }
  return traj;
}

SublevelProbe sublevel_nonempty(const SampleSet& samples, double t, double delta, const NormPair& norm,
                                const SolverConfigs& cfgs, bool early_exit) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("sublevel_nonempty: t must be positive");
  require_delta(delta, "sublevel_nonempty");
  const double r = choose_radius(t, delta, samples.n());
  // g_t = (2 / t) F_r with F_r the r-normalized objective, so g_t <= 1 iff F_r <= t / 2.
  const double scale = 2.0 / t;
  std::optional<DecisionThreshold> decision;
  if (early_exit) decision = DecisionThreshold{t / 2.0};
  // The objective scales like t, so an absolute tolerance would turn into an
  // unbounded slack on g_t for small t.
  OuterSolverConfig outer = cfgs.outer;
  outer.tol_abs = std::min(outer.tol_abs, kRelativeProbeTol * t / 2.0);
  const EstimateOutcome est = estimate_mean(samples, r, norm, cfgs.inner, outer, decision);

  SublevelProbe probe;
  probe.t = t;
  probe.witness_mu = est.mu_hat;
  const double slack = scale * outer.tol_abs;
  if (early_exit && est.lower_bound > t / 2.0) {
    probe.early_exit = true;
    probe.min_value = scale * est.lower_bound;
    probe.nonempty = false;
  } else {
    probe.min_value = scale * est.objective_value;
    probe.nonempty = probe.min_value <= 1.0 + slack;
  }
  return probe;
}

std::pair<double, double> default_t_bounds(const SampleSet& samples, const NormPair& norm) {
  double scale = 0.0;
  for (std::size_t i = 0; i < samples.n(); ++i) scale = std::max(scale, norm.primal_norm(samples.row(i).transpose()));
  if (!(scale > 0.0)) scale = 1.0;
  return {1e-8 * scale, 2.0 * scale};
}

ObliviousResult oblivious_estimate(const SampleSet& samples, double delta, const NormPair& norm,
                                   const SolverConfigs& cfgs, std::optional<std::pair<double, double>> t_bounds,
                                   std::size_t max_iter) {
  require_delta(delta, "oblivious_estimate");
  const auto [t_lo, t_hi] = t_bounds ? *t_bounds : default_t_bounds(samples, norm);
  if (!(t_lo > 0.0) || !(t_lo < t_hi)) throw std::invalid_argument("oblivious_estimate: need 0 < t_lo < t_hi");
  const auto d = static_cast<Eigen::Index>(samples.d());
  const double n = static_cast<double>(samples.n());
  const double log_term = std::log(1.0 / delta);

  ObliviousResult out;
  // Scenario one: 0 lies in every probed sublevel set. Im ecf is odd, so the
  // signed sup at mu = 0 is the sup of |Im ecf|.
  const double r_lo = choose_radius(t_lo, delta, samples.n());
  const InnerResult at_zero = inner_sup(Vector::Zero(d), samples, r_lo, norm, cfgs.inner);
  const double sup_im = at_zero.certified ? at_zero.upper_bound : at_zero.value;
  if (sup_im <= 11.0 * log_term / n) {
    out.mu_hat = Vector::Zero(d);
    out.eps0 = t_lo;
    out.scenario_one = true;
    out.scenario_one_approximate = true;
    return out;
  }

  SublevelProbe hi = sublevel_nonempty(samples, t_hi, delta, norm, cfgs, true);
  out.probes.push_back(hi);
  if (!hi.nonempty) throw SearchBoundsError("oblivious_estimate: sublevel set at t_hi is empty; raise t_hi");
  SublevelProbe lo = sublevel_nonempty(samples, t_lo, delta, norm, cfgs, true);
  out.probes.push_back(lo);
  if (lo.nonempty) {
    out.mu_hat = lo.witness_mu;
    out.eps0 = t_lo;
    return out;
  }

  double a = t_lo;
  double b = t_hi;
  for (std::size_t it = 0; it < max_iter && b / a > 2.0; ++it) {
    const double mid = std::sqrt(a * b);
    SublevelProbe p = sublevel_nonempty(samples, mid, delta, norm, cfgs, true);
    out.probes.push_back(p);
    if (p.nonempty) {
      b = mid;
      hi = p;
    } else {
      a = mid;
    }
  }
  out.mu_hat = hi.witness_mu;
  out.eps0 = b;
  return out;
}

}  // namespace ecfmean
