#include "ecfmean/refinement.hpp"
#include "ecfmean/simulation.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace ecfmean;

namespace {

RefinementSchedule sched(double eps0, double floor, std::size_t k, std::size_t n = 1000, double delta = 0.1) {
  RefinementSchedule s;
  s.eps0 = eps0;
  s.eps_floor = floor;
  s.delta = delta;
  s.n = n;
  s.max_k = k;
  return s;
}

}  // namespace

TEST_CASE("epsilon schedule") {
  const auto e = epsilon_schedule(sched(10.0, 1.0, 40));
  CHECK(e.front() == doctest::Approx(9.321698).epsilon(1e-6));
  for (std::size_t k = 1; k < e.size(); ++k) {
    CHECK(e[k] <= e[k - 1]);
    CHECK(e[k] == doctest::Approx(std::max(1.0, std::pow(0.9, 2.0 / 3.0) * e[k - 1])));
  }
  const std::size_t k = steps_to_floor(10.0, 1.0);
  CHECK(k == static_cast<std::size_t>(std::ceil(std::log(10.0) / ((2.0 / 3.0) * std::log(10.0 / 9.0)))));
  CHECK(e[k - 1] == 1.0);
  CHECK(e[k - 2] > 1.0);

  for (double v : epsilon_schedule(sched(1.0, 2.0, 5))) CHECK(v == 2.0);
  CHECK(epsilon_schedule(sched(3.0, 1.0, 0)).empty());
}

TEST_CASE("schedule validity needs n >= 30 log(1/delta)") {
  CHECK(sched(2.0, 1.0, 3, 70, 0.1).valid());
  CHECK_FALSE(sched(2.0, 1.0, 3, 69, 0.1).valid());
  CHECK_THROWS_AS(epsilon_schedule(sched(2.0, 1.0, 3, 10, 0.1)), ScheduleError);
}

TEST_CASE("refine_step identities") {
  SolverConfigs cfg;
  DistributionSpec dist{Family::StudentT, 3.0, {}, {}};
  const SampleSet s = sample(dist, 200, 1, 4);
  const double r = 0.3;
  const Vector zero = Vector::Zero(1);
  CHECK(refine_step(s, zero, r, NormPair{}, cfg) == estimate_mean(s, r, NormPair{}, cfg.inner, cfg.outer).mu_hat);

  const SampleSet constant(Matrix::Constant(9, 1, 2.75));
  CHECK(refine_step(constant, Vector::Constant(1, 2.75), 1.0, NormPair{}, cfg)(0) == 2.75);

  const Vector prev = Vector::Constant(1, 0.4);
  const Vector v = Vector::Constant(1, 17.0);
  const Vector a = refine_step(s, prev, r, NormPair{}, cfg);
  const Vector b = refine_step(s.translated(v), prev + v, r, NormPair{}, cfg);
  CHECK(b(0) - v(0) == doctest::Approx(a(0)).epsilon(1e-9));
  CHECK_THROWS_AS(refine_step(s, prev, 0.0, NormPair{}, cfg), std::invalid_argument);
}

TEST_CASE("refine trajectories") {
  SolverConfigs cfg;
  DistributionSpec dist;
  const SampleSet s = sample(dist, 400, 1, 21);
  const Vector mu0 = Vector::Constant(1, 0.8);

  auto traj = refine(s, mu0, sched(2.0, 0.5, 0, 400), NormPair{}, cfg);
  REQUIRE(traj.size() == 1);
  CHECK(traj[0] == mu0);

  const RefinementSchedule plan = sched(2.0, 0.5, steps_to_floor(2.0, 0.5), 400);
  traj = refine(s, mu0, plan, NormPair{}, cfg);
  CHECK(traj.size() == plan.max_k + 1);
  const Vector v = Vector::Constant(1, -250.0);
  const auto shifted = refine(s.translated(v), mu0 + v, plan, NormPair{}, cfg);
  for (std::size_t k = 0; k < traj.size(); ++k) CHECK(shifted[k](0) - v(0) == doctest::Approx(traj[k](0)).epsilon(1e-9));
  CHECK_THROWS_AS(refine(s, mu0, sched(2.0, 0.5, 1, 399), NormPair{}, cfg), std::invalid_argument);
}

TEST_CASE("sublevel probes") {
  SolverConfigs cfg;
  const SampleSet zeros(Matrix::Zero(30, 1));
  for (double t : {1e-3, 1.0, 50.0}) {
    const SublevelProbe p = sublevel_nonempty(zeros, t, 0.1, NormPair{}, cfg);
    CHECK(p.min_value == doctest::Approx(0.0));
    CHECK(p.nonempty);
  }

  DistributionSpec dist;
  const SampleSet s = sample(dist, 500, 1, 77);
  double prev = 1e300;
  for (double t : {1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 1.0}) {
    const SublevelProbe p = sublevel_nonempty(s, t, 0.1, NormPair{}, cfg);
    CHECK(p.min_value <= prev + 1e-6);  // g_t decreases in t
    prev = p.min_value;

    // Grid oracle for min g_t: w grid fine enough for the quadratic error at
    // interior maxima, mu grid with Lipschitz error (2/t)(t/800).
    const double r = choose_radius(t, 0.1, 500);
    const double scale = 500.0 / (11.0 * std::log(10.0));
    const int wn = std::max(4000, static_cast<int>(r * 400.0));
    std::vector<double> ws(wn + 1), im(wn + 1);
    for (int j = 0; j <= wn; ++j) {
      ws[j] = r * j / wn;
      im[j] = ecf(s, Vector::Constant(1, ws[j])).imag();
    }
    double best = 1e300;
    const double c = p.witness_mu(0);
    for (int i = -200; i <= 200; ++i) {
      const double mu = c + t * i / 400.0;
      double sup = 0.0;
      for (int j = 0; j <= wn; ++j) sup = std::max(sup, std::abs(ws[j] * mu - im[j]));
      best = std::min(best, scale * sup);
    }
    CHECK(std::abs(p.min_value - best) <= 5e-3);
  }
}

TEST_CASE("oblivious estimate: all-zero samples fall in scenario one") {
  SolverConfigs cfg;
  const SampleSet zeros(Matrix::Zero(40, 2));
  const ObliviousResult o = oblivious_estimate(zeros, 0.1, NormPair{}, cfg);
  CHECK(o.scenario_one);
  CHECK(o.scenario_one_approximate);
  CHECK(o.mu_hat.norm() == 0.0);
  CHECK(o.eps0 == default_t_bounds(zeros, NormPair{}).first);
}

TEST_CASE("oblivious estimate brackets the smallest nonempty sublevel set") {
  SolverConfigs cfg;
  DistributionSpec dist;
  const SampleSet s = sample(dist, 300, 1, 5);
  const ObliviousResult o = oblivious_estimate(s, 0.1, NormPair{}, cfg);
  REQUIRE_FALSE(o.scenario_one);
  const SublevelProbe at = sublevel_nonempty(s, o.eps0, 0.1, NormPair{}, cfg);
  const SublevelProbe half = sublevel_nonempty(s, o.eps0 / 2.0, 0.1, NormPair{}, cfg);
  CHECK(at.nonempty);
  CHECK_FALSE(half.nonempty);
  // Diameter of M_t is at most t: an independent minimization from another
  // start lands within eps0 of the witness.
  SolverConfigs other = cfg;
  other.outer.init = InitKind::Given;
  other.outer.init_point = Vector::Constant(1, 3.0);
  const SublevelProbe again = sublevel_nonempty(s, o.eps0, 0.1, NormPair{}, other);
  REQUIRE(again.nonempty);
  CHECK((again.witness_mu - o.mu_hat).norm() <= o.eps0 + 4.0 * cfg.outer.tol_abs);
}

TEST_CASE("oblivious estimate rejects bad bounds") {
  SolverConfigs cfg;
  DistributionSpec dist;
  const SampleSet s = sample(dist, 100, 1, 6);
  CHECK_THROWS_AS(oblivious_estimate(s, 0.1, NormPair{}, cfg, std::make_pair(1.0, 0.5)), std::invalid_argument);
  CHECK_THROWS_AS(oblivious_estimate(s, 0.1, NormPair{}, cfg, std::make_pair(1e-9, 1e-6)), SearchBoundsError);
}
