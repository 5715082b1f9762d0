#pragma once

#include "ecfmean/norms.hpp"
#include "ecfmean/sample_set.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ecfmean {

/// A dual vector w constrained to the dual ball of the given radius.
struct DualVector {
  Vector w;
  double radius = 1.0;
};

struct InnerSolverConfig {
  std::size_t grid_points = 9;       // initial 1-D grid before branch and bound
  std::size_t random_starts = 8;     // random dual directions (d > 1)
  std::size_t screen_points = 4096;  // cap on the random screen of the dual ball (d > 1)
  std::size_t ascent_max_steps = 300;
  double ascent_tol = 1e-10;         // on the r-normalized objective
  std::size_t top_k_refine = 3;      // extra cut directions returned per solve
  std::size_t max_evals = 20000;     // 1-D branch-and-bound evaluation budget
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;

  void validate() const;
};

enum class InitKind { CoordinateMedian, EmpiricalMean, Zero, Given };

struct OuterSolverConfig {
  std::size_t max_cuts = 200;            // cutting-plane iterations
  std::size_t master_max_pivots = 20000; // simplex pivot cap per master solve
  double tol_abs = 1e-8;                 // gap on the r-normalized objective
  InitKind init = InitKind::CoordinateMedian;
  Vector init_point;                     // used when init == Given

  void validate() const;
};

struct InnerResult {
  double value = 0.0;  // sup over the explored dual ball of |<w, mu> - Im ecf(w)|
  DualVector w_star;
  double upper_bound = 0.0;  // certified upper bound on the true sup when `certified`
  bool certified = false;
  std::size_t evaluations = 0;
  /// High-value directions u on the unit dual ball (w = r u), best first,
  /// each paired with r^{-1} Im ecf(r u).
  std::vector<std::pair<Vector, double>> directions;
};

struct EstimateOutcome {
  Vector mu_hat;
  double objective_value = 0.0;  // r^{-1} sup deviation at mu_hat
  DualVector attaining_w;
  std::size_t cuts_used = 0;
  bool converged = false;

  // Diagnostics.
  double lower_bound = 0.0;      // cutting-plane model minimum
  double objective_upper = 0.0;  // certified in d = 1
  std::size_t iterations = 0;
  bool certified = false;        // every inner solve at mu_hat was certified
  bool nonunique_hint = false;   // the master program had a degenerate optimum
};

/// Early exit for threshold questions "is min objective <= level?".
struct DecisionThreshold {
  double level = 0.0;
};

/// Empirical characteristic function at w: ((1/n) sum cos<w,X_i>, (1/n) sum sin<w,X_i>).
std::complex<double> ecf(const SampleSet& samples, const Vector& w);

/// sup over ||w||_* <= r of |<w, mu> - Im ecf(w)|, with the maximizing w.
///
/// In d = 1 the sup is computed by branch and bound and certified to within
/// r * ascent_tol. For d > 1 the result is the best of a multi-start
/// projected gradient ascent, seeded from the best points of a random screen
/// of the ball, and carries no certificate. `warm_starts` are
/// extra unit-ball directions to start from; `stream` decorrelates the
/// random starts of successive calls.
InnerResult inner_sup(const Vector& mu, const SampleSet& samples, double r, const NormPair& norm,
                      const InnerSolverConfig& cfg, const std::vector<Vector>& warm_starts = {},
                      std::uint64_t stream = 0);

/// r^{-1} * inner_sup(...).value.
double objective(const Vector& mu, const SampleSet& samples, double r, const NormPair& norm,
                 const InnerSolverConfig& cfg);

/// The empirical-characteristic-function mean estimate for radius r.
///
/// Cutting-plane minimization of the convex objective: every inner solve
/// contributes supporting cuts and the master problem over the cut set is
/// solved exactly. Stops when the certified objective at the incumbent is
/// within tol_abs of the model lower bound; non-convergence is reported in
/// the outcome rather than thrown.
EstimateOutcome estimate_mean(const SampleSet& samples, double r, const NormPair& norm,
                              const InnerSolverConfig& inner, const OuterSolverConfig& outer,
                              std::optional<DecisionThreshold> decision = std::nullopt);

/// 22 log(1/delta) / (n eps).
double choose_radius(double eps, double delta, std::size_t n);

/// 16 eta / eps + 22 log(1/delta) / (n eps).
double choose_radius_contaminated(double eps, double delta, std::size_t n, double eta);

/// Coordinate-wise median (midpoint of the central order statistics).
Vector coordinate_median(const SampleSet& samples);

}  // namespace ecfmean
