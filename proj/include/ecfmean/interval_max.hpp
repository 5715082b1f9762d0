#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace ecfmean {

/// Value of a univariate function at one point, plus up to three
/// component values the bounding rule may use.
struct Probe1d {
  double x = 0.0;
  double value = 0.0;
  std::array<double, 3> parts{};
};

struct Max1dOptions {
  std::size_t initial_points = 9;
  double tol = 1e-10;
  std::size_t max_evals = 20000;
  std::optional<double> stop_above;
  std::size_t keep_top = 1;
};

struct Max1dResult {
  Probe1d best;
  double upper_bound = 0.0;  // certified when `certified` is true
  bool certified = false;
  bool stopped_above = false;
  std::size_t evaluations = 0;
  std::vector<Probe1d> top;  // well-separated high points, best first
};

using Probe1dFn = std::function<Probe1d(double)>;
/// Upper bound on the function over [a.x, b.x] given both endpoint probes.
using Bound1dFn = std::function<double(const Probe1d&, const Probe1d&)>;

/// Best-first branch and bound for max of a function on [lo, hi].
///
/// Stops with a certificate once no open interval can beat the incumbent by
/// more than `tol`; otherwise stops at `max_evals` or as soon as the incumbent
/// exceeds `stop_above`.
Max1dResult certified_max_1d(double lo, double hi, const Probe1dFn& probe, const Bound1dFn& bound,
                             const Max1dOptions& opts);

/// Max over s in [0, h] of the chord from fa to fb plus K s (h - s) / 2;
/// bounds any function with f'' >= -K on an interval of length h.
double curvature_cap(double fa, double fb, double h, double curvature);

/// (fa + fb) / 2 + L h / 2; bounds any L-Lipschitz function on the interval.
double lipschitz_cap(double fa, double fb, double h, double lipschitz);

/// Max of sin over the closed interval [lo, hi].
double sin_max_on(double lo, double hi);

}  // namespace ecfmean
