#include "ecfmean/interval_max.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace ecfmean {

double curvature_cap(double fa, double fb, double h, double curvature) {
  if (h <= 0.0) return std::max(fa, fb);
  if (curvature <= 0.0) return std::max(fa, fb);
  const double kh2 = curvature * h * h;
  // f(s) = fa + t (fb - fa) + kh2 t (1 - t) / 2 with t = s / h.
  const double t = std::clamp(0.5 + (fb - fa) / kh2, 0.0, 1.0);
  return fa + t * (fb - fa) + 0.5 * kh2 * t * (1.0 - t);
}

double lipschitz_cap(double fa, double fb, double h, double lipschitz) {
  return 0.5 * (fa + fb) + 0.5 * lipschitz * h;
}

double sin_max_on(double lo, double hi) {
  if (hi < lo) std::swap(lo, hi);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (hi - lo >= two_pi) return 1.0;
  // Peaks sit at pi/2 + 2 pi k; check whether one falls inside.
  const double k = std::ceil((lo - std::numbers::pi / 2) / two_pi);
  if (std::numbers::pi / 2 + two_pi * k <= hi) return 1.0;
  return std::max(std::sin(lo), std::sin(hi));
}

namespace {

struct OpenInterval {
  Probe1d a;
  Probe1d b;
  double ub;
  bool operator<(const OpenInterval& other) const { return ub < other.ub; }
};

std::vector<Probe1d> pick_top(std::vector<Probe1d> points, std::size_t keep, double min_gap) {
  std::sort(points.begin(), points.end(), [](const Probe1d& l, const Probe1d& r) { return l.value > r.value; });
  std::vector<Probe1d> out;
  for (const auto& p : points) {
    if (out.size() >= keep) break;
    const bool separated =
        std::all_of(out.begin(), out.end(), [&](const Probe1d& q) { return std::abs(q.x - p.x) > min_gap; });
    if (separated) out.push_back(p);
  }
  return out;
}

}  // namespace

Max1dResult certified_max_1d(double lo, double hi, const Probe1dFn& probe, const Bound1dFn& bound,
                             const Max1dOptions& opts) {
  if (!(hi > lo)) throw std::invalid_argument("certified_max_1d: need lo < hi");
  if (opts.initial_points < 2) throw std::invalid_argument("certified_max_1d: need >= 2 initial points");

  Max1dResult res;
  std::vector<Probe1d> seen;
  auto evaluate = [&](double x) {
    Probe1d p = probe(x);
    p.x = x;
    ++res.evaluations;
    if (seen.empty() || p.value > res.best.value) res.best = p;
    seen.push_back(p);
    return p;
  };

  std::vector<Probe1d> grid;
  const std::size_t m = opts.initial_points;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = (i + 1 == m) ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
    grid.push_back(evaluate(x));
  }
  std::priority_queue<OpenInterval> open;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    open.push({grid[i], grid[i + 1], bound(grid[i], grid[i + 1])});
  }

  const double min_width = 1e-14 * (hi - lo);
  double pending_ub = res.best.value;
  while (!open.empty()) {
    if (opts.stop_above && res.best.value > *opts.stop_above) {
      res.stopped_above = true;
      break;
    }
    const OpenInterval top = open.top();
    if (top.ub <= res.best.value + opts.tol) {
      res.certified = true;
      break;
    }
    if (res.evaluations >= opts.max_evals) break;
    open.pop();
    if (top.b.x - top.a.x <= min_width) {
      pending_ub = std::max(pending_ub, std::max(top.a.value, top.b.value));
      continue;
    }
    const Probe1d mid = evaluate(0.5 * (top.a.x + top.b.x));
    open.push({top.a, mid, bound(top.a, mid)});
    open.push({mid, top.b, bound(mid, top.b)});
  }
  if (open.empty()) res.certified = true;
  res.upper_bound = std::max(pending_ub, res.best.value);
  if (!open.empty()) res.upper_bound = std::max(res.upper_bound, open.top().ub);
  res.top = pick_top(std::move(seen), std::max<std::size_t>(opts.keep_top, 1), (hi - lo) * 1e-3);
  return res;
}

}  // namespace ecfmean
