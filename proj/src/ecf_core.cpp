#include "ecfmean/ecf_core.hpp"

#include "ecfmean/interval_max.hpp"
#include "ecfmean/minimax_lp.hpp"
#include "ecfmean/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace ecfmean {

void InnerSolverConfig::validate() const {
  if (grid_points < 3) throw std::invalid_argument("InnerSolverConfig: grid_points must be >= 3");
  if (!(ascent_tol > 0.0)) throw std::invalid_argument("InnerSolverConfig: ascent_tol must be > 0");
  if (random_starts < 1) throw std::invalid_argument("InnerSolverConfig: random_starts must be >= 1");
  if (ascent_max_steps < 1) throw std::invalid_argument("InnerSolverConfig: ascent_max_steps must be >= 1");
  if (top_k_refine < 1) throw std::invalid_argument("InnerSolverConfig: top_k_refine must be >= 1");
  if (max_evals < grid_points) throw std::invalid_argument("InnerSolverConfig: max_evals must be >= grid_points");
}

void OuterSolverConfig::validate() const {
  if (!(tol_abs > 0.0)) throw std::invalid_argument("OuterSolverConfig: tol_abs must be > 0");
  if (max_cuts < 1) throw std::invalid_argument("OuterSolverConfig: max_cuts must be >= 1");
  if (master_max_pivots < 1) throw std::invalid_argument("OuterSolverConfig: master_max_pivots must be >= 1");
}

std::complex<double> ecf(const SampleSet& samples, const Vector& w) {
  if (static_cast<std::size_t>(w.size()) != samples.d()) {
    throw std::invalid_argument("ecf: dimension mismatch between w and samples");
  }
  const Eigen::ArrayXd t = (samples.data() * w).array();
  const double n = static_cast<double>(samples.n());
  return {t.cos().sum() / n, t.sin().sum() / n};
}

Vector coordinate_median(const SampleSet& samples) {
  Vector out(static_cast<Eigen::Index>(samples.d()));
  std::vector<double> col(samples.n());
  for (std::size_t k = 0; k < samples.d(); ++k) {
    for (std::size_t i = 0; i < samples.n(); ++i) col[i] = samples.data()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    std::sort(col.begin(), col.end());
    const std::size_t m = col.size();
    out(static_cast<Eigen::Index>(k)) = (m % 2 == 1) ? col[m / 2] : 0.5 * (col[m / 2 - 1] + col[m / 2]);
  }
  return out;
}

double choose_radius(double eps, double delta, std::size_t n) {
  if (!(eps > 0.0)) throw std::invalid_argument("choose_radius: eps must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("choose_radius: delta must lie in (0, 1)");
  if (n == 0) throw std::invalid_argument("choose_radius: n must be >= 1");
  return 22.0 * std::log(1.0 / delta) / (static_cast<double>(n) * eps);
}

double choose_radius_contaminated(double eps, double delta, std::size_t n, double eta) {
  if (!(eta >= 0.0 && eta < 0.5)) throw std::invalid_argument("choose_radius_contaminated: eta must lie in [0, 1/2)");
  return 16.0 * eta / eps + choose_radius(eps, delta, n);
}

namespace {

// s(u) = r^{-1} Im ecf(r u) over the unit dual ball, with gradient
// (1/n) sum cos(r <u, X_i>) X_i.
class ScaledSine {
 public:
  ScaledSine(const SampleSet& samples, double r)
      : x_(samples.data()), r_(r), n_(static_cast<double>(samples.n())) {}

  double value(const Vector& u) const {
    const Eigen::ArrayXd t = (x_ * u).array() * r_;
    return t.sin().sum() / (n_ * r_);
  }

  double value_grad(const Vector& u, Vector& grad) const {
    const Eigen::ArrayXd t = (x_ * u).array() * r_;
    grad = x_.transpose() * t.cos().matrix() / n_;
    return t.sin().sum() / (n_ * r_);
  }

 private:
  const Matrix& x_;
  double r_;
  double n_;
};

InnerResult inner_sup_1d(double mu, const SampleSet& samples, double r, const InnerSolverConfig& cfg,
                         std::optional<double> stop_above) {
  const double n = static_cast<double>(samples.n());
  const auto col = samples.data().col(0);

  // Samples with r|x| > 4 oscillate too fast for the curvature bound to help;
  // their terms are bounded one by one with the exact range of sin.
  constexpr double wild_threshold = 4.0;
  std::vector<double> smooth;
  std::map<double, double> wild;  // value -> multiplicity
  double smooth_abs = 0.0;
  double smooth_sq = 0.0;
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    const double x = col(i);
    if (r * std::abs(x) > wild_threshold) {
      wild[x] += 1.0;
    } else {
      smooth.push_back(x);
      smooth_abs += std::abs(x);
      smooth_sq += x * x;
    }
  }
  const Eigen::Map<const Eigen::ArrayXd> smooth_arr(smooth.data(), static_cast<Eigen::Index>(smooth.size()));
  std::vector<double> wild_values;
  std::vector<double> wild_weights;
  for (const auto& [v, c] : wild) {
    wild_values.push_back(v);
    wild_weights.push_back(c / (n * r));
  }
  const double lipschitz = std::abs(mu) + smooth_abs / n;
  const double curvature = r * smooth_sq / n;

  auto probe = [&](double u) {
    Probe1d p;
    const double s_smooth = smooth.empty() ? 0.0 : (smooth_arr * (r * u)).sin().sum() / (n * r);
    double s_wild = 0.0;
    for (std::size_t j = 0; j < wild_values.size(); ++j) s_wild += wild_weights[j] * std::sin(r * u * wild_values[j]);
    p.parts[0] = u * mu - s_smooth;
    p.parts[1] = -s_wild;
    p.parts[2] = s_smooth + s_wild;
    p.value = p.parts[0] + p.parts[1];
    return p;
  };
  auto bound = [&](const Probe1d& a, const Probe1d& b) {
    const double h = b.x - a.x;
    double ub = std::min(curvature_cap(a.parts[0], b.parts[0], h, curvature),
                         lipschitz_cap(a.parts[0], b.parts[0], h, lipschitz));
    for (std::size_t j = 0; j < wild_values.size(); ++j) {
      const double v = wild_values[j];
      ub += wild_weights[j] * sin_max_on(-r * b.x * v, -r * a.x * v);
    }
    return ub;
  };

  Max1dOptions opts;
  opts.initial_points = cfg.grid_points | 1;  // odd, so u = 0 is on the grid
  opts.tol = cfg.ascent_tol;
  opts.max_evals = cfg.max_evals;
  opts.keep_top = cfg.top_k_refine;
  opts.stop_above = stop_above;
  const Max1dResult res = certified_max_1d(-1.0, 1.0, probe, bound, opts);

  InnerResult out;
  out.value = r * std::max(res.best.value, 0.0);
  out.w_star = {Vector::Constant(1, r * res.best.x), r};
  out.upper_bound = r * std::max(res.upper_bound, 0.0);
  out.certified = res.certified;
  out.evaluations = res.evaluations;
  for (const auto& p : res.top) out.directions.emplace_back(Vector::Constant(1, p.x), p.parts[2]);
  return out;
}

struct LocalMax {
  Vector u;
  double value;
  double s;
};

InnerResult inner_sup_nd(const Vector& mu, const SampleSet& samples, double r, const NormPair& norm,
                         const InnerSolverConfig& cfg, const std::vector<Vector>& warm_starts,
                         std::uint64_t stream, std::optional<double> stop_above) {
  const auto d = static_cast<Eigen::Index>(samples.d());
  const ScaledSine sine(samples, r);
  std::size_t out_evals_screen = 0;

  std::vector<Vector> starts;
  for (const auto& w : warm_starts) {
    if (w.size() == d) starts.push_back(w);
  }
  const Vector centered = mu - samples.mean();
  starts.push_back(norm.dual_attaining(centered));
  starts.push_back(norm.dual_attaining(mu));
  starts.push_back(norm.dual_attaining(-mu));
  for (Eigen::Index k = 0; k < d; ++k) {
    starts.push_back(Vector::Unit(d, k));
    starts.push_back(-Vector::Unit(d, k));
  }
  std::mt19937_64 rng(derive_seed(cfg.seed, "inner-starts", stream));
  std::normal_distribution<double> gauss;

  // Random screen of the dual ball, dense enough to resolve the oscillation
  // of sin(r <u, X_i>); its best points seed the ascent.
  double xmax = 0.0;
  for (std::size_t i = 0; i < samples.n(); ++i) xmax = std::max(xmax, norm.primal_norm(samples.row(i).transpose()));
  const double want = 16.0 * std::pow(1.0 + r * xmax, static_cast<double>(d));
  const auto screen = static_cast<std::size_t>(std::min(static_cast<double>(cfg.screen_points), std::ceil(want)));
  if (screen > 0) {
    std::mt19937_64 srng(derive_seed(cfg.seed, "inner-screen", stream));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix pts(d, static_cast<Eigen::Index>(screen));
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      Vector g(d);
      for (Eigen::Index k = 0; k < d; ++k) g(k) = gauss(srng);
      const double dn = norm.dual_norm(g);
      pts.col(j) = dn > 0 ? Vector(g * (std::pow(unif(srng), 1.0 / static_cast<double>(d)) / dn)) : Vector::Zero(d);
    }
    Vector vals(pts.cols());
    const Eigen::Index chunk = 256;
    for (Eigen::Index j0 = 0; j0 < pts.cols(); j0 += chunk) {
      const Eigen::Index len = std::min(chunk, pts.cols() - j0);
      const Eigen::ArrayXXd t = (samples.data() * pts.middleCols(j0, len)).array() * r;
      vals.segment(j0, len) = (pts.middleCols(j0, len).transpose() * mu).array() -
                              t.sin().colwise().sum().transpose() / (static_cast<double>(samples.n()) * r);
    }
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(pts.cols()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    const std::size_t keep = std::min(cfg.random_starts, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                      [&](Eigen::Index a, Eigen::Index b) { return vals(a) > vals(b); });
    for (std::size_t j = 0; j < keep; ++j) starts.push_back(pts.col(idx[j]));
    out_evals_screen = screen;
  }

  for (std::size_t j = 0; j < cfg.random_starts; ++j) {
    Vector g(d);
    for (Eigen::Index k = 0; k < d; ++k) g(k) = gauss(rng);
    const double dn = norm.dual_norm(g);
    if (dn > 0) starts.push_back(g / dn);
  }

  InnerResult out;
  out.evaluations = out_evals_screen;
  std::vector<LocalMax> maxima;
  for (const auto& start : starts) {
    if (start.cwiseAbs().maxCoeff() == 0.0) continue;
    Vector u = norm.project_dual_ball(start, 1.0);
    Vector grad_s;
    double s = sine.value_grad(u, grad_s);
    double value = u.dot(mu) - s;
    Vector grad = mu - grad_s;
    ++out.evaluations;
    double step = 1.0;
    for (std::size_t it = 0; it < cfg.ascent_max_steps; ++it) {
      const Vector cand = norm.project_dual_ball(u + step * grad, 1.0);
      const Vector diff = cand - u;
      const double moved = diff.norm();
      if (moved < 1e-14) break;
      Vector cand_grad_s;
      const double cand_s = sine.value_grad(cand, cand_grad_s);
      const double cand_value = cand.dot(mu) - cand_s;
      ++out.evaluations;
      if (cand_value >= value + grad.dot(diff) - diff.squaredNorm() / (2.0 * step)) {
        const double gain = cand_value - value;
        u = cand;
        s = cand_s;
        value = cand_value;
        grad = mu - cand_grad_s;
        step = std::min(step * 2.0, 1e8);
        if (gain <= 1e-3 * cfg.ascent_tol && moved < 1e-9) break;
      } else {
        step *= 0.5;
        if (step < 1e-18) break;
      }
    }
    maxima.push_back({u, value, s});
    if (stop_above && value > *stop_above) break;
  }

  std::sort(maxima.begin(), maxima.end(), [](const LocalMax& a, const LocalMax& b) { return a.value > b.value; });
  for (const auto& m : maxima) {
    if (out.directions.size() >= cfg.top_k_refine) break;
    const bool separated = std::all_of(out.directions.begin(), out.directions.end(),
                                       [&](const auto& e) { return (e.first - m.u).norm() > 1e-6; });
    if (separated) out.directions.emplace_back(m.u, m.s);
  }
  const LocalMax& best = maxima.front();
  out.value = r * std::max(best.value, 0.0);
  out.w_star = {r * best.u, r};
  out.upper_bound = out.value;
  out.certified = false;
  return out;
}

void validate_common(const Vector& mu, const SampleSet& samples, double r) {
  if (static_cast<std::size_t>(mu.size()) != samples.d()) {
    throw std::invalid_argument("inner_sup: dimension mismatch between mu and samples");
  }
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("inner_sup: r must be a positive finite number");
}

// stop_above is on the r-normalized scale.
InnerResult inner_sup_impl(const Vector& mu, const SampleSet& samples, double r, const NormPair& norm,
                           const InnerSolverConfig& cfg, const std::vector<Vector>& warm_starts,
                           std::uint64_t stream, std::optional<double> stop_above) {
  validate_common(mu, samples, r);
  if (samples.d() == 1) return inner_sup_1d(mu(0), samples, r, cfg, stop_above);
  return inner_sup_nd(mu, samples, r, norm, cfg, warm_starts, stream, stop_above);
}

}  // namespace

InnerResult inner_sup(const Vector& mu, const SampleSet& samples, double r, const NormPair& norm,
                      const InnerSolverConfig& cfg, const std::vector<Vector>& warm_starts, std::uint64_t stream) {
  cfg.validate();
  return inner_sup_impl(mu, samples, r, norm, cfg, warm_starts, stream, std::nullopt);
}

double objective(const Vector& mu, const SampleSet& samples, double r, const NormPair& norm,
                 const InnerSolverConfig& cfg) {
  return inner_sup(mu, samples, r, norm, cfg).value / r;
}

EstimateOutcome estimate_mean(const SampleSet& samples, double r, const NormPair& norm, const InnerSolverConfig& inner,
                              const OuterSolverConfig& outer, std::optional<DecisionThreshold> decision) {
  inner.validate();
  outer.validate();
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("estimate_mean: r must be a positive finite number");
  const auto d = static_cast<Eigen::Index>(samples.d());

  Vector mu;
  switch (outer.init) {
    case InitKind::CoordinateMedian:
      mu = coordinate_median(samples);
      break;
    case InitKind::EmpiricalMean:
      mu = samples.mean();
      break;
    case InitKind::Zero:
      mu = Vector::Zero(d);
      break;
    case InitKind::Given:
      if (outer.init_point.size() != d) throw std::invalid_argument("estimate_mean: init_point has wrong dimension");
      mu = outer.init_point;
      break;
  }

  const ScaledSine sine(samples, r);
  std::vector<AffineCut> cuts;
  auto add_cut = [&](const Vector& u, double s) {
    for (const auto& c : cuts) {
      if ((c.slope - u).cwiseAbs().maxCoeff() < 1e-13) return;
    }
    cuts.push_back({u, s});
    cuts.push_back({-u, -s});
  };
  for (Eigen::Index k = 0; k < d; ++k) {
    const Vector e = Vector::Unit(d, k);
    add_cut(e, sine.value(e));
  }

  EstimateOutcome out;
  out.mu_hat = mu;
  double best_value = std::numeric_limits<double>::infinity();
  double best_upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  std::vector<Vector> warm;

  for (std::size_t it = 0; it < outer.max_cuts; ++it) {
    const InnerResult res = inner_sup_impl(mu, samples, r, norm, inner, warm, it,
                                           decision ? std::optional<double>(decision->level) : std::nullopt);
    ++out.iterations;
    const double value = res.value / r;
    const double upper = res.certified ? res.upper_bound / r : value;
    if (value < best_value) {
      best_value = value;
      best_upper = upper;
      out.mu_hat = mu;
      out.attaining_w = res.w_star;
      out.certified = res.certified;
    }
    warm.clear();
    for (const auto& [u, s] : res.directions) {
      add_cut(u, s);
      warm.push_back(u);
    }

    const MaxAffineSolution master = minimize_max_affine(cuts, samples.d(), outer.master_max_pivots);
    if (!master.solved) break;
    lower = std::max(lower, master.value);
    out.nonunique_hint = master.degenerate;

    if (decision) {
      if (lower > decision->level) break;
      if (best_upper <= decision->level) {
        out.converged = true;
        break;
      }
    }
    if (best_upper - lower <= outer.tol_abs) {
      out.converged = true;
      break;
    }
    mu = master.point;
  }

  out.objective_value = best_value;
  out.objective_upper = best_upper;
  out.lower_bound = lower;
  out.cuts_used = cuts.size();
  return out;
}

}  // namespace ecfmean
