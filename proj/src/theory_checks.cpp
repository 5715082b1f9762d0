#include "ecfmean/theory_checks.hpp"

#include "ecfmean/interval_max.hpp"
#include "ecfmean/minimax_lp.hpp"
#include "ecfmean/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ecfmean {

SinGap sin_approx_gap(double alpha, double beta, double p, double q) {
  if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("sin_approx_gap: p and q must lie in [0, 1]");
  }
  if (!(p + q > 0.0)) throw std::invalid_argument("sin_approx_gap: need p + q > 0");
  const double s = p + q;
  const double gap = std::abs(alpha - beta);
  SinGap out;
  out.lhs = std::abs(std::sin(alpha) - std::sin(beta) - (alpha - beta) * std::cos(beta));
  out.rhs = std::pow(gap, s + 1.0) / (std::pow(2.0, s - 1.0) * (s + 1.0)) +
            q * std::pow(gap, s) * std::abs(beta) / (std::pow(2.0, s - 2.0) * s);
  return out;
}

double net_conjugate(const std::vector<NetPoint>& net, const Vector& theta) {
  double best = 0.0;
  for (const auto& p : net) best = std::max(best, std::abs(p.w.dot(theta) - p.f));
  return best;
}

double net_norm(const std::vector<NetPoint>& net, const Vector& v) {
  double best = 0.0;
  for (const auto& p : net) best = std::max(best, std::abs(p.w.dot(v)));
  return best;
}

ConjugateCheck conjugate_bound_check(const std::vector<NetPoint>& net, const Vector& theta) {
  if (net.empty()) throw std::invalid_argument("conjugate_bound_check: empty net");
  const auto d = theta.size();
  std::vector<AffineCut> cuts;
  cuts.reserve(2 * net.size());
  for (const auto& p : net) {
    if (p.w.size() != d) throw std::invalid_argument("conjugate_bound_check: net point has wrong dimension");
    cuts.push_back({p.w, p.f});
    cuts.push_back({-p.w, -p.f});
  }
  const MaxAffineSolution sol = minimize_max_affine(cuts, static_cast<std::size_t>(d), 100000);
  if (!sol.solved) throw std::runtime_error("conjugate_bound_check: net does not span; conjugate is unbounded below");

  ConjugateCheck out;
  out.theta_min = sol.point;
  out.f_star_theta = net_conjugate(net, theta);
  out.f_star_min = net_conjugate(net, sol.point);
  out.distance = net_norm(net, sol.point - theta);
  if (out.f_star_theta > 0.0) {
    out.max_ratio = out.distance / (2.0 * out.f_star_theta);
  } else {
    out.max_ratio = out.distance > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return out;
}

SupDeviationResult sup_deviation(const SampleSet& samples, const DistributionSpec& dist, double r,
                                 const SupDeviationConfig& cfg) {
  if (dist.family != Family::Gaussian || samples.d() != 1) {
    throw std::invalid_argument("sup_deviation: only univariate Gaussian laws are supported");
  }
  dist.validate(1);
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("sup_deviation: r must be finite and >= 0");
  SupDeviationResult out;
  if (r == 0.0) {
    out.certified = true;
    return out;
  }
  const double mean = dist.shift_or_zero(1)(0);
  const double sd = std::abs(dist.scale_or_identity(1)(0, 0));
  const double var = sd * sd;
  const Eigen::ArrayXd y = samples.data().col(0).array() - mean;
  const double m1 = y.abs().mean();
  const double m2 = y.square().mean();

  // Re = mean cos(w y) - exp(-var w^2 / 2) and Im = mean sin(w y).
  auto probe = [&](double w) {
    Probe1d p;
    const Eigen::ArrayXd t = y * w;
    p.parts[0] = t.cos().mean() - std::exp(-0.5 * var * w * w);
    p.parts[1] = t.sin().mean();
    p.value = std::hypot(p.parts[0], p.parts[1]);
    return p;
  };
  const double k_re = m2 + var;
  const double k_im = m2;
  const double l_re = m1 + sd * std::exp(-0.5);
  const double l_im = m1;
  auto abs_cap = [](double fa, double fb, double h, double k, double l) {
    const double up = std::min(curvature_cap(fa, fb, h, k), lipschitz_cap(fa, fb, h, l));
    const double down = std::min(curvature_cap(-fa, -fb, h, k), lipschitz_cap(-fa, -fb, h, l));
    return std::max({up, down, 0.0});
  };
  auto bound = [&](const Probe1d& a, const Probe1d& b) {
    const double h = b.x - a.x;
    return std::hypot(abs_cap(a.parts[0], b.parts[0], h, k_re, l_re), abs_cap(a.parts[1], b.parts[1], h, k_im, l_im));
  };

  // The deviation at -w is the conjugate of the one at w, so [0, r] suffices.
  Max1dOptions opts;
  opts.initial_points = cfg.initial_points;
  opts.tol = cfg.tol;
  opts.max_evals = cfg.max_evals;
  const Max1dResult res = certified_max_1d(0.0, r, probe, bound, opts);
  out.value = res.best.value;
  out.upper_bound = res.upper_bound;
  out.certified = res.certified;
  out.argmax = res.best.x;
  return out;
}

RademacherEstimate rademacher_complexity(const SampleSet& samples, const Vector& mu_star, std::size_t num_mc,
                                         std::uint64_t seed, const NormPair& norm, RademacherMode mode) {
  if (static_cast<std::size_t>(mu_star.size()) != samples.d()) {
    throw std::invalid_argument("rademacher_complexity: mu_star has wrong dimension");
  }
  const std::size_t n = samples.n();
  const Matrix centered = samples.data().rowwise() - mu_star.transpose();
  const double root_n = std::sqrt(static_cast<double>(n));
  const bool exact = mode == RademacherMode::Exact || (mode == RademacherMode::Auto && n <= 12);
  if (mode == RademacherMode::Exact && n > 24) {
    throw std::invalid_argument("rademacher_complexity: exact enumeration limited to n <= 24");
  }
  if (!exact && num_mc < 1) throw std::invalid_argument("rademacher_complexity: num_mc must be >= 1");

  RademacherEstimate out;
  out.exact = exact;
  if (exact) {
    const std::uint64_t patterns = std::uint64_t{1} << n;
    double acc = 0.0;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
      Vector sum = Vector::Zero(centered.cols());
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = centered.row(static_cast<Eigen::Index>(i)).transpose();
        if ((mask >> i) & 1U) sum += row; else sum -= row;
      }
      acc += norm.primal_norm(sum);
    }
    out.value = acc / static_cast<double>(patterns) / root_n;
    return out;
  }

  std::mt19937_64 rng(seed);
  double mean = 0.0;
  double m2 = 0.0;
  Vector signs(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < num_mc; ++j) {
    for (std::size_t i = 0; i < n; ++i) signs(static_cast<Eigen::Index>(i)) = (rng() >> 63) ? 1.0 : -1.0;
    const double v = norm.primal_norm(centered.transpose() * signs) / root_n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(j + 1);
    m2 += delta * (v - mean);
  }
  out.value = mean;
  out.std_error = num_mc > 1 ? std::sqrt(m2 / static_cast<double>(num_mc - 1) / static_cast<double>(num_mc)) : 0.0;
  return out;
}

void BoundInputs::validate() const {
  if (!(Cn >= 0.0) || !(sigma_op >= 0.0) || !(mu_norm >= 0.0)) {
    throw std::invalid_argument("BoundInputs: Cn, sigma_op and mu_norm must be >= 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("BoundInputs: delta must lie in (0, 1)");
  if (n < 1) throw std::invalid_argument("BoundInputs: n must be >= 1");
  if (!(r > 0.0)) throw std::invalid_argument("BoundInputs: r must be > 0");
  if (!(eta >= 0.0 && eta < 0.5)) throw std::invalid_argument("BoundInputs: eta must lie in [0, 1/2)");
}

double master_bound(const BoundInputs& b) {
  b.validate();
  const double n = static_cast<double>(b.n);
  const double lg = std::log(1.0 / b.delta);
  return 24.0 * b.Cn / std::sqrt(n) + std::sqrt(8.0 * b.sigma_op * lg / n) + 16.0 * lg / (3.0 * n * b.r) +
         b.r * b.r * std::pow(b.mu_norm, 3) / 3.0 + b.r * b.sigma_op;
}

namespace {

void check_floor_inputs(double Cn, double sigma_op, double delta, std::size_t n, double mu_norm, const char* who) {
  BoundInputs b;
  b.Cn = Cn;
  b.sigma_op = sigma_op;
  b.delta = delta;
  b.n = n;
  b.mu_norm = mu_norm;
  try {
    b.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(who) + ": " + e.what());
  }
}

double clean_rate(double Cn, double sigma_op, double lg, double n) {
  return (96.0 * Cn + 12.0 * std::sqrt(sigma_op * lg)) / std::sqrt(n);
}

}  // namespace

double accuracy_floor(double Cn, double sigma_op, double delta, std::size_t n, double mu_norm) {
  check_floor_inputs(Cn, sigma_op, delta, n, mu_norm, "accuracy_floor");
  const double lg = std::log(1.0 / delta);
  const double nn = static_cast<double>(n);
  return std::max(clean_rate(Cn, sigma_op, lg, nn), 9.0 * std::pow(lg / nn, 2.0 / 3.0) * mu_norm);
}

double accuracy_floor_contaminated(double Cn, double sigma_op, double delta, std::size_t n, double mu_norm,
                                   double eta) {
  check_floor_inputs(Cn, sigma_op, delta, n, mu_norm, "accuracy_floor_contaminated");
  if (!(eta >= 0.0 && eta < 0.5)) throw std::invalid_argument("accuracy_floor_contaminated: eta must lie in [0, 1/2)");
  const double lg = std::log(1.0 / delta);
  const double nn = static_cast<double>(n);
  return std::max(clean_rate(Cn, sigma_op, lg, nn) + 8.0 * std::sqrt(eta * sigma_op),
                  std::pow(19.0 * eta + 26.0 * lg / nn, 2.0 / 3.0) * mu_norm);
}

double cf_deviation_bound(double Cn, double sigma_op, double delta, std::size_t n, double r) {
  BoundInputs b;
  b.Cn = Cn;
  b.sigma_op = sigma_op;
  b.delta = delta;
  b.n = n;
  b.r = r;
  b.validate();
  const double nn = static_cast<double>(n);
  const double lg = std::log(1.0 / delta);
  return r * (12.0 * Cn / std::sqrt(nn) + std::sqrt(2.0 * sigma_op * lg / nn)) + 8.0 * lg / (3.0 * nn);
}

SuiteReport sin_gap_suite(std::size_t cases, std::uint64_t seed) {
  SuiteReport rep;
  rep.name = "sin_gap";
  rep.cases = cases;
  rep.worst = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ab(-20.0, 20.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> grid(0, 100);
  for (std::size_t c = 0; c < cases; ++c) {
    const double a = ab(rng);
    const double b = ab(rng);
    double p = 0.0;
    double q = 0.0;
    do {
      if (c % 2 == 0) {
        p = grid(rng) / 100.0;
        q = grid(rng) / 100.0;
      } else {
        p = unit(rng);
        q = unit(rng);
      }
    } while (!(p + q > 0.0));
    const SinGap g = sin_approx_gap(a, b, p, q);
    rep.worst = std::max(rep.worst, g.lhs - g.rhs);
    if (g.lhs > g.rhs + 1e-12) ++rep.violations;
  }
  rep.passed = rep.violations == 0;
  return rep;
}

ConjugateCase random_conjugate_case(std::uint64_t seed, std::size_t case_index) {
  std::mt19937_64 rng(derive_seed(seed, "conjugate-case", case_index));
  std::uniform_int_distribution<int> dim(1, 3);
  const auto d = static_cast<Eigen::Index>(dim(rng));
  std::uniform_int_distribution<int> extra(0, 10);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> val(-1.0, 1.0);

  ConjugateCase out;
  auto add_pair = [&](const Vector& w) {
    out.net.push_back({w, val(rng)});
    out.net.push_back({-w, val(rng)});
  };
  for (Eigen::Index k = 0; k < d; ++k) add_pair(Vector::Unit(d, k));
  const int m = extra(rng);
  for (int j = 0; j < m; ++j) {
    Vector g(d);
    for (Eigen::Index k = 0; k < d; ++k) g(k) = gauss(rng);
    const double nrm = g.norm();
    if (nrm == 0.0) continue;
    // Points strictly inside the ball are allowed too.
    add_pair(g / nrm * (0.5 + 0.5 * std::abs(val(rng))));
  }
  out.theta = Vector(d);
  for (Eigen::Index k = 0; k < d; ++k) out.theta(k) = 2.0 * gauss(rng);
  return out;
}

SuiteReport conjugate_suite(std::size_t cases, std::uint64_t seed) {
  SuiteReport rep;
  rep.name = "conjugate_bound";
  rep.cases = cases;
  for (std::size_t c = 0; c < cases; ++c) {
    const ConjugateCase cc = random_conjugate_case(seed, c);
    const ConjugateCheck chk = conjugate_bound_check(cc.net, cc.theta);
    rep.worst = std::max(rep.worst, chk.max_ratio);
    if (chk.max_ratio > 1.0 + 1e-9) ++rep.violations;
  }
  rep.passed = rep.violations == 0;
  return rep;
}

}  // namespace ecfmean
