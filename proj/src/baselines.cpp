#include "ecfmean/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace ecfmean {

namespace {

void require_univariate(const SampleSet& samples, const char* who) {
  if (samples.d() != 1) throw std::invalid_argument(std::string(who) + ": expects univariate samples (d = 1)");
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return (m % 2 == 1) ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

Matrix block_means(const SampleSet& samples, const BlockPartition& blocks) {
  Matrix means = Matrix::Zero(static_cast<Eigen::Index>(blocks.k), static_cast<Eigen::Index>(samples.d()));
  const auto sizes = blocks.block_sizes();
  for (std::size_t i = 0; i < samples.n(); ++i) {
    means.row(static_cast<Eigen::Index>(blocks.assignment[i])) += samples.row(i);
  }
  for (std::size_t b = 0; b < blocks.k; ++b) means.row(static_cast<Eigen::Index>(b)) /= static_cast<double>(sizes[b]);
  return means;
}

}  // namespace

std::vector<std::size_t> BlockPartition::block_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto b : assignment) ++sizes[b];
  return sizes;
}

BlockPartition make_blocks(std::size_t n, std::size_t k, std::optional<std::uint64_t> seed) {
  if (k < 1 || k > n) throw std::invalid_argument("make_blocks: need 1 <= k <= n");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (seed) {
    std::mt19937_64 rng(*seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  BlockPartition part;
  part.k = k;
  part.assignment.assign(n, 0);
  // The first n % k blocks get one extra element.
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t len = base + (b < extra ? 1 : 0);
    for (std::size_t j = 0; j < len; ++j) part.assignment[order[pos++]] = b;
  }
  return part;
}

Vector empirical_mean(const SampleSet& samples) { return samples.mean(); }

double catoni_psi(double t) {
  if (t >= 0.0) return std::log1p(t + 0.5 * t * t);
  return -std::log1p(-t + 0.5 * t * t);
}

double catoni_residual(const Vector& x, double mu, double alpha) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += catoni_psi(alpha * (x(i) - mu));
  return acc / static_cast<double>(x.size());
}

double catoni(const SampleSet& samples, const CatoniConfig& cfg) {
  require_univariate(samples, "catoni");
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("catoni: alpha must be > 0");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("catoni: tol must be > 0");
  const Vector x = samples.data().col(0);
  double lo = x.minCoeff();
  double hi = x.maxCoeff();
  if (lo == hi) return lo;
  const double r_lo = catoni_residual(x, lo, cfg.alpha);
  const double r_hi = catoni_residual(x, hi, cfg.alpha);
  if (!(r_lo >= 0.0 && r_hi <= 0.0)) throw EstimationError("catoni: residual does not bracket a root");

  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double res = catoni_residual(x, mid, cfg.alpha);
    if (res > 0.0) {
      lo = mid;
    } else if (res < 0.0) {
      hi = mid;
    } else {
      // Exact zero: shrink onto the zero set from both sides and report the
      // midpoint of whatever flat stretch remains.
      double a = lo, b = mid;
      for (std::size_t j = 0; j < 200 && b - a > 0; ++j) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        (catoni_residual(x, m, cfg.alpha) > 0.0 ? a : b) = m;
      }
      double c = mid, e = hi;
      for (std::size_t j = 0; j < 200 && e - c > 0; ++j) {
        const double m = 0.5 * (c + e);
        if (m <= c || m >= e) break;
        (catoni_residual(x, m, cfg.alpha) < 0.0 ? e : c) = m;
      }
      return 0.5 * (b + c);
    }
    if (std::abs(res) <= cfg.tol && hi - lo <= cfg.tol * (1.0 + std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

double catoni_alpha(const SampleSet& samples, double delta) {
  require_univariate(samples, "catoni_alpha");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("catoni_alpha: delta must lie in (0, 1)");
  const double n = static_cast<double>(samples.n());
  double v = 0.0;
  if (samples.n() > 1) {
    const Vector x = samples.data().col(0);
    v = (x.array() - x.mean()).square().sum() / (n - 1.0);
  }
  if (!(v > 0.0)) v = 1.0;
  return std::sqrt(2.0 * std::log(1.0 / delta) / (n * v));
}

double median_of_means(const SampleSet& samples, std::size_t k, std::optional<std::uint64_t> seed) {
  require_univariate(samples, "median_of_means");
  if (k < 1 || k > samples.n()) throw std::invalid_argument("median_of_means: need 1 <= k <= n");
  const Matrix means = block_means(samples, make_blocks(samples.n(), k, seed));
  return median_of(std::vector<double>(means.data(), means.data() + means.size()));
}

GeometricMedianResult geometric_median(const Matrix& points, double tol, std::size_t max_iter) {
  if (points.rows() < 1) throw std::invalid_argument("geometric_median: need at least one point");
  if (!(tol > 0.0)) throw std::invalid_argument("geometric_median: tol must be > 0");
  const Eigen::Index m = points.rows();
  auto total_distance = [&](const Vector& y) { return (points.rowwise() - y.transpose()).rowwise().norm().sum(); };

  GeometricMedianResult res;
  Vector y = points.colwise().mean().transpose();
  if (m == 1) {
    res.point = y;
    res.converged = true;
    return res;
  }
  const double scale = 1.0 + (points.rowwise() - y.transpose()).rowwise().norm().maxCoeff();
  const double coincide = 1e-12 * scale;

  for (std::size_t it = 0; it < max_iter; ++it) {
    const Vector dist = (points.rowwise() - y.transpose()).rowwise().norm();
    Vector weighted = Vector::Zero(points.cols());
    double weight_sum = 0.0;
    double multiplicity = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (dist(j) <= coincide) {
        multiplicity += 1.0;
        continue;
      }
      weighted += points.row(j).transpose() / dist(j);
      weight_sum += 1.0 / dist(j);
    }
    if (weight_sum == 0.0) {  // every point coincides with y
      res.converged = true;
      break;
    }
    const Vector t = weighted / weight_sum;
    Vector next;
    if (multiplicity == 0.0) {
      next = t;
    } else {
      // y sits on a data point: it is optimal iff the pull of the others
      // does not exceed the multiplicity there.
      const double pull = ((t - y) * weight_sum).norm();
      if (pull <= multiplicity) {
        res.converged = true;
        ++res.iterations;
        res.trace.push_back(total_distance(y));
        break;
      }
      const double ratio = multiplicity / pull;
      next = (1.0 - ratio) * t + ratio * y;
    }
    const double step = (next - y).norm();
    y = next;
    ++res.iterations;
    res.trace.push_back(total_distance(y));
    if (step <= tol * (1.0 + y.norm())) {
      res.converged = true;
      break;
    }
  }
  res.point = y;
  res.objective = total_distance(y);
  return res;
}

Vector geometric_median_of_means(const SampleSet& samples, std::size_t k, double tol,
                                 std::optional<std::uint64_t> seed) {
  if (k < 1 || k > samples.n()) throw std::invalid_argument("geometric_median_of_means: need 1 <= k <= n");
  const Matrix means = block_means(samples, make_blocks(samples.n(), k, seed));
  return geometric_median(means, tol).point;
}

double trimmed_mean(const SampleSet& samples, double eta, double delta) {
  require_univariate(samples, "trimmed_mean");
  if (!(eta >= 0.0 && eta < 0.5)) throw std::invalid_argument("trimmed_mean: eta must lie in [0, 1/2)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("trimmed_mean: delta must lie in (0, 1)");
  const std::size_t n = samples.n();
  const double q = std::min(eta + std::log(4.0 / delta) / static_cast<double>(n), 0.25);
  std::vector<double> sorted(samples.data().data(), samples.data().data() + n);
  std::sort(sorted.begin(), sorted.end());
  const auto cut = static_cast<std::size_t>(std::floor(q * static_cast<double>(n)));
  const double lo = sorted[cut];
  const double hi = sorted[n - 1 - cut];
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::clamp(samples.data()(static_cast<Eigen::Index>(i), 0), lo, hi);
  return acc / static_cast<double>(n);
}

std::size_t default_block_count(std::size_t n, double delta) {
  const auto k = static_cast<std::size_t>(std::ceil(8.0 * std::log(1.0 / delta)));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

}  // namespace ecfmean
