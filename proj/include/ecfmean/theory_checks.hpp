#pragma once

#include "ecfmean/norms.hpp"
#include "ecfmean/sample_set.hpp"
#include "ecfmean/simulation.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ecfmean {

struct SinGap {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = |sin a - sin b - (a - b) cos b| and the Hoelder-type majorant
/// rhs = |a-b|^{p+q+1} / (2^{p+q-1}(p+q+1)) + q |a-b|^{p+q} |b| / (2^{p+q-2}(p+q)).
SinGap sin_approx_gap(double alpha, double beta, double p, double q);

/// A function value f(w) at a dual vector w with ||w||_* <= 1.
struct NetPoint {
  Vector w;
  double f = 0.0;
};

/// max over the net of |<w, theta> - f(w)|.
double net_conjugate(const std::vector<NetPoint>& net, const Vector& theta);

/// max over the net of |<w, v>|, the seminorm the net can see.
double net_norm(const std::vector<NetPoint>& net, const Vector& v);

struct ConjugateCheck {
  Vector theta_min;
  double f_star_theta = 0.0;
  double f_star_min = 0.0;
  double distance = 0.0;   // net_norm(theta_min - theta)
  double max_ratio = 0.0;  // distance / (2 f*(theta)); 0 when both vanish
};

/// Minimizes the net-restricted conjugate exactly (linear program) and
/// compares the distance to theta with 2 f*(theta).
ConjugateCheck conjugate_bound_check(const std::vector<NetPoint>& net, const Vector& theta);

struct SupDeviationConfig {
  double tol = 1e-9;
  std::size_t initial_points = 65;
  std::size_t max_evals = 400000;
};

struct SupDeviationResult {
  double value = 0.0;        // best |ecf(w) - cf(w)| found
  double upper_bound = 0.0;  // certified when `certified`
  bool certified = false;
  double argmax = 0.0;
};

/// sup over |w| <= r of |ecf(w) - cf(w)| for univariate samples against a
/// Gaussian law. Computed on samples centered at the law's mean, which
/// leaves the modulus unchanged.
SupDeviationResult sup_deviation(const SampleSet& samples, const DistributionSpec& dist, double r,
                                 const SupDeviationConfig& cfg = {});

enum class RademacherMode { Auto, Exact, MonteCarlo };

struct RademacherEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for exact enumeration
  bool exact = false;
};

/// E || sum_i eps_i (X_i - mu_star) || / sqrt(n) over Rademacher signs.
/// Auto enumerates all sign patterns when n <= 12.
RademacherEstimate rademacher_complexity(const SampleSet& samples, const Vector& mu_star, std::size_t num_mc,
                                         std::uint64_t seed, const NormPair& norm = {},
                                         RademacherMode mode = RademacherMode::Auto);

struct BoundInputs {
  double Cn = 0.0;
  double sigma_op = 0.0;
  double delta = 0.1;
  std::size_t n = 1;
  double r = 1.0;
  double mu_norm = 0.0;
  double eta = 0.0;

  void validate() const;
};

/// 24 Cn/sqrt(n) + sqrt(8 s log(1/d)/n) + 16 log(1/d)/(3 n r) + r^2 m^3/3 + r s.
double master_bound(const BoundInputs& b);

/// max{(96 Cn + 12 sqrt(s log(1/d))) / sqrt(n), 9 (log(1/d)/n)^{2/3} m}.
double accuracy_floor(double Cn, double sigma_op, double delta, std::size_t n, double mu_norm);

/// max{(96 Cn + 12 sqrt(s log(1/d))) / sqrt(n) + 8 sqrt(eta s), (19 eta + 26 log(1/d)/n)^{2/3} m}.
double accuracy_floor_contaminated(double Cn, double sigma_op, double delta, std::size_t n, double mu_norm,
                                   double eta);

/// r (12 Cn/sqrt(n) + sqrt(2 s log(1/d)/n)) + 8 log(1/d)/(3n): a high-probability
/// bound on sup_{|w| <= r} |ecf(w) - cf(w)|.
double cf_deviation_bound(double Cn, double sigma_op, double delta, std::size_t n, double r);

struct SuiteReport {
  std::string name;
  std::size_t cases = 0;
  std::size_t violations = 0;
  double worst = 0.0;  // largest lhs - rhs (sin gap) or ratio (conjugate)
  bool passed = false;
};

/// Random (alpha, beta) in [-20, 20]^2 with (p, q) alternating between a
/// 0.01 grid and uniform draws; violation means lhs > rhs + 1e-12.
SuiteReport sin_gap_suite(std::size_t cases, std::uint64_t seed);

/// Random symmetric nets in d <= 3 with arbitrary values; violation means
/// ratio > 1 + 1e-9.
SuiteReport conjugate_suite(std::size_t cases, std::uint64_t seed);

/// One random case of the conjugate suite (exposed for oracle tests).
struct ConjugateCase {
  std::vector<NetPoint> net;
  Vector theta;
};
ConjugateCase random_conjugate_case(std::uint64_t seed, std::size_t case_index);

}  // namespace ecfmean
