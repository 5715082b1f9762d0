#pragma once

#include "ecfmean/sample_set.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>

namespace ecfmean {

enum class Family { Gaussian, StudentT, Pareto, LogNormal, TwoPoint };

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);

/// Parametric sampling law X = shift + scale * Z, with Z having i.i.d.
/// zero-mean coordinates from `family`.
///
/// `param` is family specific: degrees of freedom (student_t, > 2), tail
/// index (pareto, > 2), log-scale sigma (lognormal, > 0), amplitude
/// (two_point). Unused for gaussian. Pareto and lognormal coordinates are
/// centered analytically, so the mean is exactly `shift`.
struct DistributionSpec {
  Family family = Family::Gaussian;
  double param = 0.0;
  Vector shift;  // empty means zero
  Matrix scale;  // d x d; empty means identity

  void validate(std::size_t d) const;
  Vector shift_or_zero(std::size_t d) const;
  Matrix scale_or_identity(std::size_t d) const;
};

struct GroundTruth {
  Vector mean;
  double cov_opnorm = 0.0;
  double cov_trace = 0.0;
};

struct PointMass {
  Vector direction;  // normalized internally; empty means e_1
  double magnitude = 1e6;
};
struct ScaledCopies {
  double factor = 10.0;
};
struct SignFlip {};
struct OracleShift {
  double magnitude = 1e6;
  Vector direction;  // empty means the clean empirical mean direction
};
using Strategy = std::variant<PointMass, ScaledCopies, SignFlip, OracleShift>;

struct AdversarySpec {
  double eta = 0.0;
  Strategy strategy = PointMass{};

  void validate() const;
  std::size_t replaced_count(std::size_t n) const;
};

/// What the adversary may see about the clean sample.
struct ContaminationContext {
  Vector clean_mean;
};

SampleSet sample(const DistributionSpec& dist, std::size_t n, std::size_t d, std::uint64_t seed);

/// Variance of one standardized coordinate of the family.
double unit_variance(Family family, double param);

/// Closed-form mean, covariance operator norm and trace for dimension d.
GroundTruth ground_truth(const DistributionSpec& dist, std::size_t d);

/// exp(-w^2 sigma2 / 2) (cos(w mu), sin(w mu)).
std::complex<double> true_cf_gaussian(double mu, double sigma2, double w);

/// Replaces exactly floor(eta n) seeded-random rows according to the strategy.
SampleSet contaminate(const SampleSet& samples, const AdversarySpec& adv, const ContaminationContext& context,
                      std::uint64_t seed);

}  // namespace ecfmean
