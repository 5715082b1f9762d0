#pragma once

#include "ecfmean/sample_set.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ecfmean {

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CatoniConfig {
  double alpha = 1.0;  // tempering scale, units 1/observation
  double tol = 1e-12;
  std::size_t max_iter = 500;
};

/// Assignment of sample indices to k blocks of near-equal size.
struct BlockPartition {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;  // sample index -> block

  std::vector<std::size_t> block_sizes() const;
};

/// Contiguous split of 0..n-1 into k blocks, after a seeded permutation when
/// a seed is given.
BlockPartition make_blocks(std::size_t n, std::size_t k, std::optional<std::uint64_t> seed);

Vector empirical_mean(const SampleSet& samples);

/// Catoni's influence function at the narrow edge of its admissible band:
/// log(1 + t + t^2/2) for t >= 0 and -log(1 - t + t^2/2) otherwise.
double catoni_psi(double t);

/// (1/n) sum psi(alpha (x_i - mu)); nonincreasing in mu.
double catoni_residual(const Vector& x, double mu, double alpha);

/// Root of the Catoni residual, found by bisection on [min x, max x].
double catoni(const SampleSet& samples, const CatoniConfig& cfg);

/// sqrt(2 log(1/delta) / (n v)) with v the sample variance (1.0 if v = 0).
double catoni_alpha(const SampleSet& samples, double delta);

/// Median of k block means. Sequential blocks when no seed is given.
double median_of_means(const SampleSet& samples, std::size_t k, std::optional<std::uint64_t> seed);

struct GeometricMedianResult {
  Vector point;
  double objective = 0.0;  // sum of distances
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // objective after every iteration
};

/// Weiszfeld iteration for argmin_y sum_j ||y - p_j||_2 with the Vardi-Zhang
/// treatment of iterates that land on a data point.
GeometricMedianResult geometric_median(const Matrix& points, double tol = 1e-10, std::size_t max_iter = 2000);

/// Geometric median of k block means.
Vector geometric_median_of_means(const SampleSet& samples, std::size_t k, double tol,
                                 std::optional<std::uint64_t> seed);

/// Mean after clamping to the empirical [q, 1-q] quantile range, with
/// q = min(eta + log(4/delta)/n, 1/4).
double trimmed_mean(const SampleSet& samples, double eta, double delta);

/// Block count ceil(8 log(1/delta)) clamped to [1, n].
std::size_t default_block_count(std::size_t n, double delta);

}  // namespace ecfmean
