#pragma once

#include "ecfmean/sample_set.hpp"

#include <cstddef>
#include <vector>

namespace ecfmean {

/// One affine piece x -> <slope, x> - offset of a max-affine function.
struct AffineCut {
  Vector slope;
  double offset = 0.0;
};

struct MaxAffineSolution {
  Vector point;             // a minimizer of the max-affine function
  double value = 0.0;       // the minimum value
  bool solved = false;      // false on infeasible dual / pivot cap hit
  bool degenerate = false;  // alternative minimizers may exist
  std::size_t pivots = 0;
};

/// Exactly minimizes x -> max_j (<a_j, x> - b_j) over R^dim.
///
/// Solved as the dual linear program min b'l s.t. sum l_j a_j = 0,
/// sum l_j = 1, l >= 0 with a dense two-phase simplex; the minimizer is read
/// off the simplex multipliers. The function must be bounded below, which
/// holds whenever the slopes positively span R^dim.
MaxAffineSolution minimize_max_affine(const std::vector<AffineCut>& cuts, std::size_t dim,
                                      std::size_t max_pivots = 10000);

/// max_j (<a_j, x> - b_j), evaluated directly.
double max_affine_value(const std::vector<AffineCut>& cuts, const Vector& x);

}  // namespace ecfmean
