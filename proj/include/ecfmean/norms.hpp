#pragma once

#include "ecfmean/sample_set.hpp"

#include <string>
#include <string_view>

namespace ecfmean {

enum class NormKind { L2, L1, Linf };

/// A primal norm together with its dual. dual(L2) = L2, dual(L1) = Linf,
/// dual(Linf) = L1.
struct NormPair {
  NormKind primal = NormKind::L2;

  NormKind dual() const;

  double primal_norm(const Vector& x) const;
  double dual_norm(const Vector& w) const;

  /// Euclidean projection of w onto {v : dual_norm(v) <= radius}.
  Vector project_dual_ball(const Vector& w, double radius) const;

  /// A maximizer of <u, x> over the unit dual ball, i.e. a dual vector with
  /// dual_norm(u) <= 1 and <u, x> = primal_norm(x). Zero x yields zero.
  Vector dual_attaining(const Vector& x) const;
};

double norm_value(NormKind kind, const Vector& x);
NormKind dual_of(NormKind kind);
std::string_view to_string(NormKind kind);
NormKind norm_from_string(std::string_view name);

/// Euclidean projection onto the L1 ball of the given radius.
Vector project_l1_ball(const Vector& w, double radius);

}  // namespace ecfmean
