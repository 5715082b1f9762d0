#include "ecfmean/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ecfmean {

NormKind dual_of(NormKind kind) {
  switch (kind) {
    case NormKind::L2:
      return NormKind::L2;
    case NormKind::L1:
      return NormKind::Linf;
    case NormKind::Linf:
      return NormKind::L1;
  }
  throw std::invalid_argument("dual_of: unknown norm");
}

double norm_value(NormKind kind, const Vector& x) {
  switch (kind) {
    case NormKind::L2:
      return x.norm();
    case NormKind::L1:
      return x.lpNorm<1>();
    case NormKind::Linf:
      return x.size() == 0 ? 0.0 : x.lpNorm<Eigen::Infinity>();
  }
  throw std::invalid_argument("norm_value: unknown norm");
}

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::L2:
      return "l2";
    case NormKind::L1:
      return "l1";
    case NormKind::Linf:
      return "linf";
  }
  return "?";
}

NormKind norm_from_string(std::string_view name) {
  if (name == "l2" || name == "L2") return NormKind::L2;
  if (name == "l1" || name == "L1") return NormKind::L1;
  if (name == "linf" || name == "Linf" || name == "LINF") return NormKind::Linf;
  throw std::invalid_argument("unknown norm '" + std::string(name) + "'");
}

// Sort-based projection (Duchi et al. 2008).
Vector project_l1_ball(const Vector& w, double radius) {
  if (w.lpNorm<1>() <= radius) return w;
  std::vector<double> a(static_cast<std::size_t>(w.size()));
  for (Eigen::Index i = 0; i < w.size(); ++i) a[static_cast<std::size_t>(i)] = std::abs(w(i));
  std::sort(a.begin(), a.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    cumulative += a[j];
    const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
    if (a[j] - candidate > 0.0) theta = candidate;
  }
  Vector out(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double mag = std::max(std::abs(w(i)) - theta, 0.0);
    out(i) = std::copysign(mag, w(i));
  }
  return out;
}

NormKind NormPair::dual() const { return dual_of(primal); }

double NormPair::primal_norm(const Vector& x) const { return norm_value(primal, x); }

double NormPair::dual_norm(const Vector& w) const { return norm_value(dual(), w); }

Vector NormPair::project_dual_ball(const Vector& w, double radius) const {
  switch (dual()) {
    case NormKind::L2: {
      const double nrm = w.norm();
      return nrm <= radius ? w : Vector(w * (radius / nrm));
    }
    case NormKind::Linf:
      return w.cwiseMax(-radius).cwiseMin(radius);
    case NormKind::L1:
      return project_l1_ball(w, radius);
  }
  throw std::invalid_argument("project_dual_ball: unknown norm");
}

Vector NormPair::dual_attaining(const Vector& x) const {
  Vector u = Vector::Zero(x.size());
  if (x.size() == 0 || x.cwiseAbs().maxCoeff() == 0.0) return u;
  switch (primal) {
    case NormKind::L2:
      return x / x.norm();
    case NormKind::L1:
      for (Eigen::Index i = 0; i < x.size(); ++i) u(i) = x(i) > 0 ? 1.0 : (x(i) < 0 ? -1.0 : 0.0);
      return u;
    case NormKind::Linf: {
      Eigen::Index k = 0;
      x.cwiseAbs().maxCoeff(&k);
      u(k) = x(k) > 0 ? 1.0 : -1.0;
      return u;
    }
  }
  return u;
}

}  // namespace ecfmean
