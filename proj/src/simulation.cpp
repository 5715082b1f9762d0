#include "ecfmean/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace ecfmean {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Gaussian:
      return "gaussian";
    case Family::StudentT:
      return "student_t";
    case Family::Pareto:
      return "pareto";
    case Family::LogNormal:
      return "lognormal";
    case Family::TwoPoint:
      return "two_point";
  }
  return "?";
}

Family family_from_string(std::string_view name) {
  if (name == "gaussian") return Family::Gaussian;
  if (name == "student_t") return Family::StudentT;
  if (name == "pareto") return Family::Pareto;
  if (name == "lognormal") return Family::LogNormal;
  if (name == "two_point") return Family::TwoPoint;
  throw std::invalid_argument("unknown distribution family '" + std::string(name) + "'");
}

void DistributionSpec::validate(std::size_t d) const {
  if (d < 1) throw std::invalid_argument("DistributionSpec: d must be >= 1");
  switch (family) {
    case Family::StudentT:
      if (!(param > 2.0)) throw std::invalid_argument("DistributionSpec: student_t degrees of freedom must be > 2");
      break;
    case Family::Pareto:
      if (!(param > 2.0)) throw std::invalid_argument("DistributionSpec: pareto tail index must be > 2");
      break;
    case Family::LogNormal:
      if (!(param > 0.0)) throw std::invalid_argument("DistributionSpec: lognormal sigma must be > 0");
      break;
    case Family::TwoPoint:
      if (!(param >= 0.0)) throw std::invalid_argument("DistributionSpec: two_point amplitude must be >= 0");
      break;
    case Family::Gaussian:
      break;
  }
  if (shift.size() != 0 && static_cast<std::size_t>(shift.size()) != d) {
    throw std::invalid_argument("DistributionSpec: shift has wrong dimension");
  }
  if (scale.size() != 0 &&
      (static_cast<std::size_t>(scale.rows()) != d || static_cast<std::size_t>(scale.cols()) != d)) {
    throw std::invalid_argument("DistributionSpec: scale must be d x d");
  }
  if (!shift.allFinite() || !scale.allFinite()) throw std::invalid_argument("DistributionSpec: non-finite parameters");
}

Vector DistributionSpec::shift_or_zero(std::size_t d) const {
  return shift.size() == 0 ? Vector::Zero(static_cast<Eigen::Index>(d)) : shift;
}

Matrix DistributionSpec::scale_or_identity(std::size_t d) const {
  return scale.size() == 0 ? Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) : scale;
}

double unit_variance(Family family, double param) {
  switch (family) {
    case Family::Gaussian:
      return 1.0;
    case Family::StudentT:
      return param / (param - 2.0);
    case Family::Pareto: {
      const double a = param;
      return a / ((a - 1.0) * (a - 1.0) * (a - 2.0));
    }
    case Family::LogNormal: {
      const double s2 = param * param;
      return std::expm1(s2) * std::exp(s2);
    }
    case Family::TwoPoint:
      return param * param;
  }
  throw std::invalid_argument("unit_variance: unknown family");
}

SampleSet sample(const DistributionSpec& dist, std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  dist.validate(d);
  std::mt19937_64 rng(seed);
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(d);
  Matrix z(rows, cols);

  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;
  std::optional<std::student_t_distribution<double>> student;
  if (dist.family == Family::StudentT) student.emplace(dist.param);

  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) {
      double v = 0.0;
      switch (dist.family) {
        case Family::Gaussian:
          v = gauss(rng);
          break;
        case Family::StudentT:
          v = (*student)(rng);
          break;
        case Family::Pareto: {
          const double a = dist.param;
          const double u = 1.0 - unif(rng);  // (0, 1]
          v = std::pow(u, -1.0 / a) - a / (a - 1.0);
          break;
        }
        case Family::LogNormal: {
          const double s = dist.param;
          v = std::exp(s * gauss(rng)) - std::exp(0.5 * s * s);
          break;
        }
        case Family::TwoPoint:
          v = (rng() & 1U) ? dist.param : -dist.param;
          break;
      }
      z(i, k) = v;
    }
  }
  const Matrix scale = dist.scale_or_identity(d);
  Matrix x = z * scale.transpose();
  x.rowwise() += dist.shift_or_zero(d).transpose();
  return SampleSet(std::move(x));
}

GroundTruth ground_truth(const DistributionSpec& dist, std::size_t d) {
  dist.validate(d);
  const Matrix s = dist.scale_or_identity(d);
  const Matrix cov = unit_variance(dist.family, dist.param) * (s * s.transpose());
  GroundTruth gt;
  gt.mean = dist.shift_or_zero(d);
  gt.cov_trace = cov.trace();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  gt.cov_opnorm = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  return gt;
}

std::complex<double> true_cf_gaussian(double mu, double sigma2, double w) {
  if (!(sigma2 >= 0.0)) throw std::invalid_argument("true_cf_gaussian: sigma2 must be >= 0");
  const double env = std::exp(-0.5 * w * w * sigma2);
  return {env * std::cos(w * mu), env * std::sin(w * mu)};
}

void AdversarySpec::validate() const {
  if (!(eta >= 0.0 && eta < 0.5)) throw std::invalid_argument("AdversarySpec: eta must lie in [0, 1/2)");
  if (const auto* sc = std::get_if<ScaledCopies>(&strategy); sc && !(std::isfinite(sc->factor))) {
    throw std::invalid_argument("AdversarySpec: scaled_copies factor must be finite");
  }
}

std::size_t AdversarySpec::replaced_count(std::size_t n) const {
  return static_cast<std::size_t>(std::floor(eta * static_cast<double>(n)));
}

namespace {

Vector unit_or_e1(const Vector& v, Eigen::Index d) {
  if (v.size() != 0 && v.size() != d) throw std::invalid_argument("contaminate: direction has wrong dimension");
  const double nrm = v.size() == 0 ? 0.0 : v.norm();
  if (nrm == 0.0) return Vector::Unit(d, 0);
  return v / nrm;
}

}  // namespace

SampleSet contaminate(const SampleSet& samples, const AdversarySpec& adv, const ContaminationContext& context,
                      std::uint64_t seed) {
  adv.validate();
  const std::size_t n = samples.n();
  const auto d = static_cast<Eigen::Index>(samples.d());
  const std::size_t count = adv.replaced_count(n);
  if (count == 0) return samples;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Matrix x = samples.data();
  for (std::size_t j = 0; j < count; ++j) {
    const auto i = static_cast<Eigen::Index>(order[j]);
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, PointMass>) {
            x.row(i) = (s.magnitude * unit_or_e1(s.direction, d)).transpose();
          } else if constexpr (std::is_same_v<S, ScaledCopies>) {
            x.row(i) *= s.factor;
          } else if constexpr (std::is_same_v<S, SignFlip>) {
            x.row(i) *= -1.0;
          } else {
            Vector dir = s.direction;
            if (dir.size() == 0) dir = context.clean_mean.size() == d ? context.clean_mean : samples.mean();
            x.row(i) = (s.magnitude * unit_or_e1(dir, d)).transpose();
          }
        },
        adv.strategy);
  }
  return SampleSet(std::move(x));
}

}  // namespace ecfmean
