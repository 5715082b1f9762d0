#include "ecfmean/simulation.hpp"

#include <doctest.h>

#include <cmath>

using namespace ecfmean;

TEST_CASE("degenerate and deterministic sampling") {
  DistributionSpec dist{Family::Gaussian, 0.0, Eigen::Vector2d(1.5, -2.0), Matrix::Zero(2, 2)};
  const SampleSet s = sample(dist, 10, 2, 1);
  for (std::size_t i = 0; i < 10; ++i) CHECK(s.row(i) == Eigen::RowVector2d(1.5, -2.0));

  DistributionSpec t{Family::StudentT, 3.0, {}, {}};
  CHECK(sample(t, 50, 3, 77).data() == sample(t, 50, 3, 77).data());
  CHECK(sample(t, 50, 3, 77).data() != sample(t, 50, 3, 78).data());
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(sample(DistributionSpec{Family::StudentT, 2.0, {}, {}}, 5, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample(DistributionSpec{Family::Pareto, 1.5, {}, {}}, 5, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample(DistributionSpec{Family::LogNormal, 0.0, {}, {}}, 5, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample(DistributionSpec{Family::Gaussian, 0.0, Vector::Zero(3), {}}, 5, 2, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample(DistributionSpec{}, 0, 1, 0), std::invalid_argument);
  CHECK(family_from_string("two_point") == Family::TwoPoint);
  CHECK_THROWS_AS(family_from_string("cauchy"), std::invalid_argument);
}

TEST_CASE("ground truth closed forms") {
  DistributionSpec g{Family::Gaussian, 0.0, Eigen::Vector3d(1, 2, 3), 2.0 * Matrix::Identity(3, 3)};
  const GroundTruth gt = ground_truth(g, 3);
  CHECK(gt.mean == Eigen::Vector3d(1, 2, 3));
  CHECK(gt.cov_opnorm == doctest::Approx(4.0));
  CHECK(gt.cov_trace == doctest::Approx(12.0));

  DistributionSpec t{Family::StudentT, 5.0, {}, Matrix::Constant(1, 1, 3.0)};
  CHECK(ground_truth(t, 1).cov_opnorm == doctest::Approx(9.0 * 5.0 / 3.0));

  DistributionSpec tp{Family::TwoPoint, 2.5, {}, {}};
  CHECK(ground_truth(tp, 1).mean(0) == 0.0);
  CHECK(ground_truth(tp, 1).cov_opnorm == doctest::Approx(6.25));

  Matrix scale(2, 2);
  scale << 2, 1, 0, 1;
  const GroundTruth corr = ground_truth(DistributionSpec{Family::Gaussian, 0.0, {}, scale}, 2);
  CHECK(corr.cov_opnorm <= corr.cov_trace);
  CHECK(corr.cov_trace == doctest::Approx(6.0));
}

TEST_CASE("Monte Carlo moments match the ground truth") {
  // Parameters keep the fourth moment finite so the variance check has a
  // well-defined standard error.
  const std::size_t n = 1000000;
  const DistributionSpec specs[] = {
      {Family::Gaussian, 0.0, Vector::Constant(1, 1.0), Matrix::Constant(1, 1, 2.0)},
      {Family::StudentT, 10.0, Vector::Constant(1, -3.0), {}},
      {Family::Pareto, 6.0, Vector::Constant(1, 0.5), {}},
      {Family::LogNormal, 0.5, {}, {}},
  };
  std::uint64_t seed = 100;
  for (const auto& dist : specs) {
    CAPTURE(to_string(dist.family));
    const GroundTruth gt = ground_truth(dist, 1);
    const Eigen::ArrayXd x = sample(dist, n, 1, seed++).data().col(0).array();
    const double mean = x.mean();
    const Eigen::ArrayXd c = x - mean;
    const double var = c.square().sum() / (n - 1.0);
    const double m4 = c.square().square().mean();
    CHECK(std::abs(mean - gt.mean(0)) <= 5.0 * std::sqrt(gt.cov_opnorm / n));
    CHECK(std::abs(var - gt.cov_opnorm) <= 5.0 * std::sqrt((m4 - var * var) / n));
  }
  // Two-point: every centered square equals the amplitude squared.
  DistributionSpec tp{Family::TwoPoint, 1.5, Vector::Constant(1, 2.0), {}};
  const Eigen::ArrayXd y = sample(tp, 10000, 1, 5).data().col(0).array() - 2.0;
  CHECK((y.square() == 2.25).all());
  CHECK(std::abs(y.mean()) <= 5.0 * 1.5 / std::sqrt(10000.0));

  // Student-t(3): only the mean has a finite-variance standard error.
  DistributionSpec t3{Family::StudentT, 3.0, Vector::Constant(1, 4.0), {}};
  const Eigen::ArrayXd x = sample(t3, 100000, 1, 1).data().col(0).array();
  CHECK(std::abs(x.mean() - 4.0) <= 5.0 * std::sqrt(3.0 / 100000.0));
}

TEST_CASE("true Gaussian characteristic function") {
  CHECK(true_cf_gaussian(3.0, 2.0, 0.0) == std::complex<double>(1.0, 0.0));
  CHECK(true_cf_gaussian(0.0, 2.0, 1.3).imag() == 0.0);
  const auto v = true_cf_gaussian(1.0, 1.0, 1.0);
  CHECK(v.real() == doctest::Approx(std::exp(-0.5) * std::cos(1.0)));
  CHECK(v.imag() == doctest::Approx(std::exp(-0.5) * std::sin(1.0)));
}

TEST_CASE("contamination replaces exactly floor(eta n) rows") {
  DistributionSpec dist;
  const SampleSet clean = sample(dist, 10, 1, 3);
  const ContaminationContext ctx{clean.mean()};
  CHECK(contaminate(clean, AdversarySpec{0.0, PointMass{}}, ctx, 1).data() == clean.data());

  for (double eta : {0.1, 0.15, 0.49}) {
    for (std::size_t n : {10, 57, 400}) {
      const SampleSet s = sample(dist, n, 2, n);
      const AdversarySpec adv{eta, PointMass{Vector(), 1e6}};
      const SampleSet c = contaminate(s, adv, ContaminationContext{s.mean()}, 9);
      std::size_t changed = 0;
      for (std::size_t i = 0; i < n; ++i) changed += (c.row(i) != s.row(i)) ? 1 : 0;
      CHECK(changed == static_cast<std::size_t>(std::floor(eta * n)));
      CHECK(contaminate(s, adv, ContaminationContext{s.mean()}, 9).data() == c.data());
    }
  }
  CHECK_THROWS_AS(contaminate(clean, AdversarySpec{0.5, SignFlip{}}, ctx, 1), std::invalid_argument);
}

TEST_CASE("adversary strategies") {
  DistributionSpec dist{Family::Gaussian, 0.0, Eigen::Vector2d(3, 4), {}};
  const SampleSet s = sample(dist, 100, 2, 8);
  const ContaminationContext ctx{Eigen::Vector2d(3, 4)};

  const SampleSet pm = contaminate(s, AdversarySpec{0.1, PointMass{Eigen::Vector2d(0, 2), 1e6}}, ctx, 2);
  const SampleSet sc = contaminate(s, AdversarySpec{0.1, ScaledCopies{-5.0}}, ctx, 2);
  const SampleSet sf = contaminate(s, AdversarySpec{0.1, SignFlip{}}, ctx, 2);
  const SampleSet os = contaminate(s, AdversarySpec{0.1, OracleShift{10.0, Vector()}}, ctx, 2);
  for (std::size_t i = 0; i < 100; ++i) {
    if (pm.row(i) != s.row(i)) CHECK(pm.row(i) == Eigen::RowVector2d(0, 1e6));
    if (sc.row(i) != s.row(i)) CHECK((sc.row(i) - (-5.0) * s.row(i)).norm() == 0.0);
    if (sf.row(i) != s.row(i)) CHECK(sf.row(i) == -s.row(i));
    if (os.row(i) != s.row(i)) CHECK((os.row(i) - Eigen::RowVector2d(6, 8)).norm() < 1e-12);
  }
  // Empirical mean shifts by about eta * magnitude.
  const double shift = (pm.mean() - s.mean()).norm();
  CHECK(shift == doctest::Approx(0.1 * 1e6).epsilon(1e-3));
}
