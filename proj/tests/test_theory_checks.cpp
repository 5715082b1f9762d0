#include "ecfmean/theory_checks.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ecfmean;

TEST_CASE("sin gap examples") {
  const SinGap same = sin_approx_gap(1.3, 1.3, 0.4, 0.2);
  CHECK(same.lhs == 0.0);
  CHECK(same.rhs == 0.0);
  for (double a : {-3.0, -0.5, 0.01, 2.0, 7.0}) {
    const SinGap g = sin_approx_gap(a, 0.0, 1.0, 1.0);
    CHECK(g.rhs == doctest::Approx(std::pow(std::abs(a), 3) / 6.0));
    CHECK(g.lhs == doctest::Approx(std::abs(std::sin(a) - a)));
    CHECK(g.lhs <= g.rhs);
  }
  CHECK_THROWS_AS(sin_approx_gap(1, 2, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(sin_approx_gap(1, 2, 1.5, 0), std::invalid_argument);
}

TEST_CASE("sin gap suite") {
  const SuiteReport rep = sin_gap_suite(20000, 5);
  CHECK(rep.passed);
  CHECK(rep.violations == 0);
  CHECK(rep.cases == 20000);
}

TEST_CASE("conjugate check examples") {
  // Exact linear data: theta_min = theta0 and f*(theta0) = 0.
  const Eigen::Vector2d theta0(0.7, -1.2);
  std::vector<NetPoint> net;
  for (int k = 0; k < 8; ++k) {
    const double a = 2.0 * M_PI * k / 8.0;
    const Eigen::Vector2d w(std::cos(a), std::sin(a));
    net.push_back({w, w.dot(theta0)});
  }
  const ConjugateCheck lin = conjugate_bound_check(net, Eigen::Vector2d(3, 1));
  CHECK((lin.theta_min - theta0).norm() < 1e-9);
  CHECK(lin.f_star_min < 1e-12);
  CHECK(net_conjugate(net, theta0) < 1e-12);
  CHECK(lin.max_ratio <= 1.0 + 1e-9);

  // f = 0: theta_min = 0 and ||theta||_net <= 2 ||theta||_net.
  for (auto& p : net) p.f = 0.0;
  const Eigen::Vector2d theta(1.5, 0.25);
  const ConjugateCheck zero = conjugate_bound_check(net, theta);
  CHECK(zero.theta_min.norm() < 1e-12);
  CHECK(zero.f_star_theta == doctest::Approx(net_norm(net, theta)));
  CHECK(zero.max_ratio == doctest::Approx(0.5));

  CHECK_THROWS_AS(conjugate_bound_check({}, theta), std::invalid_argument);
}

TEST_CASE("conjugate suite") {
  const SuiteReport rep = conjugate_suite(200, 9);
  CHECK(rep.passed);
  CHECK(rep.worst <= 1.0 + 1e-9);
}

TEST_CASE("sup deviation trivial cases") {
  const DistributionSpec point{Family::Gaussian, 0.0, Vector::Constant(1, 2.0), Matrix::Zero(1, 1)};
  const SampleSet at(Matrix::Constant(20, 1, 2.0));
  CHECK(sup_deviation(at, point, 3.0).value < 1e-15);
  DistributionSpec g;
  const SampleSet s = sample(g, 100, 1, 4);
  CHECK(sup_deviation(s, g, 0.0).value == 0.0);
  CHECK_THROWS_AS(sup_deviation(s, DistributionSpec{Family::StudentT, 3.0, {}, {}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(sup_deviation(sample(g, 10, 2, 1), g, 1.0), std::invalid_argument);
}

TEST_CASE("sup deviation matches a dense grid and is translation invariant") {
  DistributionSpec g{Family::Gaussian, 0.0, Vector::Constant(1, 0.0), Matrix::Constant(1, 1, 1.5)};
  const SampleSet s = sample(g, 300, 1, 12);
  const SupDeviationResult res = sup_deviation(s, g, 2.0);
  CHECK(res.certified);
  double grid = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double w = -2.0 + 4.0 * i / 200000.0;
    const Eigen::ArrayXd t = s.data().col(0).array() * w;
    const std::complex<double> emp(t.cos().mean(), t.sin().mean());
    grid = std::max(grid, std::abs(emp - true_cf_gaussian(0.0, 2.25, w)));
  }
  CHECK(res.value >= grid - 1e-12);
  CHECK(res.value <= grid + 1e-6);

  for (double v : {-7.0, 1e3, 1e6}) {
    DistributionSpec moved = g;
    moved.shift = Vector::Constant(1, v);
    const SupDeviationResult shifted = sup_deviation(s.translated(Vector::Constant(1, v)), moved, 2.0);
    CHECK(std::abs(shifted.value - res.value) <= 2.0 * SupDeviationConfig{}.tol);
  }
}

TEST_CASE("rademacher complexity") {
  const Vector zero = Vector::Zero(1);
  const SampleSet ones(Matrix::Constant(2, 1, 1.0));
  const RademacherEstimate ex = rademacher_complexity(ones, zero, 1, 0);
  CHECK(ex.exact);
  CHECK(ex.value == doctest::Approx(1.0 / std::sqrt(2.0)));

  const SampleSet same(Matrix::Constant(30, 2, 4.0));
  CHECK(rademacher_complexity(same, Eigen::Vector2d(4, 4), 50, 1).value == 0.0);

  DistributionSpec g;
  const SampleSet s = sample(g, 10, 3, 2);
  const Vector mu = Vector::Zero(3);
  const RademacherEstimate base = rademacher_complexity(s, mu, 0, 0);
  CHECK(rademacher_complexity(s.scaled(-2.5), mu, 0, 0).value == doctest::Approx(2.5 * base.value));
  const RademacherEstimate mc = rademacher_complexity(s, mu, 40000, 3, {}, RademacherMode::MonteCarlo);
  CHECK(std::abs(mc.value - base.value) <= 3.0 * mc.std_error);
  CHECK(mc.std_error > 0.0);
}

TEST_CASE("bound calculators") {
  BoundInputs b;
  b.delta = 0.2;
  b.n = 50;
  b.r = 0.3;
  CHECK(master_bound(b) == doctest::Approx(16.0 * std::log(5.0) / (3.0 * 50 * 0.3)));

  b.Cn = 1;
  b.sigma_op = 1;
  b.delta = std::exp(-1.0);
  b.n = 100;
  b.r = 0.1;
  b.mu_norm = 1;
  const double expect = 24.0 / 10 + std::sqrt(8.0 / 100) + 16.0 / 30 + 0.01 / 3 + 0.1;
  CHECK(master_bound(b) == doctest::Approx(expect));
  CHECK(master_bound(b) == doctest::Approx(3.3198).epsilon(1e-4));

  b.mu_norm = 2.0;
  double prev = 0.0;
  for (double r : {1e-1, 1e-3, 1e-5, 1e-7}) {
    b.r = r;
    const double v = master_bound(b);
    if (r < 1e-2) CHECK(v > prev);
    prev = v;
  }

  CHECK(accuracy_floor(1, 1, std::exp(-1.0), 10000, 100) == doctest::Approx(std::max(1.08, 900.0 * std::pow(10.0, -8.0 / 3.0))));
  CHECK(accuracy_floor(1, 1, std::exp(-1.0), 10000, 10) == doctest::Approx(1.08));
  CHECK(accuracy_floor(0.3, 2.0, 0.1, 500, 0.0) ==
        doctest::Approx((96 * 0.3 + 12 * std::sqrt(2 * std::log(10.0))) / std::sqrt(500.0)));
  const double lg = std::log(10.0);
  CHECK(accuracy_floor_contaminated(0.5, 1.0, 0.1, 400, 20.0, 0.0) ==
        doctest::Approx(std::max((96 * 0.5 + 12 * std::sqrt(lg)) / 20.0, std::pow(26 * lg / 400, 2.0 / 3.0) * 20.0)));
  CHECK(accuracy_floor_contaminated(0.5, 1.0, 0.1, 400, 0.0, 0.04) ==
        doctest::Approx((96 * 0.5 + 12 * std::sqrt(lg)) / 20.0 + 8 * std::sqrt(0.04)));
  CHECK_THROWS_AS(accuracy_floor(-1, 1, 0.1, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(accuracy_floor_contaminated(1, 1, 0.1, 10, 0, 0.5), std::invalid_argument);

  CHECK(cf_deviation_bound(0.8, 1.0, 0.1, 1000, 1.0) ==
        doctest::Approx(12 * 0.8 / std::sqrt(1000.0) + std::sqrt(2 * lg / 1000) + 8 * lg / 3000));
}
