#include "ecfmean/interval_max.hpp"
#include "ecfmean/minimax_lp.hpp"
#include "ecfmean/norms.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace ecfmean;

TEST_CASE("dual norm table") {
  CHECK(NormPair{NormKind::L2}.dual() == NormKind::L2);
  CHECK(NormPair{NormKind::L1}.dual() == NormKind::Linf);
  CHECK(NormPair{NormKind::Linf}.dual() == NormKind::L1);
  CHECK(norm_from_string("linf") == NormKind::Linf);
  CHECK_THROWS_AS(norm_from_string("l3"), std::invalid_argument);
}

TEST_CASE("dual_attaining realizes the primal norm") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (auto kind : {NormKind::L2, NormKind::L1, NormKind::Linf}) {
    const NormPair np{kind};
    for (int t = 0; t < 50; ++t) {
      Vector x(4);
      for (int k = 0; k < 4; ++k) x(k) = g(rng);
      const Vector u = np.dual_attaining(x);
      CHECK(np.dual_norm(u) <= 1.0 + 1e-12);
      CHECK(u.dot(x) == doctest::Approx(np.primal_norm(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("dual-ball projection matches brute-force nearest point") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (auto kind : {NormKind::L2, NormKind::L1, NormKind::Linf}) {
    const NormPair np{kind};
    for (int t = 0; t < 20; ++t) {
      Vector w(2);
      w << 2.0 * g(rng), 2.0 * g(rng);
      const Vector p = np.project_dual_ball(w, 1.0);
      CHECK(np.dual_norm(p) <= 1.0 + 1e-12);
      // Oracle: dense grid of the ball in 2-D.
      double best = 1e300;
      const int m = 400;
      for (int i = 0; i <= m; ++i) {
        for (int j = 0; j <= m; ++j) {
          Vector c(2);
          c << -1.0 + 2.0 * i / m, -1.0 + 2.0 * j / m;
          if (np.dual_norm(c) <= 1.0) best = std::min(best, (c - w).norm());
        }
      }
      CHECK((p - w).norm() <= best + 1e-9);
      CHECK((p - w).norm() >= best - 2.0 * std::sqrt(2.0) / m);
    }
  }
}

TEST_CASE("l1 projection keeps interior points and hits the sphere otherwise") {
  Vector w(3);
  w << 0.1, -0.2, 0.3;
  CHECK((project_l1_ball(w, 1.0) - w).norm() == 0.0);
  w << 3.0, -1.0, 0.5;
  const Vector p = project_l1_ball(w, 1.0);
  CHECK(p.lpNorm<1>() == doctest::Approx(1.0));
  CHECK(p(0) == doctest::Approx(1.0));
}

TEST_CASE("max-affine minimization agrees with brute force") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int t = 0; t < 40; ++t) {
    std::vector<AffineCut> cuts;
    // Axis pairs guarantee boundedness.
    for (int k = 0; k < 2; ++k) {
      cuts.push_back({Vector::Unit(2, k), g(rng)});
      cuts.push_back({-Vector::Unit(2, k), g(rng)});
    }
    for (int j = 0; j < 6; ++j) {
      Vector a(2);
      a << g(rng), g(rng);
      cuts.push_back({a, g(rng)});
    }
    const MaxAffineSolution sol = minimize_max_affine(cuts, 2);
    REQUIRE(sol.solved);
    CHECK(max_affine_value(cuts, sol.point) == doctest::Approx(sol.value).epsilon(1e-9));
    // Oracle: the minimum sits where three cuts are active; try every triple.
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      for (std::size_t j = i + 1; j < cuts.size(); ++j) {
        for (std::size_t k = j + 1; k < cuts.size(); ++k) {
          Eigen::Matrix3d m;
          Eigen::Vector3d rhs;
          for (int row = 0; row < 3; ++row) {
            const AffineCut& cut = cuts[row == 0 ? i : row == 1 ? j : k];
            m.row(row) << cut.slope(0), cut.slope(1), -1.0;
            rhs(row) = cut.offset;
          }
          if (std::abs(m.determinant()) < 1e-12) continue;
          const Eigen::Vector3d x = m.partialPivLu().solve(rhs);
          best = std::min(best, max_affine_value(cuts, x.head<2>()));
        }
      }
    }
    CHECK(sol.value <= best + 1e-9);
    CHECK(sol.value >= best - 1e-9);
  }
}

TEST_CASE("max-affine minimization reports unbounded problems") {
  std::vector<AffineCut> cuts{{Vector::Unit(1, 0), 0.0}};
  CHECK_FALSE(minimize_max_affine(cuts, 1).solved);
}

TEST_CASE("max-affine handles a single dimension exactly") {
  // max(x - 1, -x - 3) is minimized at x = -1 with value -2.
  std::vector<AffineCut> cuts{{Vector::Constant(1, 1.0), 1.0}, {Vector::Constant(1, -1.0), 3.0}};
  const MaxAffineSolution sol = minimize_max_affine(cuts, 1);
  REQUIRE(sol.solved);
  CHECK(sol.point(0) == doctest::Approx(-1.0));
  CHECK(sol.value == doctest::Approx(-2.0));
}

TEST_CASE("sin_max_on") {
  CHECK(sin_max_on(0.0, 0.1) == doctest::Approx(std::sin(0.1)));
  CHECK(sin_max_on(1.0, 2.0) == 1.0);
  CHECK(sin_max_on(-2.0, -1.0) == doctest::Approx(std::sin(-1.0)));
  CHECK(sin_max_on(2.0, 2.0 + 2.0 * M_PI) == 1.0);
  CHECK(sin_max_on(3.0, 4.0) == doctest::Approx(std::sin(3.0)));
}

TEST_CASE("caps bound concave-ish functions from above") {
  // f(x) = -x^2 on [0, 1] has f'' = -2.
  const double ub = curvature_cap(0.0, -1.0, 1.0, 2.0);
  for (int i = 0; i <= 100; ++i) CHECK(-(i / 100.0) * (i / 100.0) <= ub + 1e-15);
  CHECK(lipschitz_cap(0.0, 0.0, 2.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("certified_max_1d finds the maximum of a smooth function") {
  auto probe = [](double x) {
    Probe1d p;
    p.x = x;
    p.value = std::sin(5.0 * x) + 0.3 * x;
    p.parts[0] = p.value;
    return p;
  };
  auto bound = [](const Probe1d& a, const Probe1d& b) { return curvature_cap(a.value, b.value, b.x - a.x, 25.0); };
  Max1dOptions opts;
  opts.tol = 1e-10;
  const Max1dResult res = certified_max_1d(-2.0, 2.0, probe, bound, opts);
  CHECK(res.certified);
  double oracle = -1e300;
  for (int i = 0; i <= 400000; ++i) {
    const double x = -2.0 + 4.0 * i / 400000.0;
    oracle = std::max(oracle, std::sin(5.0 * x) + 0.3 * x);
  }
  CHECK(res.best.value >= oracle - 1e-9);
  CHECK(res.upper_bound >= oracle);
  CHECK(res.upper_bound - res.best.value <= 1e-10 + 1e-15);
}

TEST_CASE("certified_max_1d stops above a threshold") {
  auto probe = [](double x) {
    Probe1d p;
    p.x = x;
    p.value = x;
    return p;
  };
  auto bound = [](const Probe1d&, const Probe1d& b) { return b.value; };
  Max1dOptions opts;
  opts.stop_above = -0.5;
  const Max1dResult res = certified_max_1d(-1.0, 1.0, probe, bound, opts);
  CHECK(res.stopped_above);
  CHECK_FALSE(res.certified);
}
