#include "ecfmean/minimax_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecfmean {

namespace {

// Dense tableau for min c'x s.t. E x = f, x >= 0 with one artificial column
// per row. Columns: [original | artificial | rhs]; the last row holds
// reduced costs, its rhs entry is minus the current objective.
class Tableau {
 public:
  Tableau(const Matrix& E, const Vector& f)
      : rows_(E.rows()), orig_(E.cols()), t_(Matrix::Zero(E.rows() + 1, E.cols() + E.rows() + 1)),
        basis_(static_cast<std::size_t>(E.rows())) {
    t_.topLeftCorner(rows_, orig_) = E;
    t_.block(0, orig_, rows_, rows_).setIdentity();
    t_.block(0, rhs_col(), rows_, 1) = f;
    for (Eigen::Index i = 0; i < rows_; ++i) basis_[static_cast<std::size_t>(i)] = orig_ + i;
  }

  Eigen::Index rhs_col() const { return orig_ + rows_; }
  Eigen::Index obj_row() const { return rows_; }
  bool is_artificial(Eigen::Index col) const { return col >= orig_ && col < orig_ + rows_; }

  void set_costs(const Vector& costs) {
    // costs has size orig_ + rows_; reduced costs r_j = c_j - c_B' T_j.
    for (Eigen::Index j = 0; j < rhs_col(); ++j) t_(obj_row(), j) = costs(j);
    t_(obj_row(), rhs_col()) = 0.0;
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double cb = costs(basis_[static_cast<std::size_t>(i)]);
      if (cb != 0.0) t_.row(obj_row()) -= cb * t_.row(i);
    }
  }

  // Returns false if the pivot cap was hit or the problem is unbounded.
  bool optimize(bool allow_artificial, double eps, std::size_t max_pivots, std::size_t& pivots) {
    std::size_t degenerate_streak = 0;
    while (true) {
      const bool bland = degenerate_streak > 50;
      Eigen::Index enter = -1;
      double best = -eps;
      for (Eigen::Index j = 0; j < rhs_col(); ++j) {
        if (!allow_artificial && is_artificial(j)) continue;
        const double rc = t_(obj_row(), j);
        if (rc < best) {
          enter = j;
          if (bland) break;
          best = rc;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows_; ++i) {
        const double a = t_(i, enter);
        if (a <= 1e-12) continue;
        const double q = t_(i, rhs_col()) / a;
        if (q < ratio - 1e-15 ||
            (q <= ratio + 1e-15 && leave >= 0 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          ratio = std::min(ratio, q);
          leave = i;
        }
      }
      if (leave < 0) return false;
      degenerate_streak = ratio <= 1e-15 ? degenerate_streak + 1 : 0;
      pivot(leave, enter);
      if (++pivots > max_pivots) return false;
    }
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i <= rows_; ++i) {
      if (i == row) continue;
      const double factor = t_(i, col);
      if (factor != 0.0) t_.row(i) -= factor * t_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  // Pivots zero-level artificials out of the basis where possible.
  void expel_artificials() {
    for (Eigen::Index i = 0; i < rows_; ++i) {
      if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
      Eigen::Index best_col = -1;
      double best_mag = 1e-9;
      for (Eigen::Index j = 0; j < orig_; ++j) {
        if (std::abs(t_(i, j)) > best_mag) {
          best_mag = std::abs(t_(i, j));
          best_col = j;
        }
      }
      if (best_col >= 0) pivot(i, best_col);
    }
  }

  double objective() const { return -t_(obj_row(), rhs_col()); }
  double reduced_cost(Eigen::Index col) const { return t_(obj_row(), col); }
  double basic_value(Eigen::Index row) const { return t_(row, rhs_col()); }
  Eigen::Index basic_var(Eigen::Index row) const { return basis_[static_cast<std::size_t>(row)]; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index orig() const { return orig_; }

 private:
  Eigen::Index rows_;
  Eigen::Index orig_;
  Matrix t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

double max_affine_value(const std::vector<AffineCut>& cuts, const Vector& x) {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& c : cuts) v = std::max(v, c.slope.dot(x) - c.offset);
  return v;
}

MaxAffineSolution minimize_max_affine(const std::vector<AffineCut>& cuts, std::size_t dim,
                                      std::size_t max_pivots) {
  if (cuts.empty()) throw std::invalid_argument("minimize_max_affine: no cuts");
  const auto m = static_cast<Eigen::Index>(cuts.size());
  const auto d = static_cast<Eigen::Index>(dim);
  const Eigen::Index p = d + 1;

  Matrix E(p, m);
  Vector b(m);
  double scale = 1.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& c = cuts[static_cast<std::size_t>(j)];
    if (c.slope.size() != d) throw std::invalid_argument("minimize_max_affine: slope dimension mismatch");
    E.block(0, j, d, 1) = c.slope;
    E(d, j) = 1.0;
    b(j) = c.offset;
    scale = std::max(scale, std::abs(c.offset));
  }
  Vector f = Vector::Zero(p);
  f(d) = 1.0;

  MaxAffineSolution sol;
  sol.point = Vector::Zero(d);
  Tableau tab(E, f);

  Vector phase1 = Vector::Zero(m + p);
  phase1.tail(p).setOnes();
  tab.set_costs(phase1);
  if (!tab.optimize(true, 1e-12, max_pivots, sol.pivots) || tab.objective() > 1e-9) return sol;
  tab.expel_artificials();

  Vector phase2 = Vector::Zero(m + p);
  phase2.head(m) = b;
  tab.set_costs(phase2);
  const double eps = 1e-12 * scale;
  if (!tab.optimize(false, eps, max_pivots, sol.pivots)) return sol;

  // Multipliers y = c_B' B^{-1}; the artificial columns carry B^{-1}, and
  // their phase-two cost is zero, so y_i = -reduced_cost(artificial i).
  Vector y(p);
  for (Eigen::Index i = 0; i < p; ++i) y(i) = -tab.reduced_cost(m + i);
  sol.point = y.head(d);
  sol.value = max_affine_value(cuts, sol.point);
  sol.solved = true;
  for (Eigen::Index i = 0; i < tab.rows(); ++i) {
    if (tab.basic_var(i) < tab.orig() && tab.basic_value(i) <= 1e-12) sol.degenerate = true;
  }
  return sol;
}

}  // namespace ecfmean
