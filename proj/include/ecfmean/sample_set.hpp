#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>

namespace ecfmean {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense n x d matrix of observations, one row per sample.
///
/// Construction validates that the matrix is non-empty and every entry is
/// finite, so downstream estimators never see NaN or Inf.
class SampleSet {
 public:
  explicit SampleSet(Matrix data) : data_(std::move(data)) {
    if (data_.rows() < 1 || data_.cols() < 1) {
      throw std::invalid_argument("SampleSet: need n >= 1 and d >= 1");
    }
    if (!data_.allFinite()) {
      throw std::invalid_argument("SampleSet: entries must be finite");
    }
  }

  /// Column vector of univariate observations (d = 1).
  static SampleSet univariate(const Vector& values) {
    Matrix m(values.size(), 1);
    m.col(0) = values;
    return SampleSet(std::move(m));
  }

  std::size_t n() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(data_.cols()); }
  const Matrix& data() const { return data_; }
  auto row(std::size_t i) const { return data_.row(static_cast<Eigen::Index>(i)); }

  /// Returns a copy with every row translated by v.
  SampleSet translated(const Vector& v) const {
    if (static_cast<std::size_t>(v.size()) != d()) {
      throw std::invalid_argument("SampleSet::translated: dimension mismatch");
    }
    Matrix m = data_.rowwise() + v.transpose();
    return SampleSet(std::move(m));
  }

  SampleSet scaled(double c) const { return SampleSet(data_ * c); }

  Vector mean() const { return data_.colwise().mean().transpose(); }

 private:
  Matrix data_;
};

}  // namespace ecfmean
