#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace van {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Variance floor applied when a covariance is derived from a precision
/// matrix. Expectation formulas that divide by a marginal standard
/// deviation stay finite as the search distribution collapses.
inline constexpr double kMinVariance = 1e-12;

/// Smallest marginal standard deviation accepted by estimators that
/// divide by sigma (kMinSigma^2 == kMinVariance).
inline constexpr double kMinSigma = 1e-6;

template <typename Derived>
typename Derived::PlainObject symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.transpose()) / 2;
}

/// Symmetry to within a relative tolerance on the largest entry.
template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, static_cast<double>(m.cwiseAbs().maxCoeff()));
  const double skew = static_cast<double>((m - m.transpose()).cwiseAbs().maxCoeff());
  return skew <= rel_tol * scale;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace van
