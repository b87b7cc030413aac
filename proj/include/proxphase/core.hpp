#ifndef PROXPHASE_CORE_HPP
#define PROXPHASE_CORE_HPP

// Small numerical primitives shared by every module: order statistics,
// sign-invariant distance, soft-thresholding and the Walsh-Hadamard transform.

#include "proxphase/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace proxphase {

/// Linearly interpolated order statistic.
///
/// With c_(1) <= ... <= c_(m) the sorted sample, interpolates between
/// c_(floor(m alpha)) and c_(ceil(m alpha)) with weight frac(m alpha).
/// Both indices are clamped to [1, m].
template <typename Derived>
typename Derived::Scalar quantile(const Eigen::DenseBase<Derived> &values,
                                  double alpha) {
  using Scalar = typename Derived::Scalar;
  if (values.size() == 0) {
    throw Error("quantile: empty sample");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error("quantile: alpha must lie in [0, 1]");
  }
  std::vector<Scalar> sorted(values.size());
  for (Index i = 0; i < values.size(); ++i) {
    sorted[static_cast<std::size_t>(i)] = values.derived().coeff(i);
  }
  std::sort(sorted.begin(), sorted.end());

  const auto m = static_cast<double>(sorted.size());
  const double pos = m * alpha;
  const auto clamp = [&](double k) {
    return static_cast<std::size_t>(std::clamp(k, 1.0, m)) - 1;
  };
  const double lo = std::floor(pos);
  const std::size_t i_lo = clamp(lo);
  const std::size_t i_hi = clamp(std::ceil(pos));
  if (i_lo == i_hi) {
    return sorted[i_lo];
  }
  const Scalar w = static_cast<Scalar>(pos - lo);
  return sorted[i_lo] + w * (sorted[i_hi] - sorted[i_lo]);
}

template <typename Derived>
typename Derived::Scalar median(const Eigen::DenseBase<Derived> &values) {
  return quantile(values, 0.5);
}

/// min(||x - x_star||, ||x + x_star||): distance to the solution set {+-x_star}.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar dist_to_signal(const Eigen::MatrixBase<DerivedA> &x,
                                         const Eigen::MatrixBase<DerivedB> &x_star) {
  require_same_size(x.size(), x_star.size(), "dist_to_signal");
  return std::min((x - x_star).norm(), (x + x_star).norm());
}

/// Elementwise center + sign(v - center) * max(|v - center| - kappa, 0).
template <typename DerivedV, typename DerivedC>
VectorX<typename DerivedV::Scalar>
soft_threshold(const Eigen::MatrixBase<DerivedV> &v,
               const Eigen::MatrixBase<DerivedC> &center,
               typename DerivedV::Scalar kappa) {
  using Scalar = typename DerivedV::Scalar;
  require_same_size(v.size(), center.size(), "soft_threshold");
  if (kappa < Scalar(0)) {
    throw Error("soft_threshold: kappa must be nonnegative");
  }
  const auto d = (v - center).array();
  return center + (d.sign() * (d.abs() - kappa).max(Scalar(0))).matrix();
}

constexpr bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

/// In-place normalized Walsh-Hadamard transform (Sylvester ordering).
/// The normalized matrix is symmetric and orthogonal, so the transform is
/// its own inverse.
template <typename Derived>
void fwht_inplace(Eigen::MatrixBase<Derived> &v) {
  using Scalar = typename Derived::Scalar;
  const Index n = v.size();
  if (!is_power_of_two(n)) {
    throw Error("fwht: length must be a power of two");
  }
  for (Index h = 1; h < n; h *= 2) {
    for (Index i = 0; i < n; i += 2 * h) {
      for (Index j = i; j < i + h; ++j) {
        const Scalar a = v.coeff(j);
        const Scalar b = v.coeff(j + h);
        v.coeffRef(j) = a + b;
        v.coeffRef(j + h) = a - b;
      }
    }
  }
  v *= Scalar(1) / std::sqrt(static_cast<Scalar>(n));
}

template <typename Derived>
VectorX<typename Derived::Scalar> fwht(const Eigen::MatrixBase<Derived> &v) {
  VectorX<typename Derived::Scalar> out = v;
  fwht_inplace(out);
  return out;
}

} // namespace proxphase

#endif // PROXPHASE_CORE_HPP
