#ifndef PROXPHASE_LINALG_HPP
#define PROXPHASE_LINALG_HPP

// Matrix-free symmetric eigen- and linear solvers.

#include "proxphase/rng.hpp"
#include "proxphase/types.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <utility>

namespace proxphase {

/// A symmetric linear map R^n -> R^n given only through its action.
template <typename Scalar>
struct BasicSymmetricOperator {
  Index dim = 0;
  std::function<VectorX<Scalar>(const VectorX<Scalar> &)> apply;

  VectorX<Scalar> operator()(const VectorX<Scalar> &v) const {
    require_same_size(v.size(), dim, "SymmetricOperator");
    return apply(v);
  }

  /// Wraps an explicit symmetric matrix. The matrix is copied.
  template <typename Derived>
  static BasicSymmetricOperator from_matrix(const Eigen::MatrixBase<Derived> &a) {
    MatrixX<Scalar> m = a;
    const Index n = m.rows();
    return {n, [m = std::move(m)](const VectorX<Scalar> &v) -> VectorX<Scalar> {
              return m * v;
            }};
  }

  /// op + shift * I
  BasicSymmetricOperator shifted(Scalar shift) const {
    return {dim, [op = apply, shift](const VectorX<Scalar> &v) -> VectorX<Scalar> {
              return op(v) + shift * v;
            }};
  }

  /// shift * I - op
  BasicSymmetricOperator reflected(Scalar shift) const {
    return {dim, [op = apply, shift](const VectorX<Scalar> &v) -> VectorX<Scalar> {
              return shift * v - op(v);
            }};
  }
};

using SymmetricOperator = BasicSymmetricOperator<double>;

template <typename Scalar>
struct EigenPair {
  Scalar value;
  VectorX<Scalar> vector;
  int iterations;
};

struct PowerIterationSettings {
  double tol = 1e-8;
  int max_iter = 5000;
};

/// Power iteration for the dominant eigenpair of a symmetric operator.
///
/// Stops once ||op(v) - lambda v|| <= tol * max(|lambda|, 1) with lambda the
/// Rayleigh quotient of the unit iterate v. The start vector is a uniform
/// random direction drawn from `rng`.
template <typename Scalar>
EigenPair<Scalar> power_iteration(const BasicSymmetricOperator<Scalar> &op,
                                  SeededRng &rng,
                                  PowerIterationSettings settings = {}) {
  if (op.dim <= 0) {
    throw Error("power_iteration: empty operator");
  }
  if (!(settings.tol > 0)) {
    throw Error("power_iteration: tol must be positive");
  }
  VectorX<Scalar> v = rng.unit_vector<Scalar>(op.dim);
  VectorX<Scalar> best = v;
  Scalar best_residual = std::numeric_limits<Scalar>::infinity();
  for (int it = 1; it <= settings.max_iter; ++it) {
    VectorX<Scalar> w = op(v);
    const Scalar lambda = v.dot(w);
    const Scalar residual = (w - lambda * v).norm();
    if (residual < best_residual) {
      best_residual = residual;
      best = v;
    }
    if (residual <= static_cast<Scalar>(settings.tol) *
                        std::max<Scalar>(std::abs(lambda), Scalar(1))) {
      return {lambda, std::move(v), it};
    }
    const Scalar wn = w.norm();
    if (wn == Scalar(0)) {
      // v lies in the null space and the residual test already passed.
      return {Scalar(0), std::move(v), it};
    }
    v = w / wn;
  }
  throw BasicConvergenceError<Scalar>("power_iteration: no convergence", best,
                                      best_residual, settings.max_iter);
}

enum class Spectrum { Largest, Smallest };

/// Unit eigenvector for the largest or smallest eigenvalue.
///
/// Smallest: a first power iteration estimates the dominant magnitude s; the
/// top eigenvector of (1.01 s) I - op is then returned. Largest: when the
/// dominant eigenvalue turns out negative (indefinite op), the same shift is
/// applied as op + 1.01 s I.
template <typename Scalar>
VectorX<Scalar> extreme_eigenvector(const BasicSymmetricOperator<Scalar> &op,
                                    Spectrum which, SeededRng &rng,
                                    PowerIterationSettings settings = {}) {
  EigenPair<Scalar> dominant = power_iteration(op, rng, settings);
  const Scalar shift = Scalar(1.01) * std::abs(dominant.value);
  if (which == Spectrum::Largest) {
    if (dominant.value >= Scalar(0)) {
      return std::move(dominant.vector);
    }
    return power_iteration(op.shifted(shift), rng, settings).vector;
  }
  if (shift == Scalar(0)) {
    // op vanishes; every direction is extremal.
    return std::move(dominant.vector);
  }
  return power_iteration(op.reflected(shift), rng, settings).vector;
}

template <typename Scalar>
struct CgResult {
  VectorX<Scalar> x;
  int iterations;
  Scalar residual_norm;
};

/// Unpreconditioned conjugate gradients for a symmetric positive definite op.
/// Terminates when ||op(x) - rhs|| <= tol * ||rhs||.
template <typename Scalar>
CgResult<Scalar> conjugate_gradient(const BasicSymmetricOperator<Scalar> &op,
                                    const VectorX<Scalar> &rhs, Scalar tol,
                                    int max_iter,
                                    const VectorX<Scalar> *warm = nullptr) {
  require_same_size(rhs.size(), op.dim, "conjugate_gradient");
  const Scalar rhs_norm = rhs.norm();
  if (rhs_norm == Scalar(0)) {
    return {VectorX<Scalar>::Zero(op.dim), 0, Scalar(0)};
  }
  const Scalar target = tol * rhs_norm;

  VectorX<Scalar> x;
  VectorX<Scalar> r;
  if (warm != nullptr) {
    require_same_size(warm->size(), op.dim, "conjugate_gradient warm start");
    x = *warm;
    r = rhs - op(x);
  } else {
    x = VectorX<Scalar>::Zero(op.dim);
    r = rhs;
  }
  Scalar rr = r.squaredNorm();
  if (std::sqrt(rr) <= target) {
    return {std::move(x), 0, std::sqrt(rr)};
  }
  VectorX<Scalar> p = r;
  for (int it = 1; it <= max_iter; ++it) {
    const VectorX<Scalar> ap = op(p);
    const Scalar pap = p.dot(ap);
    if (!(pap > Scalar(0))) {
      throw BasicConvergenceError<Scalar>(
          "conjugate_gradient: operator is not positive definite", x,
          std::sqrt(rr), it);
    }
    const Scalar step = rr / pap;
    x += step * p;
    r -= step * ap;
    const Scalar rr_next = r.squaredNorm();
    if (std::sqrt(rr_next) <= target) {
      // The recursive residual can drift; accept only on the true one.
      const Scalar true_res = (rhs - op(x)).norm();
      if (true_res <= target) {
        return {std::move(x), it, true_res};
      }
      r = rhs - op(x);
      rr = r.squaredNorm();
      p = r;
      continue;
    }
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  throw BasicConvergenceError<Scalar>("conjugate_gradient: no convergence", x,
                                      std::sqrt(rr), max_iter);
}

} // namespace proxphase

#endif // PROXPHASE_LINALG_HPP
