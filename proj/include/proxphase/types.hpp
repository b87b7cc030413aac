#ifndef PROXPHASE_TYPES_HPP
#define PROXPHASE_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace proxphase {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;
using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a vector or operator has the wrong size for the call.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of iterations. The best iterate found so far
/// is carried along so callers can decide whether it is good enough.
template <typename Scalar>
class BasicConvergenceError : public Error {
 public:
  BasicConvergenceError(const std::string &what, VectorX<Scalar> best,
                        Scalar residual, int iterations)
      : Error(what), best_(std::move(best)), residual_(residual),
        iterations_(iterations) {}

  const VectorX<Scalar> &best_iterate() const { return best_; }
  Scalar residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  VectorX<Scalar> best_;
  Scalar residual_;
  int iterations_;
};

using ConvergenceError = BasicConvergenceError<double>;

inline void require_same_size(Index a, Index b, const char *what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": size mismatch (" +
                         std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

} // namespace proxphase

#endif // PROXPHASE_TYPES_HPP
