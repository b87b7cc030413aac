#ifndef PROXPHASE_POGS_HPP
#define PROXPHASE_POGS_HPP

// Proximal operator graph splitting for
//
//   minimize_u  ||B u - c||_1 + 1/2 ||u||^2,
//
// written as f(x) + g(y) subject to B x = y, with f = 1/2 ||.||^2 and
// g = ||. - c||_1.

#include "proxphase/types.hpp"

#include <Eigen/Cholesky>

#include <functional>
#include <optional>

namespace proxphase {

/// A linear map R^cols -> R^rows with its adjoint.
struct LinearMap {
  Index rows = 0;
  Index cols = 0;
  std::function<Vector(const Vector &)> apply;
  std::function<Vector(const Vector &)> adjoint;

  static LinearMap from_matrix(const Matrix &b);
};

struct PogsConfig {
  /// Initial penalty.
  double rho = 1.0;
  /// Residual balancing: rho is multiplied or divided by rho_factor whenever
  /// one scaled residual exceeds the other by rho_balance.
  bool adaptive_rho = true;
  double rho_balance = 10.0;
  double rho_factor = 2.0;
  double eps = 1e-5;
  int max_iter = 20000;
  double cg_tol = 1e-6;
  int cg_max_iter = 500;

  void validate() const;
};

/// Primal iterates (x, y) and duals (lambda, nu) scaled by 1 / rho.
struct PogsState {
  Vector x;
  Vector y;
  Vector lambda;
  Vector nu;
  int iterations = 0;
  /// Penalty the duals are scaled by; 0 means config.rho.
  double rho = 0.0;

  static PogsState zeros(Index n, Index m);
};

struct ProjectorStats {
  long projections = 0;
  long cg_iterations = 0;
  long matvecs = 0; // applications of B or B^T
};

struct GraphProjection {
  Vector x;
  Vector y;
};

/// Projection onto {(x, y) : y = B x}: x = (I + B^T B)^{-1} v, y = B x.
///
/// DenseFactor keeps a Cholesky factorization of I + B^T B. MatrixFree runs
/// unpreconditioned CG on v -> v + B^T B v, warm-started from the previous
/// solution.
class GraphProjector {
 public:
  static GraphProjector dense(Matrix b);
  static GraphProjector matrix_free(LinearMap b, double cg_tol,
                                    int cg_max_iter);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  bool is_dense() const { return dense_.has_value(); }

  Vector apply(const Vector &x);
  Vector adjoint(const Vector &y);
  GraphProjection project(const Vector &v);

  const ProjectorStats &stats() const { return stats_; }

 private:
  struct Dense {
    Matrix b;
    Eigen::LLT<Matrix> factor;
  };
  struct MatrixFree {
    LinearMap b;
    double cg_tol;
    int cg_max_iter;
    Vector warm;
  };

  GraphProjector() = default;

  Index rows_ = 0;
  Index cols_ = 0;
  std::optional<Dense> dense_;
  std::optional<MatrixFree> free_;
  ProjectorStats stats_;
};

struct PogsResult {
  Vector u;
  PogsState state;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  /// Dual-feasible certificate clip(-rho nu, [-1, 1]) for duality_gap.
  Vector dual_certificate;
};

/// Raised when max_iter is reached; carries the last state.
class PogsError : public Error {
 public:
  PogsError(const std::string &what, PogsResult partial)
      : Error(what), partial_(std::move(partial)) {}
  const PogsResult &partial() const { return partial_; }

 private:
  PogsResult partial_;
};

/// Runs the POGS iteration until both residual tests hold:
///   ||r_pri||  < eps (sqrt(n) + max(||x||, ||y||))
///   ||r_dual|| < eps (sqrt(n) + rho max(||lambda||, ||nu||))
/// The dual test uses the unscaled duals rho lambda and rho nu, which reduces
/// to the plain scaled form at rho = 1.
PogsResult pogs_solve(GraphProjector &projector, const Vector &c,
                      const PogsConfig &config,
                      const PogsState *warm = nullptr);

/// ||B u - c||_1 + 1/2 ||u||^2
double canonical_objective(const LinearMap &b, const Vector &c, const Vector &u);

/// p(u) - d(g) with d(g) = -1/2 ||B^T g||^2 - g^T c, for ||g||_inf <= 1.
double duality_gap(const LinearMap &b, const Vector &c, const Vector &u,
                   const Vector &g);

} // namespace proxphase

#endif // PROXPHASE_POGS_HPP
