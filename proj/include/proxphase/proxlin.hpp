#ifndef PROXPHASE_PROXLIN_HPP
#define PROXPHASE_PROXLIN_HPP

#include "proxphase/pogs.hpp"
#include "proxphase/rng.hpp"
#include "proxphase/sensing.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace proxphase {

/// f(x) = (1/m) sum_i |<a_i, x>^2 - b_i|
double objective(const MeasurementEnsemble &ensemble, const Vector &b,
                 const Vector &x);

/// Convex model of f linearized at x0:
///   f_x0(y) = (1/m) sum_i |<a_i, x0>^2 - b_i + 2 <a_i, x0> <a_i, y - x0>|
double model_value(const MeasurementEnsemble &ensemble, const Vector &b,
                   const Vector &x0, const Vector &y);

/// The prox-linear step at x0,
///
///   minimize_y  f_x0(y) + (L/2) ||y - x0||^2,
///
/// in the variable u = sqrt(L) (y - x0), where it reads
///
///   minimize_u  ||B u - c||_1 + 1/2 ||u||^2
///
/// with B = diag(2 <a_i, x0> / (m sqrt(L))) A and c_i = (b_i - <a_i, x0>^2) / m.
///
/// Holds a pointer to the ensemble, which must outlive it.
struct CanonicalSubproblem {
  const MeasurementEnsemble *ensemble = nullptr;
  Vector scale; // row scaling of A
  Vector c;
  Vector x0;
  double L = 0.0;

  Index rows() const { return c.size(); }
  Index cols() const { return x0.size(); }

  Vector apply(const Vector &u) const;
  Vector adjoint(const Vector &z) const;
  LinearMap map() const;
  /// B as an explicit m x n matrix.
  Matrix dense_matrix() const;

  Vector back_map(const Vector &u) const;
  double objective(const Vector &u) const;
};

CanonicalSubproblem canonicalize(const MeasurementEnsemble &ensemble,
                                 const Vector &b, const Vector &x0, double L);

enum class ProjectorKind { Automatic, DenseFactor, MatrixFree };

std::string_view to_string(ProjectorKind kind);
ProjectorKind parse_projector_kind(std::string_view name);

struct ProxLinearConfig {
  /// Defaults to 2 ||A^T A|| / m.
  std::optional<double> L;
  /// Phase two stops once ||x_{k-1} - x_k|| <= outer_tol / L.
  double outer_tol = 1e-5;
  int max_outer = 50;
  struct Phase1 {
    double inner_eps = 1e-5;
    /// Phase one ends once ||x_k - x_{k+1}|| <= delta / (||A^T A|| / m).
    double delta = 1e-3;
    int max_outer = 25;
  } phase1;
  struct Phase2 {
    double inner_eps = 1e-8;
  } phase2;
  PogsConfig inner;
  /// Automatic: dense factorization for dense ensembles, CG otherwise.
  ProjectorKind projector = ProjectorKind::Automatic;
  bool warm_start = true;
  bool record_iterates = false;

  void validate() const;
};

enum class Termination { Converged, MaxOuter, InnerFailure };

std::string_view to_string(Termination reason);

struct OuterIteration {
  int phase = 1;
  double step_norm = 0.0;
  double objective = 0.0; // f(x_{k+1})
  int inner_iterations = 0;
  long projections = 0;
  long cg_iterations = 0;
  long matvecs = 0;
  bool inner_converged = true;
  bool objective_increased = false;
};

struct SolveReport {
  Vector final_x;
  int outer_iters = 0;
  double L = 0.0;
  double opnorm_over_m = 0.0;
  double initial_objective = 0.0;
  std::vector<OuterIteration> iterations;
  /// x_0, x_1, ... when config.record_iterates is set.
  std::vector<Vector> iterates;
  Termination reason = Termination::MaxOuter;
  std::string detail;
  double wall_ms = 0.0;

  long total_inner_iterations() const;
  long total_matvecs() const;
  long total_projections() const;
  long total_cg_iterations() const;
};

/// Two-phase prox-linear method with POGS inner solves.
///
/// Phase one solves subproblems to accuracy phase1.inner_eps until the step
/// falls below phase1.delta / (||A^T A|| / m) or phase1.max_outer steps have
/// been taken; phase two uses phase2.inner_eps until the step falls below
/// outer_tol / L. Inner failures are tolerated (and flagged) in phase one and
/// end the solve in phase two.
SolveReport prox_linear_solve(const MeasurementEnsemble &ensemble,
                              const Vector &b, const Vector &x0,
                              const ProxLinearConfig &config, SeededRng &rng);

} // namespace proxphase

#endif // PROXPHASE_PROXLIN_HPP
