#ifndef PROXPHASE_SENSING_HPP
#define PROXPHASE_SENSING_HPP

#include "proxphase/rng.hpp"
#include "proxphase/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

namespace proxphase {

/// Explicit m x n sensing matrix; row i is the measurement vector a_i.
struct DenseSensing {
  Matrix a;
};

/// A = [H S_1; H S_2; ...; H S_k] with H the normalized n x n Hadamard
/// matrix and S_l = diag(signs.col(l)). Never materialized.
struct HadamardSensing {
  Matrix signs; // n x k, entries +-1
};

/// The sensing operator x -> Ax and its adjoint.
///
/// Immutable after construction; apply and apply_adjoint are reentrant, so
/// one ensemble can be shared by concurrent trials.
class MeasurementEnsemble {
 public:
  explicit MeasurementEnsemble(DenseSensing dense);
  explicit MeasurementEnsemble(HadamardSensing hadamard);

  Index rows() const; // m
  Index cols() const; // n

  bool is_dense() const { return std::holds_alternative<DenseSensing>(impl_); }
  bool is_hadamard() const {
    return std::holds_alternative<HadamardSensing>(impl_);
  }

  /// Throws unless the ensemble is dense.
  const Matrix &matrix() const;
  /// Throws unless the ensemble is a Hadamard stack. n x k.
  const Matrix &sign_diagonals() const;
  Index stack_count() const;

  Vector apply(const Vector &x) const;
  Vector apply_adjoint(const Vector &z) const;

  /// ||a_i||^2 for every row.
  Vector row_norms_squared() const;

  /// Explicit m x n matrix (dense copy, or assembled from the transform).
  Matrix materialize() const;

 private:
  std::variant<DenseSensing, HadamardSensing> impl_;
};

/// i.i.d. N(0, 1) entries, drawn row by row.
MeasurementEnsemble gen_gaussian_ensemble(Index m, Index n, SeededRng &rng);

/// k stacked randomized Hadamard blocks with i.i.d. uniform +-1 diagonals.
MeasurementEnsemble gen_hadamard_ensemble(Index k, Index n, SeededRng &rng);

enum class SignalMode { Rademacher, Gaussian, FromFile };

struct GroundTruth {
  Vector x_star;
  SignalMode mode = SignalMode::Gaussian;
};

GroundTruth gen_signal(Index n, SignalMode mode, SeededRng &rng);

enum class CorruptionKind { Zero, Cauchy, Constant };

/// Only metadata: no adversary is synthesized for the dependent model.
enum class CorruptionModel { Independent, AdversarialCapable };

struct CorruptionSpec {
  double p_fail = 0.0;
  CorruptionKind kind = CorruptionKind::Zero;
  double constant_value = 0.0;
  CorruptionModel model = CorruptionModel::Independent;

  void validate() const;
  /// floor(p_fail * m)
  Index outlier_count(Index m) const;
};

struct Observations {
  Vector b;
  Mask outlier_mask;
  CorruptionSpec spec;
  std::optional<GroundTruth> truth;
};

/// b_i = <a_i, x_star>^2.
Vector measure(const MeasurementEnsemble &ensemble, const Vector &x_star);

/// Replaces floor(p_fail m) entries, chosen uniformly without replacement,
/// according to spec.kind. Cauchy values are not clipped.
Observations corrupt(const Vector &b, const CorruptionSpec &spec,
                     SeededRng &rng);

struct NormalizedProblem {
  MeasurementEnsemble ensemble;
  Vector b;
};

/// Rows scaled to unit norm, b_i scaled by 1 / ||a_i||^2. Dense only.
NormalizedProblem normalize_measurements(const MeasurementEnsemble &ensemble,
                                         const Vector &b);

/// ||A^T A||_op / m, by power iteration (tol 1e-6).
double operator_norm_over_m(const MeasurementEnsemble &ensemble,
                            SeededRng &rng);

/// (1/m) A^T diag(weights) A v
Vector weighted_gram_apply(const MeasurementEnsemble &ensemble,
                           const Vector &weights, const Vector &v);

/// (1/m) A^T (mask .* A v)
Vector masked_gram_apply(const MeasurementEnsemble &ensemble, const Mask &mask,
                         const Vector &v);

enum class SignalFormat { Csv, Pgm };

/// Reads a signal from disk. CSV: one real per line. PGM: binary P5,
/// maxval 255, pixels mapped to [0, 1] in row-major order. When target_n is
/// larger than the data the vector is zero-padded.
GroundTruth ingest_signal(const std::filesystem::path &path,
                          SignalFormat format,
                          std::optional<Index> target_n = std::nullopt);

} // namespace proxphase

#endif // PROXPHASE_SENSING_HPP
