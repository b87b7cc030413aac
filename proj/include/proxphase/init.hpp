#ifndef PROXPHASE_INIT_HPP
#define PROXPHASE_INIT_HPP

#include "proxphase/linalg.hpp"
#include "proxphase/rng.hpp"
#include "proxphase/sensing.hpp"

#include <string_view>

namespace proxphase {

/// x0 = r_hat * d_hat with d_hat a unit direction and r_hat >= 0.
struct InitEstimate {
  double r_hat = 0.0;
  Vector d_hat;
  Vector x0;
};

enum class InitKind { Noiseless, Outlier, Big, Median };

std::string_view to_string(InitKind kind);
InitKind parse_init_kind(std::string_view name);

/// Eigen-solve settings used by every initializer.
inline constexpr PowerIterationSettings kInitEigenSettings{1e-6, 20000};

/// Spectral initializer for exact data.
///
/// r^2 = mean(b); keeps measurements with b_i <= r^2 / 2 and takes the
/// direction least aligned with them, i.e. the bottom eigenvector of their
/// Gram matrix.
InitEstimate init_noiseless(const MeasurementEnsemble &ensemble,
                            const Vector &b, SeededRng &rng);

/// Outlier-tolerant initializer: median selection for the direction, a
/// robust L1 fit for the radius (see radius_estimate).
InitEstimate init_outlier(const MeasurementEnsemble &ensemble, const Vector &b,
                          SeededRng &rng);

/// Exact minimizer of G(r) = sum_i |b_i - r c_i| over r, for c_i >= 0.
///
/// Terms with c_i <= 1e-12 max(c) only add a constant and are dropped. The
/// minimizer is a weighted median of b_i / c_i with weights c_i; when the
/// minimizing set is an interval its midpoint is returned.
double weighted_median_fit(const Vector &b, const Vector &c);

/// r_hat^2 = argmin_r (1/m) sum_i |b_i - r <a_i, d_hat>^2|.
double radius_estimate(const MeasurementEnsemble &ensemble, const Vector &b,
                       const Vector &d_hat);

/// Top eigenvector of sum_{i in I0} a_i a_i^T / ||a_i||^2 where I0 holds the
/// top sixth of b_i / ||a_i||^2; radius sqrt(mean(b)).
InitEstimate init_big(const MeasurementEnsemble &ensemble, const Vector &b,
                      SeededRng &rng);

/// Median-truncated spectral initializer. r^2 = median(b) / 0.455 and
/// I0 = {i : |b_i| <= 9 median(b)}; the direction is the top eigenvector of
/// sum_{i in I0} b_i a_i a_i^T.
InitEstimate init_median(const MeasurementEnsemble &ensemble, const Vector &b,
                         SeededRng &rng);

InitEstimate run_init(InitKind kind, const MeasurementEnsemble &ensemble,
                      const Vector &b, SeededRng &rng);

} // namespace proxphase

#endif // PROXPHASE_INIT_HPP
