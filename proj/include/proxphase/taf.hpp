#ifndef PROXPHASE_TAF_HPP
#define PROXPHASE_TAF_HPP

#include "proxphase/sensing.hpp"

namespace proxphase {

struct TafConfig {
  double gamma = 0.7;
  double alpha = 0.6;
  int iterations = 1000;

  void validate() const;
};

/// Truncated amplitude flow on the amplitudes psi_i = sqrt(b_i).
///
/// Each step keeps I_k = {i : |<a_i, x>| >= psi_i / (1 + gamma)} and moves
///   x <- x - (alpha / m) sum_{i in I_k} (<a_i, x> - psi_i sign<a_i, x>) a_i.
/// Rows with <a_i, x> = 0 are left out of I_k.
Vector taf_solve(const MeasurementEnsemble &ensemble, const Vector &b,
                 const Vector &x0, const TafConfig &config = {});

/// One TAF update from x.
Vector taf_step(const MeasurementEnsemble &ensemble, const Vector &psi,
                const Vector &x, const TafConfig &config);

} // namespace proxphase

#endif // PROXPHASE_TAF_HPP
