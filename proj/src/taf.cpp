#include "proxphase/taf.hpp"

namespace proxphase {

void TafConfig::validate() const {
  if (!(gamma > 0)) {
    throw Error("TafConfig: gamma must be positive");
  }
  if (!(alpha > 0 && alpha <= 1)) {
    throw Error("TafConfig: alpha must lie in (0, 1]");
  }
  if (iterations < 1) {
    throw Error("TafConfig: need at least one iteration");
  }
}

Vector taf_step(const MeasurementEnsemble &ensemble, const Vector &psi,
                const Vector &x, const TafConfig &config) {
  const Vector ax = ensemble.apply(x);
  const auto mag = ax.array().abs();
  const auto keep = (mag >= psi.array() / (1.0 + config.gamma)) && (mag > 0.0);
  const Vector residual =
      keep.select(ax.array() - psi.array() * ax.array().sign(), 0.0).matrix();
  return x - (config.alpha / static_cast<double>(ensemble.rows())) *
                 ensemble.apply_adjoint(residual);
}

Vector taf_solve(const MeasurementEnsemble &ensemble, const Vector &b,
                 const Vector &x0, const TafConfig &config) {
  config.validate();
  require_same_size(b.size(), ensemble.rows(), "taf_solve");
  require_same_size(x0.size(), ensemble.cols(), "taf_solve");
  if ((b.array() < 0.0).any()) {
    throw Error("taf_solve: observations must be nonnegative");
  }
  const Vector psi = b.cwiseSqrt();
  Vector x = x0;
  for (int k = 0; k < config.iterations; ++k) {
    x = taf_step(ensemble, psi, x, config);
  }
  return x;
}

} // namespace proxphase
