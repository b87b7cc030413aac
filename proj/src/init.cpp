#include "proxphase/init.hpp"

#include "proxphase/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace proxphase {

namespace {

SymmetricOperator weighted_gram(const MeasurementEnsemble &ensemble,
                                Vector weights) {
  return {ensemble.cols(),
          [&ensemble, w = std::move(weights)](const Vector &v) {
            return weighted_gram_apply(ensemble, w, v);
          }};
}

InitEstimate make_estimate(double r_hat, Vector d_hat) {
  d_hat.normalize();
  Vector x0 = r_hat * d_hat;
  return {r_hat, std::move(d_hat), std::move(x0)};
}

void check_observations(const MeasurementEnsemble &ensemble, const Vector &b,
                        const char *who) {
  require_same_size(b.size(), ensemble.rows(), who);
  if (!b.allFinite()) {
    throw Error(std::string(who) + ": non-finite observations");
  }
}

} // namespace

std::string_view to_string(InitKind kind) {
  switch (kind) {
  case InitKind::Noiseless:
    return "noiseless";
  case InitKind::Outlier:
    return "outlier";
  case InitKind::Big:
    return "big";
  case InitKind::Median:
    return "median";
  }
  return "unknown";
}

InitKind parse_init_kind(std::string_view name) {
  for (InitKind k : {InitKind::Noiseless, InitKind::Outlier, InitKind::Big,
                     InitKind::Median}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  throw Error("unknown init '" + std::string(name) + "'");
}

InitEstimate init_noiseless(const MeasurementEnsemble &ensemble,
                            const Vector &b, SeededRng &rng) {
  check_observations(ensemble, b, "init_noiseless");
  const double r2 = b.mean();
  if (!(r2 > 0.0)) {
    throw Error("init_noiseless: mean observation must be positive");
  }
  const Mask selected = b.array() <= 0.5 * r2;
  if (!selected.any()) {
    throw Error("init_noiseless: degenerate selection");
  }
  Vector d = extreme_eigenvector(
      weighted_gram(ensemble, selected.cast<double>().matrix()),
      Spectrum::Smallest, rng, kInitEigenSettings);
  return make_estimate(std::sqrt(r2), std::move(d));
}

double weighted_median_fit(const Vector &b, const Vector &c) {
  require_same_size(b.size(), c.size(), "weighted_median_fit");
  if (c.size() == 0 || (c.array() < 0.0).any()) {
    throw Error("weighted_median_fit: weights must be nonnegative");
  }
  const double c_tol = 1e-12 * c.maxCoeff();
  std::vector<std::pair<double, double>> terms; // (ratio, weight)
  terms.reserve(static_cast<std::size_t>(c.size()));
  for (Index i = 0; i < c.size(); ++i) {
    if (c(i) > c_tol) {
      terms.emplace_back(b(i) / c(i), c(i));
    }
  }
  if (terms.empty()) {
    throw Error("weighted_median_fit: all weights vanish");
  }
  std::sort(terms.begin(), terms.end());

  double total = 0.0;
  for (const auto &t : terms) {
    total += t.second;
  }
  // The slope of G on (t_k, t_{k+1}) is 2 S_k - W, with S_k the cumulative
  // weight. The first k with 2 S_k >= W is a minimizer; a zero slope makes
  // the whole interval [t_k, t_{k+1}] optimal.
  const double flat_tol = 8.0 * std::numeric_limits<double>::epsilon() * total;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    cumulative += terms[k].second;
    const double slope = 2.0 * cumulative - total;
    if (std::abs(slope) <= flat_tol && k + 1 < terms.size()) {
      return 0.5 * (terms[k].first + terms[k + 1].first);
    }
    if (slope > 0.0) {
      return terms[k].first;
    }
  }
  return terms.back().first;
}

double radius_estimate(const MeasurementEnsemble &ensemble, const Vector &b,
                       const Vector &d_hat) {
  check_observations(ensemble, b, "radius_estimate");
  require_same_size(d_hat.size(), ensemble.cols(), "radius_estimate");
  const Vector c = ensemble.apply(d_hat).array().square().matrix();
  return weighted_median_fit(b, c);
}

InitEstimate init_outlier(const MeasurementEnsemble &ensemble, const Vector &b,
                          SeededRng &rng) {
  check_observations(ensemble, b, "init_outlier");
  if (b.size() < 2) {
    throw Error("init_outlier: need at least two measurements");
  }
  const Mask selected = b.array() <= median(b);
  Vector d = extreme_eigenvector(
      weighted_gram(ensemble, selected.cast<double>().matrix()),
      Spectrum::Smallest, rng, kInitEigenSettings);
  d.normalize();
  const double r2 = radius_estimate(ensemble, b, d);
  return make_estimate(std::sqrt(std::max(r2, 0.0)), std::move(d));
}

InitEstimate init_big(const MeasurementEnsemble &ensemble, const Vector &b,
                      SeededRng &rng) {
  check_observations(ensemble, b, "init_big");
  const Vector norms2 = ensemble.row_norms_squared();
  if ((norms2.array() <= 0.0).any()) {
    throw Error("init_big: zero measurement row");
  }
  const Vector ratios = b.cwiseQuotient(norms2);
  const double threshold = quantile(ratios, 5.0 / 6.0);
  const Mask selected = ratios.array() >= threshold;
  if (!selected.any()) {
    throw Error("init_big: empty selection");
  }
  const double r2 = b.mean();
  if (!(r2 > 0.0)) {
    throw Error("init_big: mean observation must be positive");
  }
  const Vector weights =
      selected.select(norms2.cwiseInverse().array(), 0.0).matrix();
  Vector d = extreme_eigenvector(weighted_gram(ensemble, weights),
                                 Spectrum::Largest, rng, kInitEigenSettings);
  return make_estimate(std::sqrt(r2), std::move(d));
}

InitEstimate init_median(const MeasurementEnsemble &ensemble, const Vector &b,
                         SeededRng &rng) {
  check_observations(ensemble, b, "init_median");
  const double med = median(b);
  const double r2 = med / 0.455;
  if (!(r2 > 0.0)) {
    throw Error("init_median: median observation must be positive");
  }
  const double lambda0 = med;
  const Mask selected = b.array().abs() <= 9.0 * lambda0;
  if (!selected.any()) {
    throw Error("init_median: empty selection");
  }
  const Vector weights = selected.select(b.array(), 0.0).matrix();
  Vector d = extreme_eigenvector(weighted_gram(ensemble, weights),
                                 Spectrum::Largest, rng, kInitEigenSettings);
  return make_estimate(std::sqrt(r2), std::move(d));
}

InitEstimate run_init(InitKind kind, const MeasurementEnsemble &ensemble,
                      const Vector &b, SeededRng &rng) {
  switch (kind) {
  case InitKind::Noiseless:
    return init_noiseless(ensemble, b, rng);
  case InitKind::Outlier:
    return init_outlier(ensemble, b, rng);
  case InitKind::Big:
    return init_big(ensemble, b, rng);
  case InitKind::Median:
    return init_median(ensemble, b, rng);
  }
  throw Error("run_init: unknown init kind");
}

} // namespace proxphase
