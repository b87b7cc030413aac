#include "proxphase/proxlin.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace proxphase {

double objective(const MeasurementEnsemble &ensemble, const Vector &b,
                 const Vector &x) {
  require_same_size(b.size(), ensemble.rows(), "objective");
  require_same_size(x.size(), ensemble.cols(), "objective");
  const Vector ax = ensemble.apply(x);
  return (ax.array().square() - b.array()).abs().sum() /
         static_cast<double>(b.size());
}

double model_value(const MeasurementEnsemble &ensemble, const Vector &b,
                   const Vector &x0, const Vector &y) {
  require_same_size(b.size(), ensemble.rows(), "model_value");
  require_same_size(x0.size(), ensemble.cols(), "model_value");
  require_same_size(y.size(), ensemble.cols(), "model_value");
  const Vector ax = ensemble.apply(x0);
  const Vector ad = ensemble.apply(y - x0);
  return (ax.array().square() - b.array() + 2.0 * ax.array() * ad.array())
             .abs()
             .sum() /
         static_cast<double>(b.size());
}

Vector CanonicalSubproblem::apply(const Vector &u) const {
  return scale.cwiseProduct(ensemble->apply(u));
}

Vector CanonicalSubproblem::adjoint(const Vector &z) const {
  return ensemble->apply_adjoint(scale.cwiseProduct(z));
}

LinearMap CanonicalSubproblem::map() const {
  return {rows(), cols(), [this](const Vector &u) { return apply(u); },
          [this](const Vector &z) { return adjoint(z); }};
}

Matrix CanonicalSubproblem::dense_matrix() const {
  if (ensemble->is_dense()) {
    return scale.asDiagonal() * ensemble->matrix();
  }
  return scale.asDiagonal() * ensemble->materialize();
}

Vector CanonicalSubproblem::back_map(const Vector &u) const {
  return x0 + u / std::sqrt(L);
}

double CanonicalSubproblem::objective(const Vector &u) const {
  return (apply(u) - c).lpNorm<1>() + 0.5 * u.squaredNorm();
}

CanonicalSubproblem canonicalize(const MeasurementEnsemble &ensemble,
                                 const Vector &b, const Vector &x0, double L) {
  if (!(L > 0)) {
    throw Error("canonicalize: L must be positive");
  }
  require_same_size(b.size(), ensemble.rows(), "canonicalize");
  require_same_size(x0.size(), ensemble.cols(), "canonicalize");
  const double m = static_cast<double>(ensemble.rows());
  const Vector ax = ensemble.apply(x0);
  CanonicalSubproblem sub;
  sub.ensemble = &ensemble;
  sub.scale = (2.0 / (m * std::sqrt(L))) * ax;
  sub.c = (b.array() - ax.array().square()).matrix() / m;
  sub.x0 = x0;
  sub.L = L;
  return sub;
}

std::string_view to_string(ProjectorKind kind) {
  switch (kind) {
  case ProjectorKind::Automatic:
    return "auto";
  case ProjectorKind::DenseFactor:
    return "dense";
  case ProjectorKind::MatrixFree:
    return "cg";
  }
  return "unknown";
}

ProjectorKind parse_projector_kind(std::string_view name) {
  for (ProjectorKind k : {ProjectorKind::Automatic, ProjectorKind::DenseFactor,
                          ProjectorKind::MatrixFree}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  throw Error("unknown projector '" + std::string(name) + "'");
}

std::string_view to_string(Termination reason) {
  switch (reason) {
  case Termination::Converged:
    return "converged";
  case Termination::MaxOuter:
    return "max_outer";
  case Termination::InnerFailure:
    return "inner_failure";
  }
  return "unknown";
}

void ProxLinearConfig::validate() const {
  if (L && !(*L > 0)) {
    throw Error("ProxLinearConfig: L must be positive");
  }
  if (!(outer_tol > 0 && phase1.inner_eps > 0 && phase1.delta > 0 &&
        phase2.inner_eps > 0)) {
    throw Error("ProxLinearConfig: tolerances must be positive");
  }
  if (max_outer < 1 || phase1.max_outer < 0) {
    throw Error("ProxLinearConfig: iteration limits must be positive");
  }
  inner.validate();
}

long SolveReport::total_inner_iterations() const {
  long total = 0;
  for (const auto &it : iterations) {
    total += it.inner_iterations;
  }
  return total;
}

long SolveReport::total_matvecs() const {
  long total = 0;
  for (const auto &it : iterations) {
    total += it.matvecs;
  }
  return total;
}

long SolveReport::total_projections() const {
  long total = 0;
  for (const auto &it : iterations) {
    total += it.projections;
  }
  return total;
}

long SolveReport::total_cg_iterations() const {
  long total = 0;
  for (const auto &it : iterations) {
    total += it.cg_iterations;
  }
  return total;
}

namespace {

GraphProjector make_projector(const CanonicalSubproblem &sub,
                              ProjectorKind kind, const PogsConfig &inner) {
  if (kind == ProjectorKind::Automatic) {
    kind = sub.ensemble->is_dense() ? ProjectorKind::DenseFactor
                                    : ProjectorKind::MatrixFree;
  }
  if (kind == ProjectorKind::DenseFactor) {
    return GraphProjector::dense(sub.dense_matrix());
  }
  return GraphProjector::matrix_free(sub.map(), inner.cg_tol,
                                     inner.cg_max_iter);
}

} // namespace

SolveReport prox_linear_solve(const MeasurementEnsemble &ensemble,
                              const Vector &b, const Vector &x0,
                              const ProxLinearConfig &config, SeededRng &rng) {
  config.validate();
  require_same_size(b.size(), ensemble.rows(), "prox_linear_solve");
  require_same_size(x0.size(), ensemble.cols(), "prox_linear_solve");
  const auto start = std::chrono::steady_clock::now();

  SolveReport report;
  report.opnorm_over_m = operator_norm_over_m(ensemble, rng);
  report.L = config.L.value_or(2.0 * report.opnorm_over_m);
  const double phase1_step = config.phase1.delta / report.opnorm_over_m;
  const double final_step = config.outer_tol / report.L;

  Vector x = x0;
  double f = objective(ensemble, b, x);
  report.initial_objective = f;
  if (config.record_iterates) {
    report.iterates.push_back(x);
  }

  int phase = config.phase1.max_outer > 0 ? 1 : 2;
  int phase1_count = 0;
  std::optional<PogsState> carried;

  while (report.outer_iters < config.max_outer) {
    const CanonicalSubproblem sub = canonicalize(ensemble, b, x, report.L);
    GraphProjector projector = make_projector(sub, config.projector, config.inner);

    PogsConfig inner = config.inner;
    inner.eps = phase == 1 ? config.phase1.inner_eps : config.phase2.inner_eps;

    // The previous step is the first guess for the next one. lambda = -x / rho
    // is the fixed-point relation of the x-prox; y is put back on the graph
    // of the new B.
    PogsState warm = PogsState::zeros(sub.cols(), sub.rows());
    if (config.warm_start && carried) {
      warm.x = carried->x;
      warm.y = sub.apply(warm.x);
      warm.lambda = -warm.x / carried->rho;
      warm.nu = carried->nu;
      warm.rho = carried->rho;
    }

    OuterIteration record;
    record.phase = phase;
    PogsResult result;
    try {
      result = pogs_solve(projector, sub.c, inner, &warm);
    } catch (const PogsError &e) {
      record.inner_converged = false;
      result = e.partial();
      if (phase == 2) {
        record.inner_iterations = result.iterations;
        record.projections = projector.stats().projections;
        record.cg_iterations = projector.stats().cg_iterations;
        record.matvecs = projector.stats().matvecs;
        report.iterations.push_back(record);
        report.reason = Termination::InnerFailure;
        report.detail = e.what();
        break;
      }
    } catch (const ConvergenceError &e) {
      report.reason = Termination::InnerFailure;
      report.detail = e.what();
      break;
    }
    carried = result.state;

    const Vector x_next = sub.back_map(result.u);
    const double f_next = objective(ensemble, b, x_next);
    record.step_norm = (x_next - x).norm();
    record.objective = f_next;
    record.objective_increased = f_next > f;
    record.inner_iterations = result.iterations;
    record.projections = projector.stats().projections;
    record.cg_iterations = projector.stats().cg_iterations;
    record.matvecs = projector.stats().matvecs;
    report.iterations.push_back(record);
    ++report.outer_iters;

    x = x_next;
    f = f_next;
    if (config.record_iterates) {
      report.iterates.push_back(x);
    }
    if (!std::isfinite(record.step_norm)) {
      report.reason = Termination::InnerFailure;
      report.detail = "non-finite step";
      break;
    }

    if (phase == 1) {
      ++phase1_count;
      if (record.step_norm <= phase1_step ||
          phase1_count >= config.phase1.max_outer) {
        phase = 2;
      }
    } else if (record.step_norm <= final_step) {
      report.reason = Termination::Converged;
      break;
    }
  }
  report.final_x = std::move(x);
  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return report;
}

} // namespace proxphase
