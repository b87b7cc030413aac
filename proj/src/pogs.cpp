#include "proxphase/pogs.hpp"

#include "proxphase/core.hpp"
#include "proxphase/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace proxphase {

LinearMap LinearMap::from_matrix(const Matrix &b) {
  auto shared = std::make_shared<const Matrix>(b);
  return {b.rows(), b.cols(),
          [shared](const Vector &x) -> Vector { return *shared * x; },
          [shared](const Vector &y) -> Vector {
            return shared->transpose() * y;
          }};
}

void PogsConfig::validate() const {
  if (!(rho > 0 && eps > 0 && max_iter > 0 && cg_tol > 0 && cg_max_iter > 0)) {
    throw Error("PogsConfig: all parameters must be positive");
  }
  if (adaptive_rho && !(rho_balance > 1 && rho_factor > 1)) {
    throw Error("PogsConfig: rho_balance and rho_factor must exceed 1");
  }
}

PogsState PogsState::zeros(Index n, Index m) {
  return {Vector::Zero(n), Vector::Zero(m), Vector::Zero(n), Vector::Zero(m), 0, 0.0};
}

GraphProjector GraphProjector::dense(Matrix b) {
  GraphProjector p;
  p.rows_ = b.rows();
  p.cols_ = b.cols();
  Matrix gram = Matrix::Identity(b.cols(), b.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(b.transpose());
  Eigen::LLT<Matrix> factor(gram);
  if (factor.info() != Eigen::Success) {
    throw Error("GraphProjector: Cholesky factorization of I + B^T B failed");
  }
  p.dense_.emplace(Dense{std::move(b), std::move(factor)});
  return p;
}

GraphProjector GraphProjector::matrix_free(LinearMap b, double cg_tol,
                                           int cg_max_iter) {
  GraphProjector p;
  p.rows_ = b.rows;
  p.cols_ = b.cols;
  Vector warm = Vector::Zero(b.cols);
  p.free_.emplace(MatrixFree{std::move(b), cg_tol, cg_max_iter, std::move(warm)});
  return p;
}

Vector GraphProjector::apply(const Vector &x) {
  ++stats_.matvecs;
  return dense_ ? Vector(dense_->b * x) : free_->b.apply(x);
}

Vector GraphProjector::adjoint(const Vector &y) {
  ++stats_.matvecs;
  return dense_ ? Vector(dense_->b.transpose() * y) : free_->b.adjoint(y);
}

GraphProjection GraphProjector::project(const Vector &v) {
  require_same_size(v.size(), cols_, "GraphProjector::project");
  ++stats_.projections;
  if (dense_) {
    Vector x = dense_->factor.solve(v);
    Vector y = apply(x);
    return {std::move(x), std::move(y)};
  }
  MatrixFree &mf = *free_;
  const SymmetricOperator normal_op{cols_, [this, &mf](const Vector &z) {
                                      stats_.matvecs += 2;
                                      return Vector(z + mf.b.adjoint(mf.b.apply(z)));
                                    }};
  // Solve for the correction to the previous solution. Its residual must
  // stay below cg_tol ||v|| and also shrink by cg_tol relative to the
  // starting residual, otherwise a stale warm start freezes the iteration
  // once the changes in v drop under cg_tol ||v||.
  const Vector r0 = v - normal_op(mf.warm);
  const double v_norm = v.norm();
  const double r0_norm = r0.norm();
  if (r0_norm == 0.0) {
    Vector x = mf.warm;
    Vector y = apply(x);
    return {std::move(x), std::move(y)};
  }
  const double target =
      mf.cg_tol * std::max(std::min(r0_norm, v_norm), mf.cg_tol * v_norm);
  CgResult<double> cg =
      conjugate_gradient(normal_op, r0, target / r0_norm, mf.cg_max_iter);
  stats_.cg_iterations += cg.iterations;
  mf.warm += cg.x;
  Vector x = mf.warm;
  Vector y = apply(x);
  return {std::move(x), std::move(y)};
}

PogsResult pogs_solve(GraphProjector &projector, const Vector &c,
                      const PogsConfig &config, const PogsState *warm) {
  config.validate();
  const Index n = projector.cols();
  const Index m = projector.rows();
  require_same_size(c.size(), m, "pogs_solve");

  PogsState s = PogsState::zeros(n, m);
  if (warm != nullptr) {
    require_same_size(warm->x.size(), n, "pogs_solve warm x");
    require_same_size(warm->lambda.size(), n, "pogs_solve warm lambda");
    require_same_size(warm->y.size(), m, "pogs_solve warm y");
    require_same_size(warm->nu.size(), m, "pogs_solve warm nu");
    s = *warm;
    s.iterations = 0;
  }
  double rho = s.rho > 0 ? s.rho : config.rho;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  Vector x_half(n);
  Vector y_half(m);
  double r_pri = 0.0;
  double r_dual = 0.0;

  const auto finish = [&](PogsState &&state) {
    PogsResult out;
    state.rho = rho;
    out.u = state.x;
    out.dual_certificate = (-rho * state.nu).cwiseMax(-1.0).cwiseMin(1.0);
    out.iterations = state.iterations;
    out.primal_residual = r_pri;
    out.dual_residual = r_dual;
    out.state = std::move(state);
    return out;
  };

  for (int k = 0; k < config.max_iter; ++k) {
    // Prox of 1/2 ||x||^2 and of ||y - c||_1, both with weight 1/rho.
    x_half = (rho / (1.0 + rho)) * (s.x - s.lambda);
    y_half = soft_threshold(s.y - s.nu, c, 1.0 / rho);

    const Vector v = x_half + s.lambda + projector.adjoint(y_half + s.nu);
    GraphProjection next = projector.project(v);

    s.lambda += x_half - next.x;
    s.nu += y_half - next.y;

    r_pri = std::sqrt((next.x - x_half).squaredNorm() +
                      (next.y - y_half).squaredNorm());
    r_dual = rho * std::sqrt((s.x - next.x).squaredNorm() +
                             (s.y - next.y).squaredNorm());
    s.x = std::move(next.x);
    s.y = std::move(next.y);
    s.iterations = k + 1;

    const double pri_tol =
        config.eps * (sqrt_n + std::max(s.x.norm(), s.y.norm()));
    const double dual_tol =
        config.eps * (sqrt_n + rho * std::max(s.lambda.norm(), s.nu.norm()));
    if (r_pri < pri_tol && r_dual < dual_tol) {
      return finish(std::move(s));
    }

    if (config.adaptive_rho) {
      const double pri = r_pri / pri_tol;
      const double dual = r_dual / dual_tol;
      double factor = 1.0;
      if (pri > config.rho_balance * dual) {
        factor = config.rho_factor;
      } else if (dual > config.rho_balance * pri) {
        factor = 1.0 / config.rho_factor;
      }
      if (factor != 1.0) {
        rho *= factor;
        s.lambda /= factor;
        s.nu /= factor;
      }
    }
  }
  throw PogsError("pogs_solve: residual tolerance not reached in " +
                      std::to_string(config.max_iter) + " iterations",
                  finish(std::move(s)));
}

double canonical_objective(const LinearMap &b, const Vector &c,
                           const Vector &u) {
  require_same_size(u.size(), b.cols, "canonical_objective");
  require_same_size(c.size(), b.rows, "canonical_objective");
  return (b.apply(u) - c).lpNorm<1>() + 0.5 * u.squaredNorm();
}

double duality_gap(const LinearMap &b, const Vector &c, const Vector &u,
                   const Vector &g) {
  require_same_size(g.size(), b.rows, "duality_gap");
  if (g.size() > 0 && g.lpNorm<Eigen::Infinity>() > 1.0) {
    throw Error("duality_gap: dual candidate must satisfy ||g||_inf <= 1");
  }
  const double primal = canonical_objective(b, c, u);
  const double dual = -0.5 * b.adjoint(g).squaredNorm() - g.dot(c);
  return primal - dual;
}

} // namespace proxphase
