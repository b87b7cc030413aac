#include <doctest.h>

#include "proxphase/core.hpp"
#include "proxphase/harness.hpp"
#include "proxphase/proxlin.hpp"
#include "proxphase/taf.hpp"

#include <cmath>

using namespace proxphase;

namespace {

struct Instance {
  MeasurementEnsemble ensemble;
  Vector x_star;
  Vector b;
};

Instance gaussian_instance(Index m, Index n, SeededRng &rng) {
  auto e = gen_gaussian_ensemble(m, n, rng);
  Vector xs = rng.normal_vector(n);
  Vector b = measure(e, xs);
  return {std::move(e), std::move(xs), std::move(b)};
}

double loop_objective(const Matrix &a, const Vector &b, const Vector &x) {
  double total = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (Index j = 0; j < a.cols(); ++j) {
      s += a(i, j) * x(j);
    }
    total += std::abs(s * s - b(i));
  }
  return total / static_cast<double>(a.rows());
}

} // namespace

TEST_CASE("objective") {
  SeededRng rng(1);
  const auto inst = gaussian_instance(30, 5, rng);
  CHECK(objective(inst.ensemble, inst.b, inst.x_star) <= 1e-12);
  CHECK(objective(inst.ensemble, inst.b, Vector::Zero(5)) ==
        doctest::Approx(inst.b.lpNorm<1>() / 30));
  for (int t = 0; t < 10; ++t) {
    const Vector x = rng.normal_vector(5);
    const Vector b = rng.normal_vector(30);
    const double oracle = loop_objective(inst.ensemble.matrix(), b, x);
    CHECK(std::abs(objective(inst.ensemble, b, x) - oracle) <= 1e-12 * std::max(1.0, oracle));
  }
  CHECK_THROWS_AS(objective(inst.ensemble, inst.b, Vector::Zero(4)), DimensionError);
}

TEST_CASE("model tangency and convexity") {
  SeededRng rng(2);
  const auto inst = gaussian_instance(40, 6, rng);
  const Vector b = inst.b + 0.1 * rng.normal_vector(40);
  for (int t = 0; t < 50; ++t) {
    const Vector x = rng.normal_vector(6);
    CHECK(model_value(inst.ensemble, b, x, x) ==
          doctest::Approx(objective(inst.ensemble, b, x)).epsilon(1e-14));
    const Vector h = rng.normal_vector(6);
    const double s = rng.normal(), u = rng.normal();
    const auto g = [&](double tt) { return model_value(inst.ensemble, b, x, Vector(x + tt * h)); };
    CHECK(g(0.5 * (s + u)) <= 0.5 * (g(s) + g(u)) + 1e-12);
  }
}

TEST_CASE("model sandwich") {
  SeededRng rng(3);
  const auto inst = gaussian_instance(60, 8, rng);
  const Matrix &a = inst.ensemble.matrix();
  const double op = Eigen::SelfAdjointEigenSolver<Matrix>(a.transpose() * a).eigenvalues().maxCoeff() / 60.0;
  for (int t = 0; t < 200; ++t) {
    const Vector x = rng.normal_vector(8);
    const Vector y = rng.normal_vector(8);
    const double q = op * (x - y).squaredNorm();
    const double diff = objective(inst.ensemble, inst.b, y) - model_value(inst.ensemble, inst.b, x, y);
    CHECK(diff <= q + 1e-9);
    CHECK(diff >= -q - 1e-9);
  }
}

TEST_CASE("canonical subproblem identity") {
  SeededRng rng(4);
  const auto inst = gaussian_instance(25, 5, rng);
  const Vector x0 = rng.normal_vector(5);
  const double L = 3.7;
  const auto sub = canonicalize(inst.ensemble, inst.b, x0, L);
  CHECK(sub.objective(Vector::Zero(5)) ==
        doctest::Approx(objective(inst.ensemble, inst.b, x0)).epsilon(1e-12));
  CHECK(sub.objective(Vector::Zero(5)) == doctest::Approx(sub.c.lpNorm<1>()));
  for (int t = 0; t < 20; ++t) {
    const Vector u = rng.normal_vector(5);
    const Vector y = sub.back_map(u);
    const double direct = model_value(inst.ensemble, inst.b, x0, y) +
                          0.5 * L * (y - x0).squaredNorm();
    CHECK(std::abs(sub.objective(u) - direct) <= 1e-12 * std::max(1.0, direct));
  }
  const auto doubled = canonicalize(inst.ensemble, inst.b, x0, 4 * L);
  const Vector u = rng.normal_vector(5);
  CHECK(((doubled.back_map(u) - x0) - 0.5 * (sub.back_map(u) - x0)).norm() <= 1e-14);
  CHECK((sub.dense_matrix() * u - sub.apply(u)).norm() <= 1e-12);
  CHECK_THROWS_AS(canonicalize(inst.ensemble, inst.b, x0, 0.0), Error);
}

TEST_CASE("hadamard canonical subproblem stays matrix-free") {
  SeededRng rng(5);
  const auto e = gen_hadamard_ensemble(2, 16, rng);
  const Vector xs = rng.normal_vector(16);
  const auto sub = canonicalize(e, measure(e, xs), rng.normal_vector(16), 0.125);
  const Vector u = rng.normal_vector(16);
  const Vector z = rng.normal_vector(32);
  CHECK((sub.dense_matrix() * u - sub.apply(u)).norm() <= 1e-12);
  CHECK(std::abs(z.dot(sub.apply(u)) - sub.adjoint(z).dot(u)) <= 1e-12);
}

TEST_CASE("config validation") {
  ProxLinearConfig c;
  CHECK_NOTHROW(c.validate());
  c.L = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.max_outer = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.phase2.inner_eps = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(parse_projector_kind("cg") == ProjectorKind::MatrixFree);
  CHECK(to_string(Termination::MaxOuter) == "max_outer");
  CHECK_THROWS_AS(parse_projector_kind("lu"), Error);
}

TEST_CASE("starting at the signal") {
  SeededRng rng(6);
  const auto inst = gaussian_instance(100, 10, rng);
  const auto rep = prox_linear_solve(inst.ensemble, inst.b, inst.x_star, {}, rng);
  CHECK(rep.reason == Termination::Converged);
  CHECK(rep.outer_iters <= 2);
  CHECK(objective(inst.ensemble, inst.b, rep.final_x) <= 1e-8);
}

TEST_CASE("noiseless recovery from the big init") {
  SeededRng rng(7);
  int ok = 0;
  int few = 0;
  for (int t = 0; t < 10; ++t) {
    const auto inst = gaussian_instance(500, 100, rng);
    const Vector x0 = init_big(inst.ensemble, inst.b, rng).x0;
    ProxLinearConfig cfg;
    cfg.record_iterates = true;
    const auto rep = prox_linear_solve(inst.ensemble, inst.b, x0, cfg, rng);
    CHECK(rep.L == doctest::Approx(2 * rep.opnorm_over_m));
    CHECK(rep.iterates.size() == static_cast<std::size_t>(rep.outer_iters) + 1);
    CHECK(rep.iterations.size() == static_cast<std::size_t>(rep.outer_iters));
    CHECK(rep.total_matvecs() > 0);
    const double err = dist_to_signal(rep.final_x, inst.x_star) / inst.x_star.norm();
    ok += err <= 1e-5;
    few += rep.outer_iters <= 6;
    // the phase never goes back from 2 to 1
    for (std::size_t k = 1; k < rep.iterations.size(); ++k) {
      CHECK(rep.iterations[k].phase >= rep.iterations[k - 1].phase);
    }
  }
  CHECK(ok >= 9);
  // Recorded for reference: the default constant L makes early steps short.
  MESSAGE("runs with at most 6 outer iterations: " << few << " of 10");
}

TEST_CASE("inexact descent") {
  SeededRng rng(8);
  const auto inst = gaussian_instance(300, 50, rng);
  const Vector x0 = init_big(inst.ensemble, inst.b, rng).x0;
  ProxLinearConfig cfg;
  cfg.record_iterates = true;
  const auto rep = prox_linear_solve(inst.ensemble, inst.b, x0, cfg, rng);
  REQUIRE(rep.iterates.size() == rep.iterations.size() + 1);
  const double sqrt_n = std::sqrt(50.0);
  double prev = rep.initial_objective;
  for (std::size_t k = 0; k < rep.iterations.size(); ++k) {
    const auto &it = rep.iterations[k];
    const auto sub = canonicalize(inst.ensemble, inst.b, rep.iterates[k], rep.L);
    const Vector u = std::sqrt(rep.L) * (rep.iterates[k + 1] - rep.iterates[k]);
    // f lies below model + (L/2)|.|^2, which the inner solve nearly minimizes
    CHECK(it.objective <= sub.objective(u) + 1e-12);
    const double eps = it.phase == 1 ? cfg.phase1.inner_eps : cfg.phase2.inner_eps;
    CHECK(sub.objective(u) <= prev + 2 * eps * sqrt_n);
    CHECK(it.objective_increased == (it.objective > prev));
    prev = it.objective;
  }
}

TEST_CASE("phase-two inner failures end the solve") {
  SeededRng rng(9);
  const auto inst = gaussian_instance(80, 10, rng);
  ProxLinearConfig cfg;
  cfg.phase1.max_outer = 0;
  cfg.inner.max_iter = 2;
  const auto rep = prox_linear_solve(inst.ensemble, inst.b, Vector::Ones(10), cfg, rng);
  CHECK(rep.reason == Termination::InnerFailure);
  CHECK(rep.outer_iters == 0);
  REQUIRE(rep.iterations.size() == 1);
  CHECK_FALSE(rep.iterations[0].inner_converged);
  CHECK_FALSE(rep.detail.empty());

  cfg = {};
  cfg.inner.max_iter = 2;
  cfg.max_outer = 3;
  const auto lenient = prox_linear_solve(inst.ensemble, inst.b, Vector::Ones(10), cfg, rng);
  CHECK(lenient.reason == Termination::MaxOuter);
  CHECK(lenient.outer_iters == 3);
}

TEST_CASE("matrix-free and dense projectors give the same solve") {
  SeededRng rng(10);
  const auto inst = gaussian_instance(120, 20, rng);
  const Vector x0 = init_big(inst.ensemble, inst.b, rng).x0;
  ProxLinearConfig dense;
  dense.projector = ProjectorKind::DenseFactor;
  ProxLinearConfig free = dense;
  free.projector = ProjectorKind::MatrixFree;
  SeededRng r1(3), r2(3);
  const auto a = prox_linear_solve(inst.ensemble, inst.b, x0, dense, r1);
  const auto b = prox_linear_solve(inst.ensemble, inst.b, x0, free, r2);
  CHECK(a.reason == b.reason);
  CHECK((a.final_x - b.final_x).norm() <= 1e-5 * inst.x_star.norm());
  CHECK(b.total_cg_iterations() > 0);
  CHECK(a.total_cg_iterations() == 0);
}

TEST_CASE("taf fixed point and sign equivariance") {
  SeededRng rng(11);
  const auto inst = gaussian_instance(100, 10, rng);
  CHECK((taf_solve(inst.ensemble, inst.b, inst.x_star) - inst.x_star).norm() <=
        1e-12 * inst.x_star.norm());
  CHECK((taf_solve(inst.ensemble, inst.b, Vector(-inst.x_star)) + inst.x_star).norm() <=
        1e-12 * inst.x_star.norm());
  const Vector x0 = rng.normal_vector(10);
  TafConfig cfg;
  cfg.iterations = 20;
  CHECK(taf_solve(inst.ensemble, inst.b, Vector(-x0), cfg) ==
        -taf_solve(inst.ensemble, inst.b, x0, cfg));
}

TEST_CASE("taf step matches a loop oracle") {
  SeededRng rng(12);
  const auto inst = gaussian_instance(40, 6, rng);
  const Matrix &a = inst.ensemble.matrix();
  const Vector psi = inst.b.cwiseSqrt();
  const TafConfig cfg;
  for (int t = 0; t < 10; ++t) {
    const Vector x = rng.normal_vector(6);
    Vector expected = x;
    for (Index i = 0; i < 40; ++i) {
      double ax = 0.0;
      for (Index j = 0; j < 6; ++j) {
        ax += a(i, j) * x(j);
      }
      if (ax != 0.0 && std::abs(ax) >= psi(i) / (1 + cfg.gamma)) {
        const double r = ax - psi(i) * (ax > 0 ? 1.0 : -1.0);
        for (Index j = 0; j < 6; ++j) {
          expected(j) -= cfg.alpha / 40.0 * r * a(i, j);
        }
      }
    }
    CHECK((taf_step(inst.ensemble, psi, x, cfg) - expected).norm() <= 1e-12 * x.norm());
  }
}

TEST_CASE("taf input checks") {
  SeededRng rng(13);
  const auto inst = gaussian_instance(20, 4, rng);
  Vector b = inst.b;
  b(0) = -1.0;
  CHECK_THROWS_AS(taf_solve(inst.ensemble, b, Vector::Zero(4)), Error);
  TafConfig cfg;
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.gamma = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
