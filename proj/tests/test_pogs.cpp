#include <doctest.h>

#include "oracles.hpp"
#include "proxphase/pogs.hpp"
#include "proxphase/proxlin.hpp"
#include "proxphase/rng.hpp"
#include "proxphase/sensing.hpp"

#include <cmath>

using namespace proxphase;

namespace {

Matrix random_matrix(Index m, Index n, SeededRng &rng) {
  return rng.normal_vector(m * n).reshaped(m, n);
}

PogsConfig tight() {
  PogsConfig c;
  c.eps = 1e-8;
  c.max_iter = 200000;
  return c;
}

} // namespace

TEST_CASE("pogs config validation") {
  CHECK_NOTHROW(PogsConfig{}.validate());
  PogsConfig c;
  c.rho = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.eps = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.max_iter = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.rho_balance = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("graph projection on trivial maps") {
  const Vector v = Vector::LinSpaced(4, -1, 2);
  auto zero = GraphProjector::dense(Matrix::Zero(3, 4));
  auto p = zero.project(v);
  CHECK((p.x - v).norm() < 1e-14);
  CHECK(p.y.norm() < 1e-14);

  auto id = GraphProjector::dense(Matrix::Identity(4, 4));
  p = id.project(v);
  CHECK((p.x - v / 2).norm() < 1e-14);
  CHECK((p.y - v / 2).norm() < 1e-14);

  auto id_free = GraphProjector::matrix_free(LinearMap::from_matrix(Matrix::Identity(4, 4)), 1e-10, 100);
  p = id_free.project(v);
  CHECK((p.x - v / 2).norm() < 1e-9);
}

TEST_CASE("dense and matrix-free projections match an LU solve") {
  SeededRng rng(1);
  for (int t = 0; t < 20; ++t) {
    const Matrix b = random_matrix(20, 8, rng);
    const Vector v = rng.normal_vector(8);
    const Vector exact =
        oracle::lu_solve(Matrix::Identity(8, 8) + b.transpose() * b, v);
    auto dense = GraphProjector::dense(b);
    auto free = GraphProjector::matrix_free(LinearMap::from_matrix(b), 1e-10, 500);
    const auto pd = dense.project(v);
    const auto pf = free.project(v);
    CHECK((pd.x - exact).norm() <= 1e-10 * exact.norm());
    CHECK((pd.y - b * pd.x).norm() <= 1e-10 * std::max(1.0, pd.y.norm()));
    CHECK((pf.x - pd.x).norm() <= 1e-6 * std::max(1.0, pd.x.norm()));
    // relative CG criterion on (I + B^T B) x = v
    CHECK((pf.x + b.transpose() * (b * pf.x) - v).norm() <= 1e-10 * v.norm());
    CHECK(free.stats().cg_iterations > 0);
  }
}

TEST_CASE("pogs closed forms") {
  SeededRng rng(2);
  const Matrix b = random_matrix(10, 4, rng);
  auto proj = GraphProjector::dense(b);
  const auto r = pogs_solve(proj, Vector::Zero(10), tight());
  CHECK(r.u.norm() <= 1e-6);

  // |u - 10| + u^2 / 2 is minimized at u = 1
  auto one = GraphProjector::dense(Matrix::Ones(1, 1));
  const auto s = pogs_solve(one, Vector::Constant(1, 10.0), tight());
  CHECK(s.u(0) == doctest::Approx(1.0).epsilon(1e-6));

  // Large c keeps every residual negative: the objective is 1^T(c - Bu) + |u|^2/2,
  // minimized at u = B^T 1.
  const Matrix small = 0.1 * random_matrix(12, 3, rng);
  const Vector c = Vector::Constant(12, 100.0);
  auto ps = GraphProjector::dense(small);
  const auto q = pogs_solve(ps, c, tight());
  const Vector closed = small.transpose() * Vector::Ones(12);
  CHECK((q.u - closed).norm() <= 1e-5 * std::max(1.0, closed.norm()));
}

TEST_CASE("duality gap") {
  const LinearMap one = LinearMap::from_matrix(Matrix::Ones(1, 1));
  // primal optimum u = 1 of |u - 10| + u^2/2; dual optimum g = -1, u = -B^T g
  const Vector c = Vector::Constant(1, 10.0);
  CHECK(std::abs(duality_gap(one, c, Vector::Constant(1, 1.0), Vector::Constant(1, -1.0))) <= 1e-14);

  SeededRng rng(3);
  const Matrix b = random_matrix(5, 3, rng);
  const Vector cc = rng.normal_vector(5);
  const LinearMap map = LinearMap::from_matrix(b);
  CHECK(duality_gap(map, cc, Vector::Zero(3), Vector::Zero(5)) ==
        doctest::Approx(cc.lpNorm<1>()));
  CHECK_THROWS_AS(duality_gap(map, cc, Vector::Zero(3), Vector::Constant(5, 1.5)), Error);
  CHECK(canonical_objective(map, cc, Vector::Zero(3)) == doctest::Approx(cc.lpNorm<1>()));
}

TEST_CASE("pogs certifies random instances") {
  SeededRng rng(4);
  for (auto [m, n] : {std::pair<Index, Index>{30, 10}, {50, 20}}) {
    for (int t = 0; t < 10; ++t) {
      const Matrix b = random_matrix(m, n, rng) / std::sqrt(static_cast<double>(m));
      const Vector c = rng.normal_vector(m);
      auto proj = GraphProjector::dense(b);
      PogsConfig cfg;
      cfg.eps = 1e-8;
      const auto r = pogs_solve(proj, c, cfg);
      const LinearMap map = LinearMap::from_matrix(b);
      const double p = canonical_objective(map, c, r.u);
      const double gap = duality_gap(map, c, r.u, r.dual_certificate);
      CHECK(gap >= -1e-12);
      CHECK(gap <= 1e-6 * (1 + std::abs(p)));
      CHECK(r.dual_certificate.cwiseAbs().maxCoeff() <= 1.0);
    }
  }
}

TEST_CASE("warm and cold starts agree") {
  SeededRng rng(5);
  const Matrix b = random_matrix(40, 10, rng) / std::sqrt(40.0);
  const Vector c = rng.normal_vector(40);
  auto proj = GraphProjector::dense(b);
  PogsConfig cfg;
  cfg.eps = 1e-9;
  const auto cold = pogs_solve(proj, c, cfg);
  PogsState warm = PogsState::zeros(10, 40);
  warm.x = rng.normal_vector(10);
  warm.y = b * warm.x;
  warm.nu = rng.normal_vector(40);
  warm.rho = 3.0;
  const auto hot = pogs_solve(proj, c, cfg, &warm);
  CHECK((hot.u - cold.u).norm() <= 1e-6);

  const auto again = pogs_solve(proj, c, cfg, &cold.state);
  CHECK(again.iterations <= 5);
  CHECK((again.u - cold.u).norm() <= 1e-6);
}

TEST_CASE("fixed penalty still converges on easy instances") {
  SeededRng rng(6);
  const Matrix b = random_matrix(30, 10, rng) / std::sqrt(30.0);
  const Vector c = rng.normal_vector(30);
  auto proj = GraphProjector::dense(b);
  PogsConfig fixed;
  fixed.adaptive_rho = false;
  fixed.eps = 1e-7;
  PogsConfig adaptive = fixed;
  adaptive.adaptive_rho = true;
  const auto a = pogs_solve(proj, c, fixed);
  const auto d = pogs_solve(proj, c, adaptive);
  CHECK(a.state.rho == 1.0);
  CHECK((a.u - d.u).norm() <= 1e-5);
}

TEST_CASE("pogs raises with the last state when out of iterations") {
  SeededRng rng(7);
  const Matrix b = random_matrix(30, 10, rng);
  auto proj = GraphProjector::dense(b);
  PogsConfig cfg;
  cfg.eps = 1e-12;
  cfg.max_iter = 3;
  try {
    pogs_solve(proj, rng.normal_vector(30), cfg);
    FAIL("expected PogsError");
  } catch (const PogsError &e) {
    CHECK(e.partial().iterations == 3);
    CHECK(e.partial().u.size() == 10);
  }
  CHECK_THROWS_AS(pogs_solve(proj, Vector::Zero(7), cfg), DimensionError);
}

TEST_CASE("dense and matrix-free solves agree on Hadamard subproblems") {
  SeededRng rng(8);
  for (int t = 0; t < 10; ++t) {
    const Index n = Index{1} << (2 + t % 5);
    const auto e = gen_hadamard_ensemble(2, n, rng);
    const Vector xs = rng.normal_vector(n);
    const Vector b = measure(e, xs);
    const Vector x0 = xs + 0.3 * xs.norm() / std::sqrt(static_cast<double>(n)) * rng.normal_vector(n);
    const auto sub = canonicalize(e, b, x0, 2.0 / static_cast<double>(n));
    PogsConfig cfg;
    cfg.eps = 1e-8;
    auto dense = GraphProjector::dense(sub.dense_matrix());
    auto free = GraphProjector::matrix_free(sub.map(), cfg.cg_tol, cfg.cg_max_iter);
    const auto solve = [&](GraphProjector &p) {
      try {
        return pogs_solve(p, sub.c, cfg);
      } catch (const PogsError &e) {
        return e.partial();
      }
    };
    const auto rd = solve(dense);
    const auto rf = solve(free);
    CHECK((rd.u - rf.u).norm() <= 1e-5);
    CHECK(free.stats().cg_iterations > 0);
  }
}
