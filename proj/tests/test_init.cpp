#include <doctest.h>

#include "oracles.hpp"
#include "proxphase/core.hpp"
#include "proxphase/harness.hpp"
#include "proxphase/init.hpp"

#include <cmath>
#include <numeric>

using namespace proxphase;

namespace {

MeasurementEnsemble dense(const Matrix &a) { return MeasurementEnsemble(DenseSensing{a}); }

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

void check_estimate(const InitEstimate &est, Index n) {
  REQUIRE(est.d_hat.size() == n);
  CHECK(std::abs(est.d_hat.norm() - 1.0) <= 1e-10);
  CHECK(est.r_hat >= 0.0);
  CHECK(est.x0 == est.r_hat * est.d_hat);
}

double rel_init_error(const InitEstimate &est, const Vector &xs) {
  return dist_to_signal(est.x0, xs) / xs.norm();
}

} // namespace

TEST_CASE("init kinds round-trip their names") {
  for (InitKind k : {InitKind::Noiseless, InitKind::Outlier, InitKind::Big, InitKind::Median}) {
    CHECK(parse_init_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_init_kind("spectral"), Error);
}

TEST_CASE("noiseless init on the identity") {
  SeededRng rng(1);
  const auto e = dense(Matrix::Identity(2, 2));
  Vector b(2);
  b << 1, 0;
  const auto est = init_noiseless(e, b, rng);
  check_estimate(est, 2);
  CHECK(est.r_hat == doctest::Approx(std::sqrt(0.5)));
  // I_sel = {2}; the masked Gram is e2 e2^T / 2, whose bottom eigenvector is e1
  CHECK(std::abs(est.d_hat(0)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(est.x0(0)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
}

TEST_CASE("init errors") {
  SeededRng rng(2);
  const auto e = dense(Matrix::Identity(2, 2));
  CHECK_THROWS_AS(init_noiseless(e, Vector::Zero(2), rng), Error);
  CHECK_THROWS_AS(init_median(e, Vector::Zero(2), rng), Error);
  CHECK_THROWS_AS(init_noiseless(e, Vector::Ones(3), rng), DimensionError);
}

TEST_CASE("noiseless init accuracy") {
  SeededRng rng(3);
  int good = 0;
  for (int t = 0; t < 50; ++t) {
    const auto inst = gaussian_instance(500, 50, rng);
    const auto est = init_noiseless(inst.ensemble, inst.b, rng);
    check_estimate(est, 50);
    good += rel_init_error(est, inst.x_star) <= 0.4;
  }
  CHECK(good >= 45);

  int good16 = 0;
  for (int t = 0; t < 20; ++t) {
    const auto inst = gaussian_instance(800, 50, rng);
    good16 += rel_init_error(init_noiseless(inst.ensemble, inst.b, rng), inst.x_star) <= 0.5;
  }
  CHECK(good16 >= 18);
}

TEST_CASE("initializers are homogeneous in b") {
  SeededRng rng(4);
  const auto inst = gaussian_instance(200, 20, rng);
  const double t = 3.0;
  for (InitKind k : {InitKind::Noiseless, InitKind::Outlier, InitKind::Big, InitKind::Median}) {
    SeededRng r1(9), r2(9);
    const auto base = run_init(k, inst.ensemble, inst.b, r1);
    const auto scaled = run_init(k, inst.ensemble, Vector(t * t * inst.b), r2);
    CHECK(dist_to_signal(scaled.x0, Vector(t * base.x0)) <= 1e-6 * t * base.x0.norm());
  }
}

TEST_CASE("outlier init accuracy without corruption") {
  SeededRng rng(5);
  int good = 0;
  for (int t = 0; t < 50; ++t) {
    const auto inst = gaussian_instance(800, 50, rng);
    const auto est = init_outlier(inst.ensemble, inst.b, rng);
    check_estimate(est, 50);
    good += rel_init_error(est, inst.x_star) <= 0.5;
  }
  CHECK(good >= 45);
}

TEST_CASE("outlier init is invariant to row permutations") {
  SeededRng rng(6);
  const auto inst = gaussian_instance(200, 10, rng);
  std::vector<Index> perm(200);
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 199; i > 0; --i) {
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[rng.index(static_cast<std::uint64_t>(i + 1))]);
  }
  Matrix pa(200, 10);
  Vector pb(200);
  for (Index i = 0; i < 200; ++i) {
    pa.row(i) = inst.ensemble.matrix().row(perm[static_cast<std::size_t>(i)]);
    pb(i) = inst.b(perm[static_cast<std::size_t>(i)]);
  }
  SeededRng r1(7), r2(7);
  const auto a = init_outlier(inst.ensemble, inst.b, r1);
  const auto b = init_outlier(dense(pa), pb, r2);
  CHECK(dist_to_signal(a.x0, b.x0) <= 1e-4 * a.x0.norm());
}

TEST_CASE("weighted median fit") {
  Vector c = Vector::LinSpaced(5, 1, 5);
  CHECK(weighted_median_fit(2.5 * c, c) == doctest::Approx(2.5));

  Vector b2(2), c2(2);
  b2 << 0, 2;
  c2 << 1, 1;
  CHECK(weighted_median_fit(b2, c2) == doctest::Approx(1.0));

  CHECK_THROWS_AS(weighted_median_fit(Vector::Ones(3), Vector::Zero(3)), Error);

  SeededRng rng(8);
  for (int t = 0; t < 200; ++t) {
    const Index m = t < 100 ? 30 : 1 + static_cast<Index>(rng.index(40));
    const Vector bb = rng.normal_vector(m).cwiseAbs();
    Vector cc = rng.normal_vector(m).cwiseAbs2();
    if (t % 7 == 0 && m > 1) {
      cc(0) = 0.0;
    }
    const double r = weighted_median_fit(bb, cc);
    const double best = oracle::g_breakpoint_min(bb, cc);
    CHECK(std::abs(oracle::g_value(bb, cc, r) - best) <= 1e-12 * std::max(1.0, best));
  }
}

TEST_CASE("radius estimate") {
  SeededRng rng(10);
  const auto inst = gaussian_instance(100, 8, rng);
  const Vector d = inst.x_star.normalized();
  CHECK(radius_estimate(inst.ensemble, inst.b, d) ==
        doctest::Approx(inst.x_star.squaredNorm()).epsilon(1e-10));
  CHECK_THROWS_AS(radius_estimate(inst.ensemble, inst.b, Vector::Zero(8)), Error);
}

TEST_CASE("big init") {
  SeededRng rng(11);
  const auto id = dense(Matrix::Identity(3, 3));
  Vector b(3);
  b << 1, 0, 0;
  const auto est = init_big(id, b, rng);
  check_estimate(est, 3);
  CHECK(std::abs(est.d_hat(0)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(est.r_hat == doctest::Approx(std::sqrt(1.0 / 3)));

  int good = 0;
  for (int t = 0; t < 50; ++t) {
    const auto inst = gaussian_instance(500, 100, rng);
    const auto e = init_big(inst.ensemble, inst.b, rng);
    check_estimate(e, 100);
    good += rel_init_error(e, inst.x_star) <= 0.75;
  }
  CHECK(good >= 45);
}

TEST_CASE("big and median directions match an explicit eigensolve") {
  SeededRng rng(13);
  for (int t = 0; t < 5; ++t) {
    const auto inst = gaussian_instance(120, 12, rng);
    const Matrix &a = inst.ensemble.matrix();
    const Vector norms2 = a.rowwise().squaredNorm();
    const Vector ratios = inst.b.cwiseQuotient(norms2);
    const double cut = oracle::quantile(std::vector<double>(ratios.begin(), ratios.end()), 5.0 / 6);
    Matrix big = Matrix::Zero(12, 12);
    Matrix med = Matrix::Zero(12, 12);
    const double lambda0 = oracle::quantile(std::vector<double>(inst.b.begin(), inst.b.end()), 0.5);
    for (Index i = 0; i < 120; ++i) {
      const Vector ai = a.row(i).transpose();
      if (ratios(i) >= cut) {
        big += ai * ai.transpose() / norms2(i);
      }
      if (std::abs(inst.b(i)) <= 9 * lambda0) {
        med += inst.b(i) * ai * ai.transpose();
      }
    }
    const Vector top_big = oracle::jacobi_eigen(big).second.col(11);
    const Vector top_med = oracle::jacobi_eigen(med).second.col(11);
    CHECK(std::abs(init_big(inst.ensemble, inst.b, rng).d_hat.dot(top_big)) >= 1 - 1e-6);
    const auto em = init_median(inst.ensemble, inst.b, rng);
    CHECK(std::abs(em.d_hat.dot(top_med)) >= 1 - 1e-6);
    CHECK(em.r_hat * em.r_hat == doctest::Approx(lambda0 / 0.455));
  }
}

TEST_CASE("median init radius") {
  SeededRng rng(12);
  const auto inst = gaussian_instance(5000, 50, rng);
  const auto est = init_median(inst.ensemble, inst.b, rng);
  check_estimate(est, 50);
  CHECK(std::abs(est.r_hat * est.r_hat / inst.x_star.squaredNorm() - 1.0) <= 0.1);
}

TEST_CASE("recovery from the outlier init under zeroing") {
  BenchGrid grid;
  grid.dims = {50};
  grid.ratios = {8};
  grid.p_fails = {0.2};
  grid.trials = 50;
  grid.methods = {Method::ProxLinear};
  grid.inits = {InitKind::Outlier};
  grid.base_seed = 101;
  const auto records = run_grid(grid);
  int ok = 0;
  for (const auto &r : records) {
    ok += r.success;
  }
  CHECK(ok >= 43);
}

TEST_CASE("recovery from the median init under Cauchy corruption") {
  BenchGrid grid;
  grid.dims = {50};
  grid.ratios = {8};
  grid.p_fails = {0.25};
  grid.trials = 50;
  grid.methods = {Method::ProxLinear};
  grid.inits = {InitKind::Median};
  grid.corruption = CorruptionKind::Cauchy;
  grid.base_seed = 102;
  const auto records = run_grid(grid);
  int ok = 0;
  for (const auto &r : records) {
    ok += r.success;
  }
  CHECK(ok >= 23);
}
