#include "proxphase/sensing.hpp"

#include "proxphase/core.hpp"
#include "proxphase/io.hpp"
#include "proxphase/linalg.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <vector>

namespace proxphase {

namespace {

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};

} // namespace

MeasurementEnsemble::MeasurementEnsemble(DenseSensing dense)
    : impl_(std::move(dense)) {
  const Matrix &a = std::get<DenseSensing>(impl_).a;
  if (a.rows() < 1 || a.cols() < 1) {
    throw Error("dense ensemble must be non-empty");
  }
  if (!a.allFinite()) {
    throw Error("dense ensemble has non-finite entries");
  }
}

MeasurementEnsemble::MeasurementEnsemble(HadamardSensing hadamard)
    : impl_(std::move(hadamard)) {
  const Matrix &s = std::get<HadamardSensing>(impl_).signs;
  if (!is_power_of_two(s.rows())) {
    throw Error("n must be a power of two");
  }
  if (s.cols() < 1) {
    throw Error("Hadamard stack needs at least one block");
  }
  if (!(s.array().abs() == 1.0).all()) {
    throw Error("Hadamard sign diagonals must be +-1");
  }
}

Index MeasurementEnsemble::rows() const {
  return std::visit(overloaded{
                        [](const DenseSensing &d) { return d.a.rows(); },
                        [](const HadamardSensing &h) {
                          return h.signs.rows() * h.signs.cols();
                        }},
                    impl_);
}

Index MeasurementEnsemble::cols() const {
  return std::visit(overloaded{[](const DenseSensing &d) { return d.a.cols(); },
                               [](const HadamardSensing &h) {
                                 return h.signs.rows();
                               }},
                    impl_);
}

const Matrix &MeasurementEnsemble::matrix() const {
  if (!is_dense()) {
    throw Error("ensemble is not dense");
  }
  return std::get<DenseSensing>(impl_).a;
}

const Matrix &MeasurementEnsemble::sign_diagonals() const {
  if (!is_hadamard()) {
    throw Error("ensemble is not a Hadamard stack");
  }
  return std::get<HadamardSensing>(impl_).signs;
}

Index MeasurementEnsemble::stack_count() const {
  return sign_diagonals().cols();
}

Vector MeasurementEnsemble::apply(const Vector &x) const {
  require_same_size(x.size(), cols(), "MeasurementEnsemble::apply");
  return std::visit(
      overloaded{[&](const DenseSensing &d) -> Vector { return d.a * x; },
                 [&](const HadamardSensing &h) -> Vector {
                   const Index n = h.signs.rows();
                   Vector out(n * h.signs.cols());
                   for (Index l = 0; l < h.signs.cols(); ++l) {
                     auto block = out.segment(l * n, n);
                     block = h.signs.col(l).cwiseProduct(x);
                     fwht_inplace(block);
                   }
                   return out;
                 }},
      impl_);
}

Vector MeasurementEnsemble::apply_adjoint(const Vector &z) const {
  require_same_size(z.size(), rows(), "MeasurementEnsemble::apply_adjoint");
  return std::visit(
      overloaded{[&](const DenseSensing &d) -> Vector {
                   return d.a.transpose() * z;
                 },
                 [&](const HadamardSensing &h) -> Vector {
                   const Index n = h.signs.rows();
                   Vector out = Vector::Zero(n);
                   Vector block(n);
                   for (Index l = 0; l < h.signs.cols(); ++l) {
                     block = z.segment(l * n, n);
                     fwht_inplace(block);
                     out += h.signs.col(l).cwiseProduct(block);
                   }
                   return out;
                 }},
      impl_);
}

Vector MeasurementEnsemble::row_norms_squared() const {
  return std::visit(
      overloaded{[](const DenseSensing &d) -> Vector {
                   return d.a.rowwise().squaredNorm();
                 },
                 // Every entry of H S_l is +-1/sqrt(n).
                 [this](const HadamardSensing &) -> Vector {
                   return Vector::Ones(rows());
                 }},
      impl_);
}

Matrix MeasurementEnsemble::materialize() const {
  if (is_dense()) {
    return matrix();
  }
  Matrix a(rows(), cols());
  Vector e = Vector::Zero(cols());
  for (Index j = 0; j < cols(); ++j) {
    e(j) = 1.0;
    a.col(j) = apply(e);
    e(j) = 0.0;
  }
  return a;
}

MeasurementEnsemble gen_gaussian_ensemble(Index m, Index n, SeededRng &rng) {
  if (m < 1 || n < 1) {
    throw Error("gen_gaussian_ensemble: m and n must be positive");
  }
  Matrix a(m, n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) {
      a(i, j) = rng.normal();
    }
  }
  return MeasurementEnsemble(DenseSensing{std::move(a)});
}

MeasurementEnsemble gen_hadamard_ensemble(Index k, Index n, SeededRng &rng) {
  if (!is_power_of_two(n)) {
    throw Error("n must be a power of two");
  }
  if (k < 1) {
    throw Error("gen_hadamard_ensemble: k must be positive");
  }
  Matrix signs(n, k);
  for (Index l = 0; l < k; ++l) {
    signs.col(l) = rng.sign_vector(n);
  }
  return MeasurementEnsemble(HadamardSensing{std::move(signs)});
}

GroundTruth gen_signal(Index n, SignalMode mode, SeededRng &rng) {
  if (n < 1) {
    throw Error("gen_signal: n must be positive");
  }
  switch (mode) {
  case SignalMode::Rademacher:
    return {rng.sign_vector(n), mode};
  case SignalMode::Gaussian:
    return {rng.normal_vector(n), mode};
  case SignalMode::FromFile:
    break;
  }
  throw Error("gen_signal: file-backed signals come from ingest_signal");
}

void CorruptionSpec::validate() const {
  if (!(p_fail >= 0.0 && p_fail <= 0.5)) {
    throw Error("p_fail must lie in [0, 0.5]");
  }
}

Index CorruptionSpec::outlier_count(Index m) const {
  // The small slack keeps products such as 0.15 * 800 from flooring to 119.
  return static_cast<Index>(std::floor(p_fail * static_cast<double>(m) + 1e-9));
}

Vector measure(const MeasurementEnsemble &ensemble, const Vector &x_star) {
  require_same_size(x_star.size(), ensemble.cols(), "measure");
  return ensemble.apply(x_star).array().square().matrix();
}

Observations corrupt(const Vector &b, const CorruptionSpec &spec,
                     SeededRng &rng) {
  spec.validate();
  const Index m = b.size();
  const Index count = spec.outlier_count(m);

  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  for (Index i = 0; i < count; ++i) {
    const auto j = i + static_cast<Index>(
                           rng.index(static_cast<std::uint64_t>(m - i)));
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(j)]);
  }

  Observations obs{b, Mask::Constant(m, false), spec, std::nullopt};
  for (Index i = 0; i < count; ++i) {
    const Index idx = order[static_cast<std::size_t>(i)];
    obs.outlier_mask(idx) = true;
    switch (spec.kind) {
    case CorruptionKind::Zero:
      obs.b(idx) = 0.0;
      break;
    case CorruptionKind::Cauchy:
      obs.b(idx) = rng.cauchy();
      break;
    case CorruptionKind::Constant:
      obs.b(idx) = spec.constant_value;
      break;
    }
  }
  return obs;
}

NormalizedProblem normalize_measurements(const MeasurementEnsemble &ensemble,
                                         const Vector &b) {
  const Matrix &a = ensemble.matrix();
  require_same_size(b.size(), a.rows(), "normalize_measurements");
  const Vector norms2 = a.rowwise().squaredNorm();
  if ((norms2.array() == 0.0).any()) {
    throw Error("normalize_measurements: zero measurement row");
  }
  Matrix scaled = norms2.cwiseSqrt().cwiseInverse().asDiagonal() * a;
  Vector b_scaled = b.cwiseQuotient(norms2);
  return {MeasurementEnsemble(DenseSensing{std::move(scaled)}),
          std::move(b_scaled)};
}

double operator_norm_over_m(const MeasurementEnsemble &ensemble,
                            SeededRng &rng) {
  const double m = static_cast<double>(ensemble.rows());
  const SymmetricOperator gram{ensemble.cols(), [&](const Vector &v) {
                                 return Vector(
                                     ensemble.apply_adjoint(ensemble.apply(v)) /
                                     m);
                               }};
  try {
    return power_iteration(gram, rng, {1e-6, 5000}).value;
  } catch (const ConvergenceError &e) {
    // A tiny top gap stalls the eigenvector, but its Rayleigh quotient is
    // already accurate to the square of the residual.
    const Vector &v = e.best_iterate();
    return v.dot(gram(v));
  }
}

Vector weighted_gram_apply(const MeasurementEnsemble &ensemble,
                           const Vector &weights, const Vector &v) {
  require_same_size(weights.size(), ensemble.rows(), "weighted_gram_apply");
  require_same_size(v.size(), ensemble.cols(), "weighted_gram_apply");
  return ensemble.apply_adjoint(weights.cwiseProduct(ensemble.apply(v))) /
         static_cast<double>(ensemble.rows());
}

Vector masked_gram_apply(const MeasurementEnsemble &ensemble, const Mask &mask,
                         const Vector &v) {
  require_same_size(mask.size(), ensemble.rows(), "masked_gram_apply");
  return weighted_gram_apply(ensemble, mask.cast<double>().matrix(), v);
}

namespace {

Vector read_pgm(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open " + path.string());
  }
  // Header tokens may be separated by whitespace and '#' comments.
  const auto next_token = [&]() {
    std::string tok;
    char ch;
    while (in.get(ch)) {
      if (ch == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!tok.empty()) {
          break;
        }
        continue;
      }
      tok.push_back(ch);
    }
    return tok;
  };
  if (next_token() != "P5") {
    throw Error(path.string() + ": not a binary PGM (expected magic P5)");
  }
  long width = 0;
  long height = 0;
  long maxval = 0;
  try {
    width = std::stol(next_token());
    height = std::stol(next_token());
    maxval = std::stol(next_token());
  } catch (const std::exception &) {
    throw Error(path.string() + ": malformed PGM header");
  }
  if (width <= 0 || height <= 0) {
    throw Error(path.string() + ": malformed PGM dimensions");
  }
  if (maxval != 255) {
    throw Error(path.string() + ": only 8-bit PGM (maxval 255) is supported");
  }
  const auto count = static_cast<std::size_t>(width * height);
  std::vector<unsigned char> pixels(count);
  in.read(reinterpret_cast<char *>(pixels.data()),
          static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count) {
    throw Error(path.string() + ": truncated pixel data");
  }
  Vector v(static_cast<Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    v(static_cast<Index>(i)) = pixels[i] / 255.0;
  }
  return v;
}

} // namespace

GroundTruth ingest_signal(const std::filesystem::path &path,
                          SignalFormat format, std::optional<Index> target_n) {
  Vector data = format == SignalFormat::Csv ? io::read_vector_csv(path)
                                            : read_pgm(path);
  if (!data.allFinite()) {
    throw Error(path.string() + ": non-finite signal entries");
  }
  if (target_n) {
    if (*target_n < data.size()) {
      throw Error("target_n " + std::to_string(*target_n) +
                  " is smaller than the signal length " +
                  std::to_string(data.size()));
    }
    Vector padded = Vector::Zero(*target_n);
    padded.head(data.size()) = data;
    data = std::move(padded);
  }
  return {std::move(data), SignalMode::FromFile};
}

} // namespace proxphase
