#ifndef PROXPHASE_RNG_HPP
#define PROXPHASE_RNG_HPP

#include "proxphase/types.hpp"

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace proxphase {

/// SplitMix64 finalizer. Used to derive independent sub-seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a list of integers into one seed with repeated SplitMix64 mixing.
/// Order matters: mix_seed({a, b}) != mix_seed({b, a}) in general.
constexpr std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::uint64_t p : parts) {
    h = splitmix64(h ^ splitmix64(p));
  }
  return h;
}

/// Seeded random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Every distribution is implemented here rather than through
/// <random> distributions, whose algorithms are implementation-defined:
///   uniform  - top 53 bits of one draw, scaled to [0, 1)
///   normal   - Marsaglia polar method, spare value cached
///   cauchy   - tan(pi (u - 1/2))
///   index    - rejection sampling on the 64-bit output (no modulo bias)
/// The stream is therefore identical across standard libraries, up to the
/// last-ulp behaviour of std::log / std::tan in the platform libm.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Independent child stream, keyed by a tag.
  SeededRng split(std::uint64_t tag) const {
    return SeededRng(mix_seed({seed_, tag}));
  }

  std::uint64_t next_u64() { return engine_(); }

  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  double cauchy() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return std::tan(std::numbers::pi * (u - 0.5));
  }

  /// +1 or -1 with equal probability.
  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    if (n == 0) {
      throw Error("SeededRng::index: empty range");
    }
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  template <typename Scalar = double>
  VectorX<Scalar> normal_vector(Index n) {
    VectorX<Scalar> v(n);
    for (Index i = 0; i < n; ++i) {
      v(i) = static_cast<Scalar>(normal());
    }
    return v;
  }

  template <typename Scalar = double>
  VectorX<Scalar> sign_vector(Index n) {
    VectorX<Scalar> v(n);
    for (Index i = 0; i < n; ++i) {
      v(i) = static_cast<Scalar>(sign());
    }
    return v;
  }

  /// Uniform direction on the unit sphere.
  template <typename Scalar = double>
  VectorX<Scalar> unit_vector(Index n) {
    VectorX<Scalar> v = normal_vector<Scalar>(n);
    return v / v.norm();
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace proxphase

#endif // PROXPHASE_RNG_HPP
