#pragma once

// Reproducible randomness. Every random quantity in the library is a pure
// function of an RngStream value: xoshiro256** seeded through splitmix64 from
// (seed, stream_id), with Box-Muller Gaussians. The generator choice is frozen;
// changing it changes every seeded result downstream.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "rkp/matrix.hpp"

namespace rkp {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Order-dependent mix of several integers into one 64-bit key.
inline std::uint64_t hash_combine(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t state = seed;
  std::uint64_t h = splitmix64(state);
  for (std::uint64_t p : parts) {
    state ^= p + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2);
    h = splitmix64(state);
  }
  return h;
}

struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  /// Independent sub-stream, e.g. one per retry or per right-hand side.
  RngStream child(std::uint64_t tag) const {
    return {seed, hash_combine(stream_id, {tag, 0x5eedULL})};
  }

  bool operator==(const RngStream&) const = default;
};

class Xoshiro256 {
 public:
  explicit Xoshiro256(RngStream stream) {
    std::uint64_t sm = stream.seed ^ (stream.stream_id * 0xd1342543de82ef95ULL);
    for (auto& w : s_) w = splitmix64(sm);
    // splitmix64 never yields four zeros in a row, but keep the invariant explicit.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

/// Standard normal sampler (Box-Muller, caching the second variate).
class GaussianSampler {
 public:
  explicit GaussianSampler(RngStream stream) : gen_(stream) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - gen_.uniform();  // (0, 1]
    const double u2 = gen_.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Unit-variance scalar: N(0,1) for reals, N(0,1/2) per component for complex.
  template <Scalar T>
  T draw() {
    if constexpr (is_complex_v<T>) {
      const double re = (*this)();
      const double im = (*this)();
      return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    } else {
      return (*this)();
    }
  }

 private:
  Xoshiro256 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

template <Scalar T>
Vector<T> gaussian_vector(index_t n, RngStream stream) {
  GaussianSampler g(stream);
  Vector<T> v(static_cast<std::size_t>(n));
  for (T& x : v) x = g.draw<T>();
  return v;
}

/// n x k matrix of i.i.d. zero-mean unit-variance Gaussians, filled column by column.
template <Scalar T>
Matrix<T> gaussian_matrix(index_t n, index_t k, RngStream stream) {
  require(n >= 1 && k >= 1, "gaussian_matrix needs n, k >= 1");
  GaussianSampler g(stream);
  Matrix<T> m(n, k);
  for (T& x : m.data()) x = g.draw<T>();
  return m;
}

}  // namespace rkp
