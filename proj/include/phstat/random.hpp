#pragma once

// Seeded random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The standard distribution adaptors are not (their algorithms are
// implementation-defined), so the transforms below are spelled out to keep
// every sample bit-identical across toolchains.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "phstat/error.hpp"

namespace phstat {

using Seed = std::uint64_t;

/// SplitMix64 finalizer; a bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for sub-stream `stream` of `parent`. Distinct streams of one
/// parent never share a seed.
constexpr Seed derive_seed(Seed parent, std::uint64_t stream) noexcept {
  return mix64(mix64(parent) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

class Rng {
 public:
  explicit Rng(Seed seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  /// Uniform integer on [0, bound), rejection sampling (no modulo bias).
  std::uint64_t below(std::uint64_t bound) {
    detail::require(bound > 0, Errc::invalid_parameter, "Rng::below: bound must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Standard normal, Marsaglia polar method.
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
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Gamma(shape, 1), Marsaglia-Tsang. Shapes below one use the
  /// G(a) = G(a + 1) * U^(1/a) boost.
  double gamma(double shape) {
    detail::require(shape > 0.0 && std::isfinite(shape), Errc::invalid_parameter,
                    "Rng::gamma: shape must be positive");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform_open(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Uniform angle on [0, 2*pi).
  double angle() { return 2.0 * std::numbers::pi * uniform(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace phstat
