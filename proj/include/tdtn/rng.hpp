#pragma once

// Seeded random variate generation with a pinned stream: every draw is
// derived from std::mt19937_64 (bit-specified by the C++ standard) through
// the fixed transforms below, so identical seeds give identical traces on
// any conforming platform. Library distribution adapters are avoided on
// purpose: their sequences are implementation-defined.

#include <cmath>
#include <cstdint>
#include <random>

namespace tdtn {

// SplitMix64 finalizer; used to mix (seed, i, j) into substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent substream for an unordered node pair. Streams depend only on
// (seed, i, j), never on n, so a pair's process is reproducible in isolation.
inline std::uint64_t pair_stream_seed(std::uint64_t seed, int i, int j) {
  if (i > j) std::swap(i, j);
  std::uint64_t h = splitmix64(seed ^ 0x705a6e6fe3a1b2c4ULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)));
  return splitmix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(j)) << 32));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0,1) from the top 53 bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0,1]; safe to feed into log().
  double uniform_pos() { return 1.0 - uniform(); }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  // Box-Muller; one variate per call, two uniforms consumed.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Marsaglia-Tsang squeeze for shape >= 1, boosted below 1. `rate` follows
  // the convention pdf ~ x^{shape-1} e^{-rate*x}: mean = shape/rate.
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % bound;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tdtn
