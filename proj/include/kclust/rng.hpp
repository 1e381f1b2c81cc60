#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace kclust {

/// Seeded random source with independent streams. The integer draws are a
/// pure function of (seed, stream): the engine is the standard-specified
/// mt19937_64 and the bounded/real conversions below avoid the
/// implementation-defined std distributions, so replay is stable across
/// platforms. normal() goes through libm (sqrt/log/cos), which can differ
/// in the last ulp between C libraries.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {
    std::uint64_t x = splitmix64(seed);
    x = splitmix64(x ^ (0x9e3779b97f4a7c15ULL + stream));
    engine_.seed(x);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Child source for an independent substream (per trial, per run seed).
  RandomSource derive(std::uint64_t substream) const {
    return RandomSource(seed_, splitmix64(stream_ ^ (substream + 1)));
  }

  std::uint64_t u64() { return engine_(); }

  /// Unbiased integer in [0, n) via rejection sampling.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      std::uint64_t r = u64();
      if (r >= threshold) return r % n;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double real() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(u64() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = real();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace kclust
