#ifndef ADB_CORE_RNG_HPP
#define ADB_CORE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace adb {

// Deterministic random source. std::mt19937_64 has a fully specified output
// sequence, but the standard distributions do not, so every mapping from raw
// engine words to samples is spelled out here. Given a seed, all draws are
// reproducible across platforms and standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller. Consumes exactly two engine words and
  // keeps no cached spare, so the draw sequence is position-independent.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    // log argument kept strictly positive
    double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  // Unbiased integer in [0, n) by rejection sampling.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t rem = (max % n + 1) % n;  // 2^64 mod n
    const std::uint64_t limit = max - rem;
    std::uint64_t x = engine_();
    while (rem != 0 && x > limit) x = engine_();
    return x % n;
  }

  // Fisher-Yates shuffle using below().
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer; decorrelates stage seeds derived from one run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stage salts used when one user-facing seed drives a multi-stage pipeline.
inline constexpr std::uint64_t kSubsampleSalt = 1;
inline constexpr std::uint64_t kRepSalt = 2;
inline constexpr std::uint64_t kBoundarySalt = 3;

}  // namespace adb

#endif  // ADB_CORE_RNG_HPP
