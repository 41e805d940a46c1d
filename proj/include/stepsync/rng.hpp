#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace stepsync {

/// splitmix64 mixing step. Used to derive decorrelated sub-seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Combine a seed with a stream/trial identifier.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

/// FNV-1a over a label, for hashing condition-cell identifiers into seeds.
constexpr std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char ch : label) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x00000100000001B3ULL;
  }
  return h;
}

/// Seeded generator with pinned sampling algorithms, so a seed reproduces the
/// identical stream on every platform and standard library. Normal deviates
/// use Box-Muller (no cached spare; two uniforms per sample).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal(double mean, double sd) {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * 3.141592653589793 * u2);
  }

  /// Uniform integer in [lo, hi], inclusive. Rejection-sampled, exactly uniform.
  int uniform_int(int lo, int hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return lo + static_cast<int>(x % range);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace stepsync
