#pragma once

#include <cstdint>
#include <random>

namespace visopt {

/// splitmix64 finalizer. Decorrelates nearby integer seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Derives a stream seed from a base seed and up to two tags (run index,
/// epoch, frame id, ...). Pure function of its inputs.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0) {
  return mix_seed(mix_seed(base ^ mix_seed(a)) ^ mix_seed(~b));
}

/// Deterministic RNG used throughout the toolkit.
///
/// std::mt19937_64 is fully specified by the standard, but the std
/// distributions are not; the draw methods below are fixed algorithms so
/// that a given seed produces the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(mix_seed(seed)) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n). n must be nonzero.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = ~0ull - (~0ull % n + 1) % n;
    std::uint64_t x = next_u64();
    while (x > limit) x = next_u64();
    return x % n;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace visopt
