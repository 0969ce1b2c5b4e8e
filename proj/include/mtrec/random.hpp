#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mtrec {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based seed derivation for one (user, method, iteration) case:
///
///   s0 = mix64(master)
///   s1 = mix64(s0 ^ user)
///   s2 = mix64(s1 ^ stream)
///   s3 = mix64(s2 ^ iteration)
///
/// Any single case can be replayed from the master seed alone.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t user,
                                    std::uint64_t stream,
                                    std::uint64_t iteration) noexcept {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ user);
  s = mix64(s ^ stream);
  return mix64(s ^ iteration);
}

/// 64-bit FNV-1a, used to fold text into a seed.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seeded generator with platform-independent draws. The standard
/// distributions are implementation-defined, so uniform draws are derived
/// directly from the mt19937_64 stream, whose output is fixed by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// True with probability `p` (p <= 0 never, p >= 1 always).
  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n) by rejection sampling; n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return draw % n;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mtrec
