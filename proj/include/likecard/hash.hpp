#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace likecard {

/// Keyed 64-bit hash (MurmurHash64A construction).
[[nodiscard]] std::uint64_t hash64(std::string_view data, std::uint64_t seed) noexcept;

/// SplitMix64 finalizer; a bijective mixer on 64-bit values.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed number `index` of `parent`. Distinct indices give distinct,
/// unrelated seeds.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Uniform integer in [0, bound) from a 64-bit engine. Unlike
/// std::uniform_int_distribution the result is the same on every standard library.
[[nodiscard]] inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = std::uint64_t(0) - (std::uint64_t(0) - bound) % bound;  // multiple of bound
  for (;;) {
    const std::uint64_t x = rng();
    if (limit == 0 || x < limit) return x % bound;
  }
}

/// Uniform double in [0, 1) with 53 random bits.
[[nodiscard]] inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace likecard
