#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fd3 {

using Rng = std::mt19937_64;

// SplitMix64 finaliser; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return mix_seed(mix_seed(mix_seed(base) ^ a) ^ b);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

// Uniform draw on [lo, hi]; a point interval returns lo exactly.
inline double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
}

}  // namespace fd3
