#pragma once

#include <cstdint>

namespace hcd {

/// splitmix64 finalizer; the project-wide mixing primitive for deriving
/// independent seeds (per window, per ensemble run) from one global seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Combine two 64-bit values into one well-mixed seed.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (splitmix64(b) + 0x9E3779B97F4A7C15ULL));
}

/// Unbiased-enough uniform draw over [lo, hi] from a 64-bit hash value
/// (multiply-shift; bias is 2^-64 per bucket, irrelevant at these ranges).
inline int uniform_from_hash(std::uint64_t h, int lo, int hi) {
  const std::uint64_t range = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>((static_cast<unsigned __int128>(h) * range) >> 64);
}

}  // namespace hcd
