#pragma once

#include <cstdint>

namespace kltensor {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stateless hash of (seed, counter, stream); used wherever draws must be
/// reproducible independently of evaluation order.
inline constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter,
                                            std::uint64_t stream = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ counter) ^ (stream * 0xd1b54a32d192ed03ULL));
}

/// Uniform double in the open interval (0, 1) from 53 random bits.
inline constexpr double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace kltensor
