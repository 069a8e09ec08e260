#pragma once

#include <cstdint>
#include <random>

namespace mixqcd {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; turns (base, index) into a well-mixed child seed so
/// parallel workers get independent, schedule-independent streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits. Unlike
/// std::uniform_real_distribution the stream is identical across standard
/// libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace mixqcd
