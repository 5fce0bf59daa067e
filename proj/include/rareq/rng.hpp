#pragma once

#include <cstdint>
#include <random>

namespace rareq {

using Rng = std::mt19937_64;

/// Uniform variate in [0, 1) built from the top 53 bits of the generator
/// output. Unlike std::uniform_real_distribution, the mapping is fixed by
/// this library, so sequences are identical across standard library
/// implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// splitmix64 finalizer, used to derive well-separated substream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Generator for substream `stream` of a master seed. Streams with distinct
/// ids are independent for practical purposes and reproducible.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(mix64(seed + 0x9e3779b97f4a7c15ull * stream));
}

}  // namespace rareq
