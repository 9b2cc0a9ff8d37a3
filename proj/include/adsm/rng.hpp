#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace adsm {

/// mt19937_64 output is fixed by the standard, so every draw below is
/// bit-reproducible across standard libraries. The std distributions are not,
/// which is why variates are produced by hand from uniform01().
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent substream seed from a parent seed and a path of
/// tags, e.g. derive_seed(master, {kReplicationTag, r, v}). Streams depend only
/// on their own path, so adding replications or nodes never perturbs existing
/// streams.
inline std::uint64_t derive_seed(std::uint64_t parent,
                                 std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = mix64(parent);
  for (std::uint64_t tag : path) s = mix64(s ^ mix64(tag + 0x632be59bd9b4e019ULL));
  return s;
}

/// Uniform on the open interval (0, 1) with 53 bits of resolution.
inline double uniform01(Rng& rng) noexcept {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by rejection; bound must be > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) noexcept {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

namespace stream_tag {
inline constexpr std::uint64_t graph = 1;
inline constexpr std::uint64_t replication = 2;
inline constexpr std::uint64_t node = 3;
inline constexpr std::uint64_t init = 4;
}  // namespace stream_tag

}  // namespace adsm
