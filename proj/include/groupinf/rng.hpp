#pragma once

#include <cstdint>
#include <random>

namespace groupinf {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based child seed: a pure function of (master, stream, index), so
/// work items can be scheduled in any order without changing their draws.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) + index);
}

// Stream tags, one per consumer of randomness.
namespace streams {
inline constexpr std::uint64_t kTrial = 0x7472;
inline constexpr std::uint64_t kImportance = 0x6973;
inline constexpr std::uint64_t kGroupTest = 0x6774;
}  // namespace streams

}  // namespace groupinf
