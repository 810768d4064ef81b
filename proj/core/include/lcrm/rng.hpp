#pragma once

#include <cstdint>
#include <random>

namespace lcrm {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based substream derivation: (seed, stream, index) -> independent seed.
// Used for per-column, per-trial and per-role RNG streams so that results do
// not depend on scheduling.
inline constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream,
                                              std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) + index);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  return Rng(substream_seed(seed, stream, index));
}

// Stream tags. Values are arbitrary but frozen: changing them changes every draw.
namespace stream {
inline constexpr std::uint64_t column = 0x636f6c756d6eULL;
inline constexpr std::uint64_t trial = 0x747269616cULL;
inline constexpr std::uint64_t wishart = 0x7769736861ULL;
inline constexpr std::uint64_t pilot = 0x70696c6f74ULL;
inline constexpr std::uint64_t calibration = 0x63616c6962ULL;
inline constexpr std::uint64_t probe = 0x70726f6265ULL;
inline constexpr std::uint64_t signs = 0x7369676e73ULL;
}  // namespace stream

}  // namespace lcrm
