#pragma once

#include <cstdint>
#include <random>

namespace spincool {

// SplitMix64 finalizer.  Used to derive per-trajectory seeds from
// (base_seed, index) so that trajectories are statistically independent and
// reproducible no matter how work is distributed over threads:
//
//   trajectory_seed = mix64(base_seed + GOLDEN * (index + 1))
//
// The +1 keeps index 0 from collapsing onto the raw base seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  return mix64(base_seed + 0x9e3779b97f4a7c15ull * (index + 1));
}

// Thin wrapper around mt19937_64 that produces doubles and bounded integers
// without std::uniform_*_distribution, whose output is not pinned down by the
// standard.  Everything here is bit-reproducible for a given seed on any
// conforming implementation.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, 2^bits), bits <= 64.  Takes the high bits of one
  // draw; consumes exactly one value from the stream.
  std::uint64_t bits(int nbits) {
    return nbits == 0 ? 0 : gen_() >> (64 - nbits);
  }

  // Uniform in {0, 1, 2}; one draw.
  int choice3() {
    int c = static_cast<int>(uniform() * 3.0);
    return c > 2 ? 2 : c;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace spincool
