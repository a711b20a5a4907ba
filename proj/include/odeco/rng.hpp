#pragma once

#include <cstdint>

namespace odeco {

/// Counter-based RNG: every draw is a pure hash of (seed, stream, counter),
/// so perturbation noise is reproducible regardless of evaluation order or
/// thread count.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  /// Uniform in [0, 1).
  double uniform(std::uint64_t stream, std::uint64_t counter) const {
    return static_cast<double>(hash(stream, counter) >> 11) * 0x1.0p-53;
  }

  /// Uniform in (-half_width, half_width).
  double symmetric(std::uint64_t stream, std::uint64_t counter,
                   double half_width) const {
    return (2.0 * uniform(stream, counter) - 1.0) * half_width;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t hash(std::uint64_t stream, std::uint64_t counter) const {
    return mix(mix(mix(seed_) ^ stream) ^ counter);
  }

  std::uint64_t seed_;
};

/// Fixed stream ids so independent consumers never collide.
namespace rng_stream {
inline constexpr std::uint64_t kPerturbation = 0x70657274ull;  // per (trial, vertex, slot)
inline constexpr std::uint64_t kColdStart = 0x636f6c64ull;
inline constexpr std::uint64_t kSeedPoints = 0x73656564ull;
}  // namespace rng_stream

/// Packs (trial, vertex, slot) into one counter; vertex counts stay far
/// below 2^40 and slots below 2^8 at any mesh size this tool targets.
inline std::uint64_t pack_counter(std::uint64_t trial, std::uint64_t vertex,
                                  std::uint64_t slot) {
  return (trial << 48) ^ (vertex << 8) ^ slot;
}

}  // namespace odeco
