#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace qfl::rng {

// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a stream seed from a base seed and a tag path, e.g.
// mix(run_seed, {kEpoch, client_id, round, epoch}). Tag values are arbitrary
// but fixed; changing them changes every seeded run.
std::uint64_t mix(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

inline constexpr std::uint64_t kMoons = 0x6d6f6f6e73ULL;
inline constexpr std::uint64_t kPartition = 0x706172746eULL;
inline constexpr std::uint64_t kWeightInit = 0x77696e6974ULL;
inline constexpr std::uint64_t kEpoch = 0x65706f6368ULL;
inline constexpr std::uint64_t kMlpInit = 0x6d6c70ULL;

// Deterministic generator with fixed output derivations. All randomness in
// the library flows through this class so seeded runs are reproducible
// bit-for-bit on a given platform.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double low, double high) {
    return low + (high - low) * uniform01();
  }

  // Standard normal via Box-Muller.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  // Unbiased draw from [0, bound).
  std::uint64_t next_below(std::uint64_t bound);

  // k distinct indices from [0, n), order given by a partial Fisher-Yates.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  void shuffle(std::vector<std::size_t>& values);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qfl::rng
