#include "qfl/rng.hpp"

#include <limits>

#include "qfl/errors.hpp"

namespace qfl::rng {

std::uint64_t mix(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t tag : tags) {
    h = splitmix64(h ^ tag);
  }
  return h;
}

std::uint64_t Prng::next_below(std::uint64_t bound) {
  if (bound == 0) {
    throw UsageError("next_below: bound must be positive");
  }
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % bound;
  std::uint64_t x = next_u64();
  while (x >= limit) {
    x = next_u64();
  }
  return x % bound;
}

std::vector<std::size_t> Prng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) {
    throw UsageError("sample_without_replacement: k exceeds population size");
  }
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) {
    pool[i] = i;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(next_below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

void Prng::shuffle(std::vector<std::size_t>& values) {
  const std::size_t n = values.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(next_below(n - i));
    std::swap(values[i], values[j]);
  }
}

}  // namespace qfl::rng
