#pragma once

#include <cstdint>
#include <limits>

// Seeded substream derivation for all randomized code. Streams are keyed by
// folding integer coordinates (replication, round, location, ...) into a
// master seed one word at a time, so any draw is reproducible in isolation
// and parallel runs produce bit-identical results to sequential ones.

namespace engage {

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

// Derive a child key from a parent key and one coordinate word.
inline std::uint64_t fold(std::uint64_t seed, std::uint64_t word) {
  return mix64(seed + 0x9e3779b97f4a7c15ull * (word + 1));
}

// Splitmix-style counter stream. Satisfies UniformRandomBitGenerator so it
// can drive std:: distributions directly.
class Substream {
 public:
  using result_type = std::uint64_t;

  explicit Substream(std::uint64_t key) : state_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  double uniform01() {
    return static_cast<double>(operator()() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = operator()();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::uint64_t state_;
};

}  // namespace engage
