#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace qelab {

/// Purpose tags mixed into every stream key. The numeric values are part of
/// the reproducibility contract: changing one changes every downstream draw.
enum class StreamTag : std::uint64_t {
  graph = 0x6772617068ULL,          // "graph"
  potential = 0x706f74ULL,           // "pot"
  observable = 0x6f6273ULL,          // "obs"
  tree_level = 0x747265656cULL,      // "treel"
  tree_draw = 0x7472656564ULL,       // "treed"
  tree_exact = 0x7472656578ULL,      // "treex"
};

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Hashes (seed, tag, indices...) into a 64-bit stream key.
constexpr std::uint64_t stream_key(std::uint64_t seed, StreamTag tag,
                                   std::initializer_list<std::uint64_t> indices) {
  std::uint64_t key = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(tag)));
  for (std::uint64_t i : indices) key = splitmix64(key ^ splitmix64(i + 0x632BE59BD9B4E019ULL));
  return key;
}

/// Counter-based generator: the n-th output is splitmix64(key + n * golden),
/// so any position of the stream can be reproduced without replaying it.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t seed, StreamTag tag, std::initializer_list<std::uint64_t> indices)
      : key_(stream_key(seed, tag, indices)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return at(counter_++); }
  result_type at(std::uint64_t position) const { return splitmix64(key_ + position * kGolden); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by rejection, bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % bound;
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace qelab
