#pragma once

#include <cstdint>
#include <string_view>

namespace vicorpus {

/// splitmix64 finalizer. The instrumentation script carries a bit-identical
/// BigInt port so host and page agree on every derived value.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Sequential splitmix64 generator: state += golden gamma, output = mix(state).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(state_);
  }

  constexpr std::uint64_t operator()() { return next(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  /// Index in [0, n). Plain modulo; the bias is below 2^-50 for n < 2^14.
  constexpr std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

 private:
  std::uint64_t state_;
};

/// Per-document seed: independent of processing order and worker count.
constexpr std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view key) {
  return splitmix64_mix(run_seed ^ fnv1a64(key));
}

}  // namespace vicorpus
