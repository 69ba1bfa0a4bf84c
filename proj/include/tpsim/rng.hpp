// Counter-based random streams.
//
// A stream is a (key, counter) pair; the n-th draw is a pure function of the
// key and n, so streams can be split deterministically by tag and handed to
// concurrent workers without any shared state.
#pragma once

#include <cstdint>
#include <initializer_list>

namespace tpsim {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  /// Independent child stream identified by `tag`; the parent is not advanced.
  RngStream split(std::uint64_t tag) const;
  RngStream split(std::initializer_list<std::uint64_t> tags) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; always consumes exactly two draws.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }
  bool operator==(const RngStream&) const = default;

 private:
  RngStream(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace tpsim
