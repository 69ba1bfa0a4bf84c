#include "tpsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace tpsim {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

RngStream RngStream::split(std::uint64_t tag) const {
  return RngStream{mix64(key_ ^ mix64(tag * kGolden + 0x243f6a8885a308d3ULL)), 0};
}

RngStream RngStream::split(std::initializer_list<std::uint64_t> tags) const {
  RngStream s = *this;
  for (auto t : tags) s = s.split(t);
  return s;
}

std::uint64_t RngStream::next_u64() {
  // SplitMix64 evaluated at position `counter_`.
  return mix64(key_ + (++counter_) * kGolden);
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace tpsim
