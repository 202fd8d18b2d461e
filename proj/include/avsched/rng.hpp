#pragma once

// Seedable, splittable pseudorandom generator (splitmix64 core). Every
// stochastic draw in the scheduler flows from one top-level seed through
// named stream splits, so runs replay byte-for-byte.

#include <cstdint>
#include <string>

namespace avs {

class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed = 0) : state_(seed ^ kGolden) {}

  /// Derive an independent stream for (label, index) without advancing this
  /// generator. Identical paths always yield identical streams.
  SplitRng split(std::uint64_t label, std::uint64_t index = 0) const {
    std::uint64_t s = state_;
    s = mix(s ^ (label * 0x9E3779B97F4A7C15ULL));
    s = mix(s ^ (index * 0xBF58476D1CE4E5B9ULL));
    return SplitRng(FromState{}, s);
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  std::uint64_t state() const { return state_; }

 private:
  struct FromState {};
  SplitRng(FromState, std::uint64_t raw) : state_(raw) {}

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// Well-known stream labels, kept in one place so seed paths stay stable.
namespace rng_stream {
inline constexpr std::uint64_t kRotationSynthesis = 1;
inline constexpr std::uint64_t kYConsumption = 2;
inline constexpr std::uint64_t kCircuitGen = 3;
inline constexpr std::uint64_t kTestData = 4;
}  // namespace rng_stream

}  // namespace avs
