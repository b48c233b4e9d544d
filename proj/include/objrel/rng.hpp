#pragma once

/// \file rng.hpp
/// Counter-based random numbers: every draw is a pure function of a key and
/// a counter, so streams keyed by (seed, tick, object) can be generated in
/// any order or in parallel with identical results.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace objrel {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t make_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t k = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) k = mix64(k ^ mix64(p));
  return k;
}

class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix64(key_ ^ mix64(counter_++)); }

  /// Uniform in (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal by Box-Muller (cosine branch only).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stream identifiers mixed into keys.
enum class Stream : std::uint64_t {
  ImuNoise = 1,
  BiasWalk = 2,
  InitialBias = 3,
  Measurement = 4,
  InitialError = 5,
  TrajectoryPhase = 6,
};

}  // namespace objrel
