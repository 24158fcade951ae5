#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace datasel {

/// Seeded generator shared by every stochastic strategy.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The user seed is passed through one SplitMix64 step before
/// seeding so that consecutive seeds start from unrelated states. Integer and
/// real draws are derived here rather than through <random> distributions,
/// whose algorithms differ between standard libraries. Changing any of this
/// must bump kRngName.
class Rng {
 public:
  static constexpr std::string_view kRngName = "mt19937_64+splitmix64/v1";

  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound), bound > 0. Rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform real in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  static constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace datasel
