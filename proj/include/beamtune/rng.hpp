#pragma once

#include <cstdint>
#include <string_view>

namespace beamtune {

// Deterministic 64-bit generator (the "splitmix64" mixing function).
// Every random draw in the toolkit flows through this class so that seeded
// corpora, models, and experiments are bit-identical across platforms and
// standard-library versions.  The algorithm name is recorded in generated
// corpus headers; see Rng::kName.
class Rng {
 public:
  static constexpr std::string_view kName = "splitmix64";

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [lo, hi], inclusive, unbiased via rejection sampling.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t span = hi - lo + 1;
    if (span == 0) return next();  // the full 64-bit range
    std::uint64_t reject_below = (0 - span) % span;
    for (;;) {
      std::uint64_t r = next();
      if (r >= reject_below) return lo + r % span;
    }
  }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace beamtune
