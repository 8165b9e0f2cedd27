#pragma once

// Deterministic pseudo-random streams for data generation and Monte Carlo.
//
// The generator is SplitMix64 (Steele, Lea & Flood, "Fast Splittable
// Pseudorandom Number Generators", OOPSLA 2014): a counter advanced by the
// golden-ratio increment and finalized with a 64-bit mix. Substreams are
// derived by taking distinct outputs of a parent sequence, so stream k of a
// given seed is reproducible independently of how many draws other streams
// have consumed. This is what makes replicate-level parallelism bitwise
// deterministic.

#include <cmath>
#include <cstdint>

namespace catea {

namespace detail {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}
}  // namespace detail

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += detail::kGolden;
    return detail::mix64(state_);
  }

  // Uniform double in [0, 1), 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1]; safe as a log() argument.
  double next_unit_open() { return 1.0 - next_unit(); }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  bool next_bernoulli(double p) { return next_unit() < p; }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit_open();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Seed for substream `key` of `seed`: the (key+1)-th output of a SplitMix64
// sequence started at `seed`. Distinct keys give distinct, well-mixed seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) {
  return detail::mix64(seed + detail::kGolden * (key + 1));
}

}  // namespace catea
