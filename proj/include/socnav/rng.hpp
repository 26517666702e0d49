#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

#include "socnav/errors.hpp"

namespace socnav {

// Deterministic, portable PRNG: xoshiro256++ with splitmix64 seeding.
// The exact algorithm is part of the file-format contract — "same seed, same
// run" must hold across platforms and compilers, which std::mt19937_64 plus
// standard-library distributions cannot guarantee.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
  }

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Log-uniform over [lo, hi]; both bounds must be positive.
  double log_uniform(double lo, double hi) {
    if (!(lo > 0.0) || !(hi >= lo)) throw ConfigError("log_uniform requires 0 < lo <= hi");
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  // Uniform integer in [lo, hi], both inclusive. Unbiased via rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw ConfigError("uniform_int requires lo <= hi");
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(next_u64());  // full 64-bit span
    const std::uint64_t bound = (UINT64_MAX / range) * range;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= bound);
    return lo + static_cast<std::int64_t>(r % range);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  // Independent generator derived from this one's stream.
  Rng split() { return Rng(next_u64()); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t state_[4];
};

}  // namespace socnav
