#pragma once

#include <cmath>
#include <cstdint>

namespace trapwalk {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t key, std::uint64_t value) {
  return mix64(key ^ mix64(value + kGolden));
}

// Uniform on (0, 1].
inline double to_unit_open0(std::uint64_t h) {
  return static_cast<double>((h >> 11) + 1) * 0x1.0p-53;
}

// Seed for stream `stream` of replica `index` under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 std::uint64_t stream = 0) {
  return hash_combine(hash_combine(mix64(master), index), stream);
}

// Counter-based stream: draw k is mix64(seed + k * golden).
class WalkRng {
 public:
  WalkRng() = default;
  explicit WalkRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next() { return mix64(seed_ + (++counter_) * kGolden); }
  double uniform() { return to_unit_open0(next()); }  // (0, 1]
  double exponential() { return -std::log(uniform()); }

  // UniformRandomBitGenerator, for the standard distributions.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }
  void set_counter(std::uint64_t c) { counter_ = c; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
};

// Number of failures before the first success when P[failure] = 1 - q_succ,
// given log(1 - q_succ) (strictly negative). Clamped to `cap`.
inline std::int64_t sample_geometric(double u, double log_fail, std::int64_t cap) {
  if (!(log_fail < 0.0)) return cap;
  double g = std::floor(std::log(u) / log_fail);
  if (!(g < static_cast<double>(cap))) return cap;
  return static_cast<std::int64_t>(g);
}

}  // namespace trapwalk
