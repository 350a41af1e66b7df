#ifndef PTGEN_RNG_HPP
#define PTGEN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace ptgen {

// splitmix64 step; full 64-bit avalanche.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Fold an ordered key tuple into a single 64-bit seed.
inline std::uint64_t combine_keys(std::initializer_list<std::uint64_t> keys) {
  std::uint64_t state = 0x8f1bbcdcbfa53e0bull;
  std::uint64_t acc = 0;
  for (std::uint64_t k : keys) {
    state ^= k;
    acc = splitmix64(state);
  }
  return acc;
}

// Small counter-based generator. Seeding from an explicit key tuple keeps
// every random draw independent of iteration order, so results do not change
// when loops are restructured or work is resumed mid-run.
class KeyedRng {
 public:
  explicit KeyedRng(std::uint64_t seed) : state_(seed) {}
  KeyedRng(std::initializer_list<std::uint64_t> keys) : state_(combine_keys(keys)) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; the second draw of each pair is cached.
  double normal(double mean, double stddev) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + stddev * r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ptgen

#endif
