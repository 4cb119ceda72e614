#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace pearsonbf {

// SplitMix64 output function; also used as the mixer when deriving
// independent substreams from (seed, cell, replicate) counters.
inline constexpr uint64_t splitmix64_next(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based substream derivation: the stream for a given (cell,
// replicate) pair depends only on the indices, never on execution order, so
// results are identical for any worker-thread count.
inline constexpr uint64_t substream_seed(uint64_t master, uint64_t cell,
                                         uint64_t replicate) {
  uint64_t s = master;
  uint64_t h = splitmix64_next(s);
  s = h ^ (cell * 0x9e3779b97f4a7c15ULL + 0x165667b19e3779f9ULL);
  h = splitmix64_next(s);
  s = h ^ (replicate * 0xc2b2ae3d27d4eb4fULL + 0x27d4eb2f165667c5ULL);
  return splitmix64_next(s);
}

// xoshiro256++ with Box-Muller normal sampling. The normal draw is spelled
// out (rather than std::normal_distribution) so the byte stream is the same
// under every standard library.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) {
    uint64_t s = seed;
    bool all_zero = true;
    for (auto& w : state_) {
      w = splitmix64_next(s);
      all_zero = all_zero && w == 0;
    }
    if (all_zero) state_[0] = 0x9e3779b97f4a7c15ULL;
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform on [0, 1), 53 random bits
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  double next_normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    // u1 in (0, 1] keeps the log finite
    const double u1 = ((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double kTwoPi = 6.28318530717958647693;
    cached_ = r * std::sin(kTwoPi * u2);
    has_cached_ = true;
    return r * std::cos(kTwoPi * u2);
  }

 private:
  static uint64_t rotl(uint64_t v, int s) { return (v << s) | (v >> (64 - s)); }
  std::array<uint64_t, 4> state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace pearsonbf
