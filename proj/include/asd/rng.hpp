#pragma once

#include <cstdint>

namespace asd {

// Counter-based splittable stream (splitmix64 core). Streams are keyed by up
// to three 64-bit components so that every bootstrap replicate and Monte
// Carlo run owns an independent substream; results are then bitwise
// reproducible for a given seed regardless of scheduling or worker count.
class RngStream {
 public:
  static RngStream keyed(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2 = 0,
                         std::uint64_t k3 = 0) {
    std::uint64_t s = mix(seed + kGamma);
    s = mix(s ^ (k1 + kGamma));
    s = mix(s ^ (k2 + kGamma));
    s = mix(s ^ (k3 + kGamma));
    return RngStream(s);
  }

  std::uint64_t next() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0,1); safe as an argument to quantile
  // functions and logs.
  double uniform_open01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n) (Lemire's multiply-shift with rejection).
  std::uint64_t uniform_below(std::uint64_t n) {
    using u128 = unsigned __int128;
    std::uint64_t x = next();
    u128 m = static_cast<u128>(x) * static_cast<u128>(n);
    std::uint64_t lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        x = next();
        m = static_cast<u128>(x) * static_cast<u128>(n);
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  explicit RngStream(std::uint64_t state) : state_(state) {}

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

// Key-space tags: keep replicate streams, Monte Carlo run streams and data
// generation streams disjoint.
namespace rng_tag {
inline constexpr std::uint64_t bootstrap = 0xB005;
inline constexpr std::uint64_t monte_carlo = 0x3C17;
inline constexpr std::uint64_t data = 0xDA7A;
}  // namespace rng_tag

}  // namespace asd
