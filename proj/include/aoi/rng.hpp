#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace aoi {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Small counter-based generator (xoshiro256** seeded via splitmix64).
/// Used instead of <random> engines so that streams are cheap to fork
/// per device and identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  /// Independent substream, e.g. one per device.
  Rng fork(std::uint64_t stream_id) const {
    std::uint64_t sm = s_[0] ^ (0xd1342543de82ef95ULL * (stream_id + 1));
    return Rng(splitmix64(sm));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0,1) with 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  double gaussian() {
    // Box-Muller, one value per call
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Binomial(n, p). Direct counting for small n, pmf inversion otherwise
  /// (all sampling call sites have small n*p, so inversion is O(mean)).
  int binomial(int n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (n <= 64) {
      int k = 0;
      for (int i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
      return k;
    }
    if (static_cast<double>(n) * std::min(p, 1.0 - p) > 30.0) {
      // inversion would underflow at k = 0; normal approximation is fine here
      const double mean = n * p;
      const double sd = std::sqrt(n * p * (1.0 - p));
      const double k = std::round(mean + sd * gaussian());
      return static_cast<int>(std::clamp(k, 0.0, static_cast<double>(n)));
    }
    const double u = next_double();
    double pmf = std::pow(1.0 - p, n);  // k = 0
    double cdf = pmf;
    int k = 0;
    const double ratio = p / (1.0 - p);
    while (u > cdf && k < n) {
      pmf *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
      ++k;
      cdf += pmf;
      if (pmf <= 0.0) break;  // underflow in a far tail
    }
    return k;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace aoi
