#pragma once

#include <cmath>
#include <cstdint>

namespace twin {

// xoshiro256++ with splitmix64 seeding. Self-contained so that identical
// seeds give bit-identical streams on every platform and toolchain; the
// standard <random> distributions do not guarantee that.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // 53-bit uniform in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

  // Inversion by sequential search; large means are split so the running
  // product never underflows. Sums of independent Poissons stay Poisson.
  std::int64_t poisson(double mean) {
    if (mean <= 0) return 0;
    if (mean > 60.0) return poisson(mean / 2) + poisson(mean - mean / 2);
    const double floor = std::exp(-mean);
    double p = 1.0;
    std::int64_t k = 0;
    for (;;) {
      p *= uniform01();
      if (p <= floor) return k;
      ++k;
    }
  }

  // Derives an independent stream id, used to give every generator in a
  // scenario its own seed.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    return splitmix64(x);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t s_[4];
};

}  // namespace twin
