#pragma once

#include <cstdint>

namespace hfl {

// Deterministic 64-bit PRNG (xoshiro256++), seeded via splitmix64.
// All campaign randomness flows through instances of this class so that
// runs replay bit-for-bit from a single seed.
class Rng {
public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto &w : s) w = splitMix(x);
  }

  uint64_t next() {
    uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }

  // Uniform in [0, n); n must be > 0. Rejection-free modulo is fine here:
  // reproducibility matters, statistical perfection does not.
  uint64_t below(uint64_t n) { return next() % n; }

  // Uniform in [lo, hi] inclusive.
  uint64_t between(uint64_t lo, uint64_t hi) { return lo + below(hi - lo + 1); }

  bool chance(double p) {
    return static_cast<double>(next() >> 11) * 0x1.0p-53 < p;
  }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Independent child stream; used to hand each worker its own generator.
  Rng split() { return Rng(next() ^ 0x9e3779b97f4a7c15ULL); }

  static uint64_t splitMix(uint64_t &x) {
    x += 0x9e3779b97f4a7c15ULL;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  uint64_t s[4];
};

} // namespace hfl
