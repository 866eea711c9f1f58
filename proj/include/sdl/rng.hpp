#pragma once

#include <cstdint>

namespace sdl {

// splitmix64; small, fast and stable across platforms, so recorded seeds
// replay identically everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). n must be > 0.
  uint64_t uniform(uint64_t n) { return next_u64() % n; }

  bool chance(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 < p;
  }

 private:
  uint64_t state_;
};

// Per-run seeds derived from a campaign master seed by index.
inline uint64_t derive_seed(uint64_t master, uint64_t index) {
  Rng r(master ^ (0x6a09e667f3bcc909ULL + index * 0x9e3779b97f4a7c15ULL));
  return r.next_u64();
}

}  // namespace sdl
