#pragma once

#include <cstdint>

namespace fklab {

// Reproducibility contract: chain c of a run seeded with master seed m uses a
// xoshiro256++ stream whose state is derived by SplitMix64 from m and c. The
// same (m, c) yields the same stream on every platform; uniform doubles come
// from the top 53 bits, so results are bit-identical across standard libraries.

struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

class Rng {
 public:
  Rng() : Rng(0, 0) {}
  Rng(uint64_t master_seed, uint64_t stream) {
    SplitMix64 sm(master_seed ^ (0xa0761d6478bd642full * (stream + 1)));
    for (auto& w : s_) w = sm.next();
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  uint64_t next_u64() {
    uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0,1)
  double uniform() { return (double)(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // uniform integer in [0, n)
  uint64_t below(uint64_t n) {
    // multiply-shift; bias < 2^-64, irrelevant at our sample sizes
    return (uint64_t)(((__uint128_t)next_u64() * n) >> 64);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
};

}  // namespace fklab
