#pragma once

#include <cstdint>

#include "dwp/special.hpp"

namespace dwp {

// Counter-based deterministic PRNG. A draw is a stateless hash of
// (seed, stream, counter), so sequences replay bit-identically and `split`
// hands out child streams whose (stream, counter) pairs are disjoint from
// the parent's.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  explicit RngStream(uint64_t seed, uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }
  uint64_t counter() const { return counter_; }

  uint64_t next_u64() { return mix3(seed_, stream_, counter_++); }

  // Uniform in the open interval (0, 1).
  double uniform() { return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() { return norm_quantile(uniform()); }

  // Gamma(shape, rate 1) by CDF inversion; smooth in `shape` under common
  // random numbers, which the implicit reparameterization gradients rely on.
  double gamma(double shape) { return gamma_icdf(shape, uniform()); }

  RngStream split() {
    const uint64_t child = mix3(seed_ ^ 0x9e3779b97f4a7c15ull, stream_, ++splits_);
    return RngStream(seed_, child);
  }

 private:
  static uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  static uint64_t mix3(uint64_t a, uint64_t b, uint64_t c) {
    return mix64(a ^ mix64(b ^ mix64(c)));
  }

  uint64_t seed_ = 0, stream_ = 0, counter_ = 0, splits_ = 0;
};

}  // namespace dwp
