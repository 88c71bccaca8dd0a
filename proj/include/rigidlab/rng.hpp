#pragma once

#include <cstdint>
#include <random>

#include "rigidlab/numeric.hpp"

namespace rigidlab {

// Deterministic random source.  The mt19937_64 engine's output stream is
// pinned by the standard, so runs are reproducible across platforms; the
// bounded draw is done by rejection here because the standard library's
// distributions are not portable.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // uniform in [0, bound), bound >= 1
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw ConfigError("DetRng::below(0)");
    if ((bound & (bound - 1)) == 0) {
      // power of two: mask
      return eng_() & (bound - 1);
    }
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = eng_();
    } while (v >= limit);
    return v % bound;
  }

  // uniform integer in [0, bound), bound >= 1, arbitrary size
  Int below_big(const Int& bound) {
    if (bound <= 0) throw ConfigError("DetRng::below_big needs bound >= 1");
    unsigned bits = bit_length(bound);
    while (true) {
      Int v = random_bits(bits);
      if (v < bound) return v;
    }
  }

  // uniform dyadic with the given number of fractional bits
  Int random_bits(unsigned bits) {
    Int v = 0;
    unsigned got = 0;
    while (got + 64 <= bits) {
      v <<= 64;
      v |= Int(eng_());
      got += 64;
    }
    if (got < bits) {
      unsigned rest = bits - got;
      v <<= rest;
      v |= Int(eng_() >> (64 - rest));
    }
    return v;
  }

  FixedAngle random_angle(unsigned frac_bits) {
    return FixedAngle(random_bits(frac_bits), frac_bits);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace rigidlab
