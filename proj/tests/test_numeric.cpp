#include <doctest.h>

#include "rigidlab/numeric.hpp"
#include "rigidlab/rng.hpp"

using namespace rigidlab;

TEST_CASE("integer helpers") {
  CHECK(bit_length(Int(0)) == 0);
  CHECK(bit_length(Int(1)) == 1);
  CHECK(bit_length(Int(255)) == 8);
  CHECK(bit_length(Int(256)) == 9);
  CHECK(bit_length(Int(-17)) == 5);
  CHECK((pow2(10) == 1024));
  CHECK((ipow(3, 0) == 1));
  CHECK((ipow(3, 7) == 2187));
  CHECK((ipow(Int(10), 20) == Int("100000000000000000000")));
}

TEST_CASE("floor division follows the divisor sign") {
  CHECK((floor_div(7, 2) == 3));
  CHECK((floor_div(-7, 2) == -4));
  CHECK((floor_div(7, -2) == -4));
  CHECK((mod_floor(-7, 2) == 1));
  CHECK((mod_floor(7, -2) == -1));
  for (int a = -20; a <= 20; ++a)
    for (int b : {-7, -3, -1, 1, 2, 5}) {
      Int q = floor_div(a, b), r = mod_floor(a, b);
      CHECK((q * b + r == a));
      if (b > 0) CHECK((r >= 0 && r < b));
      if (b < 0) CHECK((r <= 0 && r > b));
    }
}

// brute force oracle for the Euclid-style floor sum
static Int floor_sum_slow(long n, long a, long b, long c) {
  Int acc = 0;
  for (long i = 0; i < n; ++i) acc += floor_div(Int(a) * i + b, Int(c));
  return acc;
}

TEST_CASE("floor_sum matches direct summation, negatives included") {
  for (long a : {-13L, -4L, 0L, 3L, 11L})
    for (long b : {-9L, -1L, 0L, 2L, 17L})
      for (long c : {1L, 2L, 7L, 12L}) {
        Int fast = floor_sum(Int(25), Int(a), Int(b), Int(c));
        CHECK_MESSAGE((fast == floor_sum_slow(25, a, b, c)),
                      "a=" << a << " b=" << b << " c=" << c);
      }
  // a large case against the telescoping identity
  // sum_{i<n} floor(i/2) = floor((n-1)/2)*ceil((n-1)/2)... easier: pair check
  Int n = 100000;
  Int direct = (n / 2 - 1) * (n / 2) / 2 * 2 + n / 2 * 0;  // not used; see below
  (void)direct;
  // sum floor(i/2), i<n: each value v appears twice (i=2v, 2v+1)
  Int m = n / 2;
  CHECK((floor_sum(n, 1, 0, 2) == m * (m - 1)));
}

TEST_CASE("fractional part and distance to the nearest integer") {
  CHECK((frac_part(Rat(7, 3)) == Rat(1, 3)));
  CHECK((frac_part(Rat(-1, 3)) == Rat(2, 3)));
  CHECK((frac_part(Rat(5)) == 0));
  CHECK((norm_dist(Rat(1, 3)) == Rat(1, 3)));
  CHECK((norm_dist(Rat(2, 3)) == Rat(1, 3)));
  CHECK((norm_dist(Rat(-1, 4)) == Rat(1, 4)));
  CHECK((norm_dist(Rat(9, 2)) == Rat(1, 2)));
  CHECK((norm_dist(Rat(6)) == 0));
}

TEST_CASE("rational parsing accepts p/q and rejects junk") {
  CHECK((parse_rat("3/4") == Rat(3, 4)));
  CHECK((parse_rat("-12") == Rat(-12)));
  CHECK((parse_int("123456789012345678901") == Int("123456789012345678901")));
  CHECK_THROWS_AS(parse_rat("a/b"), ConfigError);
  CHECK_THROWS_AS(parse_rat("1/0"), ConfigError);
  CHECK_THROWS_AS(parse_int("12x"), ConfigError);
}

TEST_CASE("interval arithmetic keeps enclosures") {
  RatIv a(Rat(1, 3), Rat(1, 2)), b(Rat(-2), Rat(5));
  RatIv s = iv_add(a, b);
  CHECK((s.lo == Rat(1, 3) - 2));
  CHECK((s.hi == Rat(1, 2) + 5));
  RatIv p = iv_mul(a, b);
  // sample products stay inside
  CHECK(p.contains(Rat(1, 3) * Rat(-2)));
  CHECK(p.contains(Rat(1, 2) * Rat(5)));
  CHECK(p.contains(Rat(2, 5) * Rat(1)));
  CHECK_THROWS_AS(iv_div(a, RatIv(Rat(-1), Rat(1))), InternalError);
  RatIv d = iv_div(b, a);
  CHECK(d.contains(Rat(0)));
  CHECK(d.contains(Rat(5) / Rat(1, 3)));
  // outward dyadic rounding: contains the original, width grows a little
  RatIv r = iv_round_out(RatIv(Rat(1, 3), Rat(2, 3)), 16);
  CHECK((r.lo <= Rat(1, 3)));
  CHECK((r.hi >= Rat(2, 3)));
  CHECK((r.width() <= Rat(1, 3) + Rat(4, 65536)));
  CHECK((denominator(r.lo) <= 65536));
}

TEST_CASE("complex rectangles multiply correctly on exact points") {
  CxIv z(RatIv(Rat(1, 2)), RatIv(Rat(1, 3)));   // 1/2 + i/3
  CxIv w(RatIv(Rat(-2)), RatIv(Rat(1)));        // -2 + i
  CxIv p = cx_mul(z, w);
  // (1/2 + i/3)(-2 + i) = (-1 - 1/3) + i(1/2 - 2/3)
  CHECK((p.re.lo == Rat(-4, 3)));
  CHECK((p.re.hi == Rat(-4, 3)));
  CHECK((p.im.lo == Rat(-1, 6)));
  CHECK((p.im.hi == Rat(-1, 6)));
  RatIv sq = cx_abs_sq(p);
  CHECK(sq.contains(Rat(16, 9) + Rat(1, 36)));
  CxIv c = cx_conj(p);
  CHECK((c.im.hi == Rat(1, 6)));
  CxIv q = cx_div(p, w);
  CHECK(q.re.contains(Rat(1, 2)));
  CHECK(q.im.contains(Rat(1, 3)));
}

TEST_CASE("certified trig values at special angles") {
  unsigned bits = 96;
  RatIv c0 = cos2pi_iv(Rat(0), bits);
  CHECK(c0.contains(Rat(1)));
  CHECK((c0.width() < Rat(1, pow2(64))));
  CHECK(cos2pi_iv(Rat(1, 2), bits).contains(Rat(-1)));
  CHECK(cos2pi_iv(Rat(1, 4), bits).contains(Rat(0)));
  CHECK(sin2pi_iv(Rat(1, 4), bits).contains(Rat(1)));
  CHECK(sin2pi_iv(Rat(17, 4), bits).contains(Rat(1)));  // reduced mod 1 first
  // cos(2 pi / 3) = -1/2 exactly
  CHECK(cos2pi_iv(Rat(1, 3), bits).contains(Rat(-1, 2)));
  CHECK(cos2pi_iv(Rat(-1, 3), bits).contains(Rat(-1, 2)));
  // e^{-2 pi i t} lies on the unit circle
  CxIv e = e2pi_minus_iv(Rat(1, 7), bits);
  CHECK(cx_abs_sq(e).contains(Rat(1)));
  CHECK((e.im.hi < 0));  // sin(2 pi / 7) > 0, so the minus sign flips it
}

TEST_CASE("certified log, exp, sqrt brackets") {
  unsigned bits = 80;
  RatIv l2 = log_iv(Rat(2), bits);
  CHECK((l2.lo > Rat(693147, 1000000)));
  CHECK((l2.hi < Rat(693148, 1000000)));
  RatIv e1 = exp_iv(Rat(1), bits);
  CHECK((e1.lo > Rat(2718281, 1000000)));
  CHECK((e1.hi < Rat(2718282, 1000000)));
  RatIv s2 = sqrt_iv(Rat(2), bits);
  RatIv sq = iv_mul(s2, s2);
  CHECK(sq.contains(Rat(2)));
  CHECK((sq.width() < Rat(1, pow2(40))));
  CHECK_THROWS_AS(log_iv(Rat(0), bits), ConfigError);
  CHECK_THROWS_AS(sqrt_iv(Rat(-1), bits), ConfigError);
  // round trip: exp at the midpoint of log(10) stays very close to 10
  RatIv rt = exp_iv(log_iv(Rat(10), bits).mid(), bits);
  CHECK((rt.lo > Rat(99, 10)));
  CHECK((rt.hi < Rat(101, 10)));
}

TEST_CASE("pi bracket tightens with precision") {
  RatIv lo_bits = pi_iv(32), hi_bits = pi_iv(128);
  CHECK((hi_bits.width() < lo_bits.width()));
  CHECK((lo_bits.lo > Rat(314159, 100000)));
  CHECK((lo_bits.hi < Rat(314160, 100000)));
  CHECK((hi_bits.lo > lo_bits.lo - lo_bits.width()));
}

TEST_CASE("decimal rendering rounds to nearest") {
  CHECK(decimal_string(Rat(1, 3), 6) == "0.333333");
  CHECK(decimal_string(Rat(2, 3), 6) == "0.666667");
  CHECK(decimal_string(Rat(-7, 2), 1) == "-3.5");
  CHECK(decimal_string(Rat(5), 0) == "5");
  CHECK(decimal_string(Rat(1, 1000), 2) == "0.00");
  CHECK(decimal_string(Rat(999, 1000), 2) == "1.00");
  CHECK(decimal_string(Rat(0), 3) == "0.000");
}

TEST_CASE("fixed-point angles are exact dyadics") {
  FixedAngle a = FixedAngle::from_rat(Rat(3, 8), 10);
  CHECK((a.to_rat() == Rat(3, 8)));
  FixedAngle b = a.times_int_mod1(Int(3));
  CHECK((b.to_rat() == Rat(1, 8)));  // 9/8 mod 1
  CHECK((b.norm_dist() == Rat(1, 8)));
  FixedAngle c = a.add_mod1(b);
  CHECK((c.to_rat() == Rat(1, 2)));
  CHECK((c.norm_dist() == Rat(1, 2)));
  // non-dyadic targets land within one grid step
  FixedAngle g = FixedAngle::from_rat(Rat(1, 3), 20);
  CHECK((rat_abs(g.to_rat() - Rat(1, 3)) <= Rat(1, pow2(20))));
}

TEST_CASE("deterministic rng repeats and respects bounds") {
  DetRng r1(42), r2(42);
  for (int i = 0; i < 50; ++i) CHECK(r1.next() == r2.next());
  DetRng r3(7);
  for (int i = 0; i < 200; ++i) {
    std::uint64_t v = r3.below(10);
    CHECK(v < 10);
  }
  DetRng r4(7);
  Int big = Int("123456789123456789123456789");
  for (int i = 0; i < 20; ++i) {
    Int v = r4.below_big(big);
    CHECK((v >= 0 && v < big));
  }
  CHECK_THROWS_AS(DetRng(1).below(0), ConfigError);
}
