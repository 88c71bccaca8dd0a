#include <doctest.h>

#include <vector>

#include "rigidlab/odometer.hpp"

using namespace rigidlab;

static Odometer mixed() {
  return Odometer({Int(2), Int(3), Int(4)}, ListExtend::repeat_last);
}

TEST_CASE("digit sizes and level counts") {
  Odometer o = mixed();
  CHECK((o.radix(0) == 2));
  CHECK((o.radix(2) == 4));
  CHECK((o.radix(9) == 4));  // repeat_last
  CHECK((o.level_count(0) == 1));
  CHECK((o.level_count(1) == 2));
  CHECK((o.level_count(2) == 6));
  CHECK((o.level_count(3) == 24));
  CHECK((o.level_count(4) == 96));
  Odometer c({Int(2), Int(3)}, ListExtend::cycle);
  CHECK((c.level_count(4) == 36));
  CHECK((c.radix(2) == 2));
  CHECK_THROWS_AS(Odometer({Int(1)}, ListExtend::cycle).level_count(1),
                  ConfigError);
  IntSequence h = o.heights();
  CHECK((h.term(1) == 2));
  CHECK((h.term(4) == 96));
}

TEST_CASE("adding one carries through the digits") {
  Odometer o = mixed();
  OdometerPoint x;
  x = advance(o, x, Int(1));
  REQUIRE(x.digits.size() >= 1);
  CHECK((x.digits[0] == 1));
  x = advance(o, x, Int(1));  // 2 = carry into digit 1
  CHECK((x.digits[0] == 0));
  CHECK((x.digits[1] == 1));
  OdometerPoint y = advance(o, OdometerPoint{}, Int(23));
  // 23 = 1 + 2*(2 + 3*3): digits 1, 2, 3
  CHECK((y.digits[0] == 1));
  CHECK((y.digits[1] == 2));
  CHECK((y.digits[2] == 3));
  OdometerPoint z = advance(o, y, Int(1));  // 24 rolls over three digits
  CHECK((z.digits[0] == 0));
  CHECK((z.digits[1] == 0));
  CHECK((z.digits[2] == 0));
  CHECK((z.digits[3] == 1));
}

TEST_CASE("trailing zero digits count exact divisibility") {
  Odometer o = mixed();
  CHECK(trailing_zero_digits(o, 1) == 0);
  CHECK(trailing_zero_digits(o, 2) == 1);
  CHECK(trailing_zero_digits(o, 4) == 1);
  CHECK(trailing_zero_digits(o, 6) == 2);
  CHECK(trailing_zero_digits(o, 24) == 3);
  CHECK(trailing_zero_digits(o, 48) == 3);
  CHECK(trailing_zero_digits(o, 96) == 4);
}

TEST_CASE("character exponents read the point modulo a level count") {
  Odometer o = mixed();
  OdometerPoint x = advance(o, OdometerPoint{}, Int(5));
  CHECK((character_exponent(o, 1, x) == Rat(1, 2)));  // 5 mod 2 over 2
  CHECK((character_exponent(o, 2, x) == Rat(5, 6)));
  CHECK((character_exponent(o, 3, x) == Rat(5, 24)));
  CxIv ch = character(o, 2, x, 96);
  CHECK(cx_abs_sq(ch).contains(Rat(1)));
  // e^{2 pi i 5/6} has negative real and imaginary parts... re = cos(300 deg)
  CHECK((ch.re.lo > 0));
  CHECK((ch.im.hi < 0));
}

// direct enumeration oracle: walk all levels of the height-H tower
static Rat cylinder_delta_slow(const Odometer& o, std::uint64_t t0,
                               const Int& r) {
  Int H = o.level_count(t0 + 1);
  // D = level 0; T^r D = level (r mod H); they are equal or disjoint
  Int shifted = mod_floor(r, H);
  if (shifted == 0) return Rat(0);
  return Rat(2, H);
}

TEST_CASE("cylinder shift mass matches the level enumeration") {
  Odometer o = mixed();
  for (std::uint64_t t0 : {0, 1, 2}) {
    for (long r : {1L, 2L, 3L, 6L, 12L, 24L, 47L, 48L, 96L, 100L}) {
      CHECK_MESSAGE((cylinder_delta(o, t0, Int(r)) ==
                     cylinder_delta_slow(o, t0, Int(r))),
                    "t0=" << t0 << " r=" << r);
    }
  }
  CHECK((cylinder_delta(o, 1, Int(6)) == 0));
  CHECK((cylinder_delta(o, 1, Int(3)) == Rat(2, 6)));
  CHECK((cylinder_delta(o, 0, Int(0)) == 0));  // identity moves nothing
}

TEST_CASE("level set algebra is exact") {
  LevelSet a = make_level_set(10, {Int(1), Int(3), Int(5)});
  CHECK((a.mass() == Rat(3, 10)));
  CHECK(a.contains(3));
  CHECK(!a.contains(2));
  LevelSet b = level_shift(a, 7);  // 8, 0, 2
  CHECK(b.contains(0));
  CHECK(b.contains(2));
  CHECK(b.contains(8));
  LevelSet u = level_union(a, b);
  CHECK((u.mass() == Rat(6, 10)));
  LevelSet i = level_intersect(a, b);
  CHECK((i.mass() == 0));
  LevelSet d = level_minus(u, a);
  CHECK((d.mass() == Rat(3, 10)));
  LevelSet s = level_symdiff(a, b);
  CHECK((s.mass() == Rat(6, 10)));
  CHECK((level_delta_mass(a, 2) == Rat(2, 10)));  // {3,5,7} vs {1,3,5}
  CHECK((level_delta_mass(a, 10) == 0));
  CHECK_THROWS_AS(make_level_set(5, {Int(5)}), ConfigError);
  CHECK((make_level_set(5, {Int(2), Int(2)}).mass() == Rat(1, 5)));  // dedup
}

TEST_CASE("good cocycle selection doubles the level counts") {
  Odometer o = mixed();
  OdometerCocycle c = OdometerCocycle::good_function(o, 10);
  CHECK(c.terms() == 10);
  for (std::uint64_t k = 1; k < 10; ++k) {
    Int now = o.level_count(c.position(k));
    Int next = o.level_count(c.position(k + 1));
    CHECK((next >= 2 * now));
  }
  for (std::uint64_t k = 1; k <= 10; ++k) {
    CHECK((c.n_amp_sq(k) == Rat(1, Int(k))));
    Int n = o.level_count(c.position(k));
    CHECK((c.amp_sq(k) == Rat(1, Int(k) * n * n)));
  }
}

TEST_CASE("coboundary partial sums are harmonic numbers") {
  Odometer o = mixed();
  OdometerCocycle c = OdometerCocycle::good_function(o, 2000);
  CoboundarySums s = coboundary_test(c, {1, 10, 100, 1000});
  REQUIRE(s.partials.size() == 4);
  Rat h = 0;
  std::uint64_t at = 0;
  std::size_t row = 0;
  for (std::uint64_t K : {1, 10, 100, 1000}) {
    while (at < K) h += Rat(1, Int(++at));
    CHECK((s.partials[row].first == K));
    CHECK((s.partials[row].second == h));
    ++row;
  }
  CHECK((s.last == h));
  CHECK(s.diverging);
}

TEST_CASE("ergodic sums cancel over full character cycles") {
  Odometer o = mixed();
  OdometerCocycle c = OdometerCocycle::good_function(o, 3);
  Int n3 = o.level_count(c.position(3));
  CocycleSumReport r = cocycle_sum(c, n3, OdometerPoint{}, 128);
  REQUIRE(r.terms.size() == 3);
  for (const CocycleSumTerm& t : r.terms) {
    CHECK((t.residual == mod_floor(n3, t.n_m)));
    CHECK((t.residual == 0));  // earlier level counts divide later ones
    CHECK((t.start_exponent == 0));
  }
  CHECK(r.value.re.contains(Rat(0)));
  CHECK(r.value.im.contains(Rat(0)));
  CHECK((r.value.re.width() < Rat(1, 1000000)));
  // a partial cycle leaves a nonzero bracket for the first component
  CocycleSumReport p = cocycle_sum(c, 1, OdometerPoint{}, 128);
  CHECK((p.terms[0].residual == 1));
}

TEST_CASE("tail norm brackets stay under the crude amplitude bound") {
  Odometer o = mixed();
  OdometerCocycle c = OdometerCocycle::good_function(o, 40);
  for (std::uint64_t m0 : {1, 3, 7, 12}) {
    CocycleNormReport r = cocycle_norm_bound(c, m0, 128);
    CHECK((r.n_m0 == o.level_count(r.m0)));
    CHECK(r.within_crude);
    CHECK((r.norm_sq.hi <= r.crude_upper));
    CHECK((r.norm_sq.lo >= 0));
    CHECK(r.terms_used >= 1);
  }
}
