#include <doctest.h>

#include <vector>

#include "rigidlab/rankone.hpp"

using namespace rigidlab;

TEST_CASE("three-column heights follow the closed form") {
  RankOneSpec c = RankOneSpec::chacon();
  for (std::uint64_t m = 1; m <= 10; ++m)
    CHECK((c.height(m) == (ipow(3, static_cast<unsigned>(m)) - 1) / 2));
  RankOneStage st = c.stage(2);
  CHECK(st.q == 3);
  REQUIRE(st.spacers.size() == 4);
  CHECK((st.spacers[0] == 0));
  CHECK((st.spacers[2] == 1));  // the single middle spacer
  CHECK(!c.has_preset_rows());
}

TEST_CASE("tower bookkeeping tracks widths and masses exactly") {
  TowerState t = build_tower(RankOneSpec::chacon(), 4);
  CHECK(t.stages == 4);
  CHECK((t.h == 40));
  CHECK((t.level_width == Rat(1, 27)));
  // mass grows by one extra level width per stage
  CHECK((t.total_mass == Rat(40, 27)));
  REQUIRE(t.info.size() == 4);
  CHECK((t.info[0].h == 1));
  CHECK((t.info[0].total_mass == 1));
  CHECK((t.info[1].h == 4));
  CHECK((t.info[1].level_width == Rat(1, 3)));
  CHECK((t.info[1].total_mass == Rat(4, 3)));
  CHECK((t.info[1].spacer_mass_added == Rat(1, 3)));
  CHECK((t.info[3].spacer_fraction == Rat(1, 40)));  // (1/27) / (40/27)
}

TEST_CASE("explicit stages accept custom spacer layouts") {
  // cut in two, one spacer between the columns: heights 2, 5, 11, ...
  std::vector<RankOneStage> st;
  for (int i = 0; i < 3; ++i)
    st.push_back(RankOneStage{2, {Int(0), Int(1), Int(0)}});
  RankOneSpec s = RankOneSpec::from_stages(2, std::move(st));
  CHECK((s.height(1) == 2));
  CHECK((s.height(2) == 5));
  CHECK((s.height(3) == 11));
  CHECK_THROWS_AS(s.stage(4), ResourceError);  // past the listed stages
  // the two starting levels split the unit mass, so widths begin at 1/2
  TowerState t = build_tower(s, 3);
  CHECK((t.level_width == Rat(1, 8)));
  CHECK((t.total_mass == Rat(11, 8)));
  CHECK((t.h == 11));
}

TEST_CASE("height-forced infinite preset caps the spacer shift") {
  // heights (m+1)!: 2, 6, 24, 120, 720, 5040, 40320
  IntSequence fact = IntSequence::explicit_terms(
      {Int(2), Int(6), Int(24), Int(120), Int(720), Int(5040), Int(40320)});
  RankOneSpec s = RankOneSpec::infinite_from_heights(fact);
  REQUIRE(s.has_preset_rows());
  for (std::uint64_t m = 1; m <= 6; ++m)
    CHECK((s.height(m) == fact.term(m)));
  struct Row { std::uint64_t m; long q, r, p, sres; };
  // worked by hand from the construction rule: q = next/h, r = 0 here,
  // p = least l with l*h/next > 1/m capped to q - 1, s = q - p
  std::vector<Row> want = {{1, 3, 0, 2, 1},
                           {2, 4, 0, 3, 1},
                           {3, 5, 0, 2, 3},
                           {4, 6, 0, 2, 4},
                           {5, 7, 0, 2, 5}};
  for (const Row& w : want) {
    RankOneSpec::PresetRow r = s.preset_row(w.m);
    CHECK((r.q == w.q));
    CHECK((r.r == w.r));
    CHECK((r.p == w.p));
    CHECK((r.s == w.sres));
  }
  // stage layout: s content columns survive, the p columns' worth of levels
  // plus the division remainder ride on top as one spacer block
  RankOneStage st3 = s.stage(3);
  CHECK(st3.q == 3);
  REQUIRE(st3.spacers.size() == 4);
  CHECK((st3.spacers[3] == 2 * 24));  // r + p * h_3 on top
  Int total = 0;
  for (const Int& v : st3.spacers) total += v;
  CHECK((Int(st3.q) * s.height(3) + total == s.height(4)));
}

TEST_CASE("height-forced finite preset spreads remainders") {
  // heights 2, 5, 11: q = floor(5/2) = 2, r = 1
  IntSequence h = IntSequence::explicit_terms({Int(2), Int(5), Int(11)});
  RankOneSpec s = RankOneSpec::finite_from_heights(h);
  CHECK(s.has_preset_rows());
  RankOneSpec::PresetRow r1 = s.preset_row(1);
  CHECK((r1.q == 2));
  CHECK((r1.r == 1));
  RankOneStage st = s.stage(1);
  Int total = 0;
  for (const Int& v : st.spacers) total += v;
  CHECK((Int(st.q) * 2 + total == 5));
}

TEST_CASE("non-integer height ratios are rejected") {
  IntSequence h = IntSequence::explicit_terms({Int(2), Int(7)});
  RankOneSpec s = RankOneSpec::infinite_from_heights(h);
  // 7 = 3*2 + 1 leaves a remainder; the infinite preset folds it into the
  // spacer block, so the stage still closes up exactly
  RankOneStage st = s.stage(1);
  Int total = 0;
  for (const Int& v : st.spacers) total += v;
  CHECK((Int(st.q) * 2 + total == 7));
}

// ---- symbolic words --------------------------------------------------------

TEST_CASE("substitution words grow by the three-copies-plus-spacer rule") {
  CHECK_THROWS_AS(chacon_word(0), ConfigError);
  for (std::uint64_t k = 1; k <= 8; ++k) {
    ChaconWord w = chacon_word(k);
    CHECK((w.length() == (ipow(3, static_cast<unsigned>(k) + 1) - 1) / 2));
    CHECK((w.ones() == (ipow(3, static_cast<unsigned>(k)) - 1) / 2));
    CHECK((w.markers() == ipow(3, static_cast<unsigned>(k) - 1)));
    // markers sit on spacer positions
    for (std::size_t i = 0; i < w.symbol.size(); ++i)
      if (w.marker[i]) CHECK(w.symbol[i]);
  }
  // the recursion pastes two copies, a spacer, then a third copy
  ChaconWord w2 = chacon_word(2), w1 = chacon_word(1);
  std::size_t L = static_cast<std::size_t>(w1.symbol.size());
  for (std::size_t i = 0; i < L; ++i) {
    CHECK(w2.symbol[i] == w1.symbol[i]);
    CHECK(w2.symbol[L + i] == w1.symbol[i]);
    CHECK(w2.symbol[2 * L + 1 + i] == w1.symbol[i]);
  }
  CHECK(w2.symbol[2 * L]);
  CHECK_THROWS_AS(chacon_word(17), ConfigError);
}

TEST_CASE("marker sets avoid their own shift by height minus one") {
  for (std::uint64_t k = 2; k <= 6; ++k)
    for (std::uint64_t m = 1; m < k; ++m) {
      ChaconShiftCheck c = chacon_marker_shift(k, m, 0);
      CHECK_MESSAGE(c.disjoint, "k=" << k << " m=" << m);
      CHECK((c.overlap == 0));
      CHECK((c.shift == (ipow(3, static_cast<unsigned>(m) + 1) - 1) / 2 - 1));
    }
  // shifting by the full height (offset +1) does hit the markers
  ChaconShiftCheck bad = chacon_marker_shift(3, 1, 1);
  CHECK(!bad.disjoint);
  CHECK((bad.overlap > 0));
}

// ---- measure of shifted level sets -----------------------------------------

TEST_CASE("shift masses refine to an exact answer on spacer-free stacks") {
  // pure doubling with no spacers is the dyadic adding machine in disguise:
  // a level of tower m is a residue class mod 2^{m-1}, and T^n only moves it
  // when 2^{m-1} does not divide n
  std::vector<RankOneStage> st;
  for (int i = 0; i < 30; ++i)
    st.push_back(RankOneStage{2, {Int(0), Int(0), Int(0)}});
  RankOneSpec s = RankOneSpec::from_stages(1, std::move(st));
  for (std::uint64_t m : {2, 3, 4}) {
    Int hm = s.height(m);
    for (long n : {1L, 2L, 3L, 4L, 8L, 12L}) {
      DeltaMassBracket b =
          delta_mass(s, m, {Int(0)}, Int(n), Rat(1, 100000));
      Rat expect = (mod_floor(Int(n), hm) == 0) ? Rat(0) : Rat(1, hm);
      CHECK_MESSAGE(b.one_sided.contains(expect), "m=" << m << " n=" << n);
      CHECK((b.one_sided.width() <= Rat(1, 100000)));
      CHECK((b.set_mass == Rat(1, hm)));
      // the symmetric bracket is exactly twice the one-sided bracket
      CHECK((b.symmetric.lo == 2 * b.one_sided.lo));
      CHECK((b.symmetric.hi == 2 * b.one_sided.hi));
    }
  }
}

TEST_CASE("three-column returns at the tower height are partial") {
  RankOneSpec c = RankOneSpec::chacon();
  Int h3 = c.height(3);  // 13
  DeltaMassBracket b = delta_mass(c, 3, {Int(0)}, h3, Rat(1, 100000));
  CHECK((b.set_mass == Rat(1, 9)));
  // half the level returns into itself at the height, half escapes
  CHECK((b.one_sided.hi < Rat(3, 5) * b.set_mass));
  CHECK((b.one_sided.lo > Rat(2, 5) * b.set_mass));
  CHECK((b.symmetric.lo == 2 * b.one_sided.lo));
  CHECK((b.symmetric.hi == 2 * b.one_sided.hi));
  // a generic shift moves the whole level off itself
  DeltaMassBracket g = delta_mass(c, 3, {Int(0)}, Int(7), Rat(1, 100000));
  CHECK(g.one_sided.contains(b.set_mass));
  CHECK((g.one_sided.hi > b.one_sided.hi));
}

TEST_CASE("level unions accumulate mass linearly") {
  RankOneSpec c = RankOneSpec::chacon();
  DeltaMassBracket one = delta_mass(c, 3, {Int(0)}, Int(5), Rat(1, 10000));
  DeltaMassBracket two =
      delta_mass(c, 3, {Int(0), Int(7)}, Int(5), Rat(1, 10000));
  CHECK((two.set_mass == 2 * one.set_mass));
  CHECK_THROWS_AS(delta_mass(c, 3, {Int(13)}, Int(5), Rat(1, 10000)),
                  ConfigError);  // level 13 is outside tower 3
  CHECK_THROWS_AS(delta_mass(c, 3, {Int(0)}, Int(5), Rat(0)), ConfigError);
}

// ---- revised-set construction ----------------------------------------------

TEST_CASE("revision removes bad return times and verifies the rest") {
  Odometer odo({Int(2), Int(3), Int(4)}, ListExtend::repeat_last);
  LevelSet A = make_level_set(24, {Int(0)});
  ReviseResult r = nonrecurrent_set_from_rigidity(odo, A, odo.heights(), 12,
                                                  Rat(1, 100));
  CHECK(r.c_nonempty);
  CHECK((r.c_mass > 0));
  CHECK(r.returns_verified);
  CHECK((r.removed_mass <= Rat(1, 100) * A.mass()));
  CHECK((r.c_mass == r.B.mass() - r.removed_mass));
  CHECK(!r.selected.empty());
  // every selected index really does return C into A and off itself
  for (std::uint64_t idx : r.selected) {
    const ReviseStep& st = r.steps[idx - 1];
    CHECK(st.selected);
    LevelSet moved = level_shift(r.C, mod_floor(st.n - 1, Int(24)));
    CHECK((level_intersect(moved, r.A).mass() == moved.mass()));
    CHECK((level_intersect(moved, r.C).mass() == 0));
  }
  // B = T A sits just above A
  CHECK(r.B.contains(1));
  CHECK((r.B.mass() == A.mass()));
}

TEST_CASE("revision rejects a base set that meets its own shift") {
  Odometer odo({Int(2), Int(3), Int(4)}, ListExtend::repeat_last);
  LevelSet bad = make_level_set(24, {Int(0), Int(1)});
  CHECK_THROWS_AS(
      nonrecurrent_set_from_rigidity(odo, bad, odo.heights(), 8, Rat(1, 100)),
      ConfigError);
}
