#include <doctest.h>

#include <set>
#include <vector>

#include "rigidlab/sequences.hpp"

using namespace rigidlab;

TEST_CASE("power sequences enumerate a^m from m = 1") {
  IntSequence s = IntSequence::powers(2);
  CHECK((s.term(1) == 2));
  CHECK((s.term(10) == 1024));
  CHECK((s.term(64) == ipow(2, 64)));
  std::vector<Int> t = s.terms(3, 6);
  REQUIRE(t.size() == 4);
  CHECK((t[0] == 8 && t[3] == 64));
  CHECK_THROWS_AS(IntSequence::powers(1), ConfigError);
  CHECK_THROWS_AS(IntSequence::powers(0), ConfigError);
}

TEST_CASE("ratio products multiply the listed factors, cycling or repeating") {
  IntSequence cyc =
      IntSequence::integer_ratio_product({Int(2), Int(3)}, ListExtend::cycle);
  // terms: 2, 2*3, 2*3*2, 2*3*2*3, ...
  CHECK((cyc.term(1) == 2));
  CHECK((cyc.term(2) == 6));
  CHECK((cyc.term(3) == 12));
  CHECK((cyc.term(4) == 36));
  IntSequence rep = IntSequence::integer_ratio_product(
      {Int(2), Int(3)}, ListExtend::repeat_last);
  CHECK((rep.term(3) == 18));
  CHECK((rep.term(4) == 54));
  CHECK_THROWS_AS(
      IntSequence::integer_ratio_product({Int(1)}, ListExtend::cycle).term(2),
      ConfigError);
}

TEST_CASE("polynomial and perturbed-power sequences") {
  IntSequence sq = IntSequence::polynomial({Int(0), Int(0), Int(1)});
  CHECK((sq.term(1) == 1));
  CHECK((sq.term(12) == 144));
  IntSequence p = IntSequence::perturbed_powers(2, {Int(0), Int(1)});
  CHECK((p.term(1) == 3));    // 2 + 1
  CHECK((p.term(5) == 37));   // 32 + 5
  IntSequence pc = IntSequence::perturbed_powers(2, {Int(1)});
  CHECK((pc.term(6) == 65));  // 64 + 1
  // a decreasing polynomial is rejected when the violation is generated
  IntSequence bad = IntSequence::polynomial({Int(100), Int(-3)});
  CHECK_THROWS(bad.term(2));
}

TEST_CASE("continued fraction denominators, including the golden duplicate") {
  IntSequence g = IntSequence::continued_fraction_denominators(
      {Int(1)}, ListExtend::repeat_last);
  std::vector<Int> fib = g.terms(1, 10);
  CHECK((fib[0] == 1));
  CHECK((fib[1] == 1));  // the one tolerated non-increase
  CHECK((fib[2] == 2));
  CHECK((fib[9] == 55));
  IntSequence two = IntSequence::continued_fraction_denominators(
      {Int(2)}, ListExtend::repeat_last);
  // q: 1, 2, 5, 12, 29 (Pell numbers)
  CHECK((two.term(2) == 2));
  CHECK((two.term(5) == 29));
}

TEST_CASE("three-column tower height offsets") {
  IntSequence c = IntSequence::chacon_heights_minus_one();
  // heights 4, 13, 40, ... minus one
  CHECK((c.term(1) == 3));
  CHECK((c.term(2) == 12));
  CHECK((c.term(9) == (ipow(3, 10) - 1) / 2 - 1));
}

TEST_CASE("explicit lists enforce strict growth") {
  IntSequence e = IntSequence::explicit_terms({Int(4), Int(9), Int(100)});
  CHECK((e.term(3) == 100));
  CHECK_THROWS_AS(e.term(4), ResourceError);  // past the list
  // violations surface when the offending term is generated
  CHECK_THROWS_AS(IntSequence::explicit_terms({Int(3), Int(3)}).term(2),
                  ConfigError);
  CHECK_THROWS_AS(IntSequence::explicit_terms({Int(0)}).term(1), ConfigError);
}

TEST_CASE("shifted and merged sequences stay sorted and deduplicated") {
  IntSequence s = IntSequence::shifted(IntSequence::powers(2), 1);
  CHECK((s.term(1) == 3));
  CHECK((s.term(4) == 17));
  IntSequence u = IntSequence::union_of(
      {IntSequence::powers(2), IntSequence::shifted(IntSequence::powers(2), 1)});
  // 2, 3, 4, 5, 8, 9, 16, 17, ...
  std::vector<Int> t = u.terms(1, 8);
  std::vector<Int> want = {Int(2), Int(3), Int(4), Int(5),
                           Int(8), Int(9), Int(16), Int(17)};
  CHECK((t == want));
  // overlap collapses: powers(4) is a subset of powers(2)
  IntSequence v =
      IntSequence::union_of({IntSequence::powers(2), IntSequence::powers(4)});
  CHECK((v.term(1) == 2));
  CHECK((v.term(2) == 4));
  CHECK((v.term(3) == 8));
}

TEST_CASE("linear recurrences run from their seed") {
  IntSequence f =
      IntSequence::linear_recurrence({Int(1), Int(1)}, {Int(1), Int(2)});
  CHECK((f.term(1) == 1));
  CHECK((f.term(2) == 2));
  CHECK((f.term(10) == 89));
  CHECK_THROWS_AS(IntSequence::linear_recurrence({Int(1), Int(1)}, {Int(1)}),
                  ConfigError);  // fewer seeds than the order
}

TEST_CASE("an unset sequence object refuses to run") {
  IntSequence s;
  CHECK_THROWS_AS(s.term(1), InternalError);
  CHECK_THROWS_AS(s.count_up_to(10), InternalError);
  CHECK(s.describe() == "(unset)");  // safe to print in error paths
}

TEST_CASE("counting and density are exact") {
  IntSequence p = IntSequence::powers(2);
  CHECK((p.count_up_to(1000) == 9));
  CHECK((p.count_up_to(1024) == 10));
  CHECK((p.count_up_to(1) == 0));
  CHECK((p.density(1024) == Rat(10, 1024)));
  IntSequence sq = IntSequence::polynomial({Int(0), Int(0), Int(1)});
  CHECK((sq.count_up_to(10000) == 100));
}

// oracle: direct bitmask subset-sum enumeration
static std::set<Int> subset_sums_slow(const std::vector<Int>& v) {
  std::set<Int> out;
  for (unsigned mask = 1; mask < (1u << v.size()); ++mask) {
    Int s = 0;
    for (unsigned i = 0; i < v.size(); ++i)
      if (mask & (1u << i)) s += v[i];
    out.insert(s);
  }
  return out;
}

TEST_CASE("finite subset sums match direct enumeration") {
  IntSequence sq = IntSequence::polynomial({Int(0), Int(0), Int(1)});
  std::vector<Int> window = sq.terms(3, 8);
  std::set<Int> want = subset_sums_slow(window);
  std::vector<Int> got = sq.finite_sums(3, 8);
  CHECK(got.size() == want.size());
  CHECK((std::set<Int>(got.begin(), got.end()) == want));
  // sortedness
  for (std::size_t i = 1; i < got.size(); ++i) CHECK((got[i - 1] < got[i]));
}

TEST_CASE("subset sums of powers of two tile an interval exactly") {
  IntSequence p = IntSequence::powers(2);
  for (std::uint64_t m : {1, 3, 8})
    for (std::uint64_t j : {0, 2, 10}) {
      std::vector<Int> got = p.finite_sums(m, m + j);
      Int top = pow2(static_cast<unsigned>(j) + 1) - 1;
      REQUIRE((Int(got.size()) == top));
      Int base = ipow(2, static_cast<unsigned>(m));
      for (Int s = 1; s <= top; ++s)
        CHECK((got[static_cast<std::size_t>(s.convert_to<long>()) - 1] ==
               base * s));
    }
  CHECK_THROWS_AS(p.finite_sums(1, 40), ResourceError);
  CHECK_THROWS_AS(p.finite_sums(5, 4), ConfigError);
}

TEST_CASE("growth report sees lacunary ratios and gap growth") {
  IntSequence p = IntSequence::powers(2);
  GrowthReport r = p.growth_report({Int(100), Int(10000)}, 1, 30, Rat(10));
  REQUIRE(r.samples.size() == 2);
  CHECK((r.samples[0].count == 6));     // 2..64
  CHECK((r.samples[1].count == 13));    // 2..8192
  CHECK((r.min_ratio == 2));
  CHECK((r.max_ratio == 2));
  CHECK((r.min_tail_gap == 2));         // 4 - 2
  CHECK(!r.gap_divergence_fails);
  for (const GrowthSample& s : r.samples) CHECK(!s.sidon_violated);
  // a quadratic sequence has density ~ 1/sqrt(N), so it blows past C log N
  IntSequence sq = IntSequence::polynomial({Int(0), Int(0), Int(1)});
  GrowthReport r2 = sq.growth_report({Int(100000)}, 1, 300, Rat(1));
  CHECK(r2.samples[0].sidon_violated);
}

TEST_CASE("descriptions name the construction") {
  CHECK(IntSequence::powers(3).describe().find("3") != std::string::npos);
  CHECK(!IntSequence::chacon_heights_minus_one().describe().empty());
}
