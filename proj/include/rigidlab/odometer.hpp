#pragma once
#include "rigidlab/numeric.hpp"
#include "rigidlab/sequences.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace rigidlab {

// Adding machine with digit t running over {0, ..., rho_t - 1}; the map adds
// one to digit 0 with carry.  n_t below is the size of the first t digit
// positions, n_0 = 1, n_t = rho_0 * ... * rho_{t-1}.
class Odometer {
 public:
  Odometer(std::vector<Int> radixes, ListExtend extend);

  Int radix(std::uint64_t t) const;       // rho_t, t >= 0
  Int level_count(std::uint64_t t) const; // n_t, memoized
  IntSequence heights() const;            // n_1, n_2, ... as a sequence
  std::string describe() const;

 private:
  struct Core;
  std::shared_ptr<Core> core_;
};

// A point stored as a finite digit prefix; digits beyond the prefix are 0.
struct OdometerPoint {
  std::vector<Int> digits;
  std::string describe() const;
};

// T^r x for r >= 0, digitwise add with carry; the prefix grows as needed.
OdometerPoint advance(const Odometer& odo, OdometerPoint x, Int r);

// Number of trailing zero digits of r in the mixed-radix expansion: the
// largest t with n_t | r.  (r >= 1.)
std::uint64_t trailing_zero_digits(const Odometer& odo, const Int& r);

// x mod n_m as an exact fraction of a full turn: the eigenvalue exponent of
// the canonical character at level m evaluated at x.
Rat character_exponent(const Odometer& odo, std::uint64_t m,
                       const OdometerPoint& x);
// e^{2 pi i * character_exponent}
CxIv character(const Odometer& odo, std::uint64_t m, const OdometerPoint& x,
               unsigned bits);

// Measure of (T^r D) symmetric-difference D, where D is the bottom level of
// the height-n_{t0+1} tower (the cylinder fixing digits 0..t0 to zero).
// The shift acts on the tower's levels as an exact cyclic rotation, so the
// answer is exact: 0 when n_{t0+1} divides r, else 2 / n_{t0+1}.
Rat cylinder_delta(const Odometer& odo, std::uint64_t t0, const Int& r);

// A union of levels of the height-H tower, i.e. residue classes mod H.
struct LevelSet {
  Int H;
  std::vector<Int> levels;  // sorted, distinct, in [0, H)

  Rat mass() const;
  bool contains(const Int& lev) const;
  std::string describe() const;
};
LevelSet make_level_set(const Int& H, std::vector<Int> levels);
LevelSet level_shift(const LevelSet& s, const Int& r);   // levels + r mod H
LevelSet level_union(const LevelSet& a, const LevelSet& b);
LevelSet level_minus(const LevelSet& a, const LevelSet& b);
LevelSet level_intersect(const LevelSet& a, const LevelSet& b);
LevelSet level_symdiff(const LevelSet& a, const LevelSet& b);
// p((s + r) symmetric-difference s), exact
Rat level_delta_mass(const LevelSet& s, const Int& r);

// ---- cocycles over the odometer ------------------------------------------------

// A real cocycle built from eigenfunction components: f = sum_k a_k f_k with
// f_k the canonical character at digit position m_k.  The selection m_1 <
// m_2 < ... is greedy so that n_{m_{k+1}} >= 2 n_{m_k}, and amplitudes obey
// |n_{m_k} a_{m_k}|^2 = 1/k.  Amplitude values are kept as exact squares;
// the k-th amplitude itself is sqrt(1/(k n_{m_k}^2)) and only ever used
// through certified brackets.
class OdometerCocycle {
 public:
  static OdometerCocycle good_function(const Odometer& odo,
                                       std::uint64_t terms);

  std::uint64_t terms() const;
  std::uint64_t position(std::uint64_t k) const;  // m_k, 1-based k
  Rat n_amp_sq(std::uint64_t k) const;            // |n_{m_k} a_{m_k}|^2 = 1/k
  Rat amp_sq(std::uint64_t k) const;              // |a_{m_k}|^2 (exact)
  const Odometer& base() const;

 private:
  struct Core;
  explicit OdometerCocycle(std::shared_ptr<Core> core);
  std::shared_ptr<Core> core_;
};

// Partial sums sum_{k<=K} |n_{m_k} a_{m_k}|^2; their divergence is what
// keeps the cocycle from being a measurable coboundary.
struct CoboundarySums {
  std::vector<std::pair<std::uint64_t, Rat>> partials;  // (K, H_K) samples
  Rat last;       // value at the largest K
  bool diverging; // last partial exceeds any fixed bound seen so far
};
CoboundarySums coboundary_test(const OdometerCocycle& c,
                               const std::vector<std::uint64_t>& sample_Ks);

// Birkhoff sum f^(n)(x) = sum_{i<n} f(T^i x).  Full character cycles cancel
// exactly, so each component contributes a closed-form geometric sum; the
// report carries the exact exponent data plus a certified complex bracket.
struct CocycleSumTerm {
  std::uint64_t k = 0;
  std::uint64_t m = 0;   // digit position m_k
  Int n_m;               // n_{m_k}
  Int residual;          // n mod n_{m_k}: number of surviving summands
  Rat start_exponent;    // x mod n_{m_k} as a fraction of a turn
};
struct CocycleSumReport {
  std::vector<CocycleSumTerm> terms;
  CxIv value;        // certified bracket of f^(n)(x)
};
CocycleSumReport cocycle_sum(const OdometerCocycle& c, const Int& n,
                             const OdometerPoint& x, unsigned bits);

// Certified bracket of ||f^(n_{m0})||_2^2 restricted to components past m0,
// each term |a_k|^2 sin^2(pi n_{m0}/n_{m_k}) / sin^2(pi/n_{m_k}), together
// with the exact comparison term n_{m0}^2 sum |a_k|^2.
struct CocycleNormReport {
  std::uint64_t m0 = 0;
  Int n_m0;
  RatIv norm_sq;            // sum over k with m_k > m0, truncated
  Rat crude_upper;          // n_{m0}^2 * sum of |a_k|^2 over the same range
  std::uint64_t terms_used = 0;
  bool within_crude = false; // norm_sq.hi <= crude_upper
};
CocycleNormReport cocycle_norm_bound(const OdometerCocycle& c,
                                     std::uint64_t m0, unsigned bits);

}  // namespace rigidlab
