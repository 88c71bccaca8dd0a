#pragma once
#include "rigidlab/numeric.hpp"
#include "rigidlab/sequences.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace rigidlab {

// An irrational rotation angle alpha in (0,1) given by its continued
// fraction [0; a_1, a_2, ...].  All queries about alpha route through
// convergents p_k/q_k, so every comparison the class reports is certified
// by exact integer arithmetic: alpha always lies strictly between
// consecutive convergents.
class ContinuedFraction {
 public:
  struct Convergent {
    Int p, q;
  };

  ContinuedFraction(std::vector<Int> quotients, ListExtend extend);
  static ContinuedFraction golden();  // [0;1,1,1,...]

  Int quotient(std::uint64_t k) const;  // a_k, k >= 1
  Convergent convergent(std::uint64_t k) const;  // k >= 0; p_0/q_0 = 0/1

  // smallest index k with q_k > bound
  std::uint64_t index_with_q_above(const Int& bound) const;

  // alpha bracketed between two consecutive convergents whose denominators
  // exceed q_bound; .first < alpha < .second
  std::pair<Rat, Rat> bracket(const Int& q_bound) const;

  // ||n * alpha|| as a certified interval (width below 2^-64 of 1/n-ish)
  RatIv norm_mult(const Int& n) const;

  // certified strict comparison ||n*alpha|| < thresh (or >); retries at
  // higher convergent indices until the interval separates from thresh
  bool norm_lt(const Int& n, const Rat& thresh) const;

  // q * ||q*alpha|| interval for the k-th convergent denominator
  RatIv q_norm_q(std::uint64_t k) const;

  IntSequence denominators() const;  // q_1, q_2, ... as a sequence

  std::string describe() const;

 private:
  struct Core;
  std::shared_ptr<Core> core_;
};

// #{1 <= n <= M : ||n*alpha|| <= delta}, computed exactly via floor sums
// against a convergent p/q with q large enough that rounding can only
// matter at exact rational ties, which are resolved by the known side of
// alpha relative to p/q.  delta must lie in (0, 1/2).
Int count_close(const ContinuedFraction& cf, const Int& M, const Rat& delta);

// How far apart returns to a neighborhood can be: the smallest N such that
// every window of N consecutive integers observed contains some n with
// ||n*alpha|| < eps/2.  Exact scan of one full cycle q_k + q_{k+1} driven
// by a much deeper convergent, then re-verified over 10*N further windows.
struct SyndeticBound {
  Int N;                    // max observed gap (the syndeticity constant)
  std::uint64_t conv_index; // k with ||q_k alpha|| < eps/4
  Int cycle;                // scanned cycle length
  Int hits;                 // hits inside the cycle
  bool reverified = false;
};
SyndeticBound syndeticity_constant(const ContinuedFraction& cf, const Rat& eps,
                                   const Int& scan_budget = Int(1) << 24);

// Target upper-density schedules d_N used by the slow-growth construction.
class DensityRule {
 public:
  enum class Kind { inv_log, inv_sqrt };
  static DensityRule inv_log();   // d_N = 1 / ln(N + 2)
  static DensityRule inv_sqrt();  // d_N = 1 / sqrt(N + 1)

  Kind kind() const { return kind_; }
  // certified N such that d_M <= t for every M >= N
  Int threshold_index(const Rat& t) const;
  // certified bracket of d_N
  RatIv at(const Int& N, unsigned bits) const;
  std::string describe() const;

 private:
  explicit DensityRule(Kind k) : kind_(k) {}
  Kind kind_;
};

// Builds a sequence rigid for the rotation by alpha whose counting density
// still beats d_N at checkpoints M_1 < M_2 < ...: stage k admits every n in
// (M_{k-1}, M_k] with ||n*alpha|| <= 2^-k.  M_k is pushed past the point
// where d is below 4^-k, then grown until the stage-k hit count alone keeps
// the density above d.  Counting is exact (floor sums), so each recorded
// checkpoint inequality is a theorem about this alpha, not an estimate.
struct SlowCheckpoint {
  std::uint64_t k = 0;
  Int threshold_N;   // index from which d_N <= 4^-k
  Int M;             // checkpoint horizon
  Int count;         // #(sequence members <= M), exact
  Rat density;       // count / M
  Rat d_upper;       // certified upper bound on d_M
  bool beats_target = false;  // density > d_upper
};
struct SlowRigidityResult {
  std::vector<SlowCheckpoint> checkpoints;
  IntSequence members;  // lazy enumeration of the constructed sequence
};
SlowRigidityResult slow_rigidity_sequence(const ContinuedFraction& cf,
                                          const DensityRule& rule,
                                          unsigned stages);

// Growth ceilings psi(m) used by the bounded-growth construction.
class GrowthRule {
 public:
  enum class Kind { m_log2m, m_squared, linear_slope };
  static GrowthRule m_log2m();     // psi(m) = m * ceil(log2(m+1))
  static GrowthRule m_squared();   // psi(m) = m^2
  static GrowthRule linear(Int slope);  // psi(m) = slope * m

  Int at(const Int& m) const;
  // least m with at(m) >= target
  Int first_at_least(const Int& target) const;
  std::string describe() const;

 private:
  GrowthRule(Kind k, Int s) : kind_(k), slope_(std::move(s)) {}
  Kind kind_;
  Int slope_;
};

// Builds a rotation-rigid sequence n_1 < n_2 < ... with n_m <= C * psi(m)
// for an explicit constant C, provided psi grows enough for the syndetic
// return times of alpha.  Phase L picks one hit per length-N_L block with
// ||n*alpha|| < 2^-(L+1), and runs for K_L terms, where K_L is the first
// index at which psi clears the next phase's block length.
struct BoundedGrowthPhase {
  unsigned L = 0;
  Int N;        // block length (syndeticity constant for eps = 2^-L)
  Int K;        // number of terms the phase contributes
  Int start;    // blocks begin after this offset
};
struct BoundedGrowthResult {
  Int C;  // the growth constant (= N_1)
  std::vector<BoundedGrowthPhase> phases;
  IntSequence members;
  // exact check n_m <= C * psi(m) for m = 1..count
  bool verify_prefix(const GrowthRule& rule, std::uint64_t count) const;
};
BoundedGrowthResult bounded_growth_rigidity_sequence(
    const ContinuedFraction& cf, const GrowthRule& rule, unsigned phases);

// Certified partial sums of ||n_m * alpha|| over a sequence.
RatIv norm_sum_along(const ContinuedFraction& cf, const IntSequence& seq,
                     std::uint64_t horizon);

}  // namespace rigidlab
