#pragma once
#include "rigidlab/numeric.hpp"
#include "rigidlab/rng.hpp"
#include "rigidlab/sequences.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rigidlab {

// ---- measure families on the circle [0,1) ------------------------------------

// finitely many point masses; masses must sum to 1
struct AtomicMeasure {
  std::vector<std::pair<Rat, Rat>> atoms;  // (position, mass)
};

// Infinite convolution of three-point factors
//   nu_k = (1 - 2 a_k b_k) delta_0 + a_k b_k (delta_{x_k} + delta_{-x_k}),
// a_k = 1 - b_k, so the transform is the real product
//   prod_k (1 - 2 a_k b_k (1 - cos(2 pi n x_k))).
// Positions either follow the geometric rule x_k = ratio^-k (infinitely many
// factors, certified tails) or an explicit finite list.
struct RieszProduct {
  enum class Positions { geometric, listed };
  Positions positions = Positions::geometric;
  Int ratio = 2;             // geometric rule
  std::vector<Rat> xs;       // listed rule
  enum class Weights { harmonic, listed };
  Weights weights = Weights::harmonic;  // b_k = 1/(k+1)
  // listed rule (must cover every factor used); each b in (0, 1/2] so every
  // transform factor stays inside [0, 1]
  std::vector<Rat> bs;

  std::uint64_t factor_count() const;  // 0 = unbounded (geometric)
  Rat x(std::uint64_t k) const;        // k >= 1
  Rat b(std::uint64_t k) const;
  Rat a(std::uint64_t k) const { return 1 - b(k); }
};

// Digits grouped into blocks I_k = [N_k + 1, N_{k+1}]; within block k the
// digit vector is all-zero with probability 1 - eps_k, else uniform over
// the nonzero patterns.  Independent across blocks.  The point is
// x = sum_m digit_m / n_m with n_m the digit-position sizes.
struct BlockDigitMeasure {
  std::vector<Int> radixes;            // digit sizes a_1, a_2, ...
  ListExtend extend = ListExtend::repeat_last;
  enum class BlockLengths { triangular, listed };
  BlockLengths lengths = BlockLengths::triangular;  // |I_k| = k + 1
  // listed rule: strictly increasing; past the end the lengths keep
  // growing by one per block
  std::vector<std::uint64_t> lens;
  enum class EpsRule { harmonic_shift, listed };
  EpsRule eps_rule = EpsRule::harmonic_shift;       // eps_k = 1/(k+2)
  std::vector<Rat> epss;               // listed rule, each in (0, 1/2]

  Int radix(std::uint64_t m) const;          // 1-indexed digit positions
  Int n(std::uint64_t m) const;              // n_0 = 1, n_m = prod radix
  std::uint64_t block_len(std::uint64_t k) const;  // k >= 0
  std::uint64_t N(std::uint64_t k) const;    // first index after k blocks
  Rat eps(std::uint64_t k) const;
  Int pattern_count(std::uint64_t k) const;  // P_k = n(N_{k+1}) / n(N_k)
};

// Nested families of arcs: level 1 places an arc at every multiple of
// 1/n_1; level i+1 keeps, inside each arc, children at offsets o/n_{i+1}
// from the parent center for o in a symmetric progression.  Mass splits
// uniformly among children; within a leaf arc it is uniform (length
// measure).  Built by cantor_support below.
struct CantorArcLevel {
  Int n;          // root denominator at this level
  Int h;          // arc shrink factor: arc width = 1 / (n * h)
  Int first, step;  // symmetric offset progression
  std::uint64_t count = 0;
};
struct CantorArcMeasure {
  std::vector<CantorArcLevel> levels;  // level 1 first
};

using CircleMeasure = std::variant<AtomicMeasure, RieszProduct,
                                   BlockDigitMeasure, CantorArcMeasure>;

std::string describe(const CircleMeasure& mu);

// ---- transforms -----------------------------------------------------------------

// Certified value of the transform integral e^{-2 pi i n x} d mu(x).  For
// the unbounded families the truncation is chosen internally so the tail
// enclosure is dominated by the requested bits (override with trunc).
struct FourierValue {
  CxIv value;
  std::uint64_t truncated_at = 0;  // factors/blocks evaluated
};
FourierValue fourier(const CircleMeasure& mu, const Int& n, unsigned bits,
                     std::uint64_t trunc = 0);

// 1 - transform along a sequence; for the real-valued families the rows
// also carry the real gap 1 - Re.
struct GapRow {
  std::uint64_t m = 0;
  Int n;
  CxIv value;
  RatIv gap_re;     // 1 - Re(value)
  RatIv abs_gap_sq; // |1 - value|^2
};
std::vector<GapRow> rigidity_gap_profile(const CircleMeasure& mu,
                                         const IntSequence& seq,
                                         std::uint64_t m_lo, std::uint64_t m_hi,
                                         unsigned bits, std::uint64_t trunc = 0);

// Upper bound on the largest point mass after K factors: three times the
// product of the leading factor weights; exact and decreasing in K.
struct AtomBoundRow {
  std::uint64_t K = 0;
  Rat bound;
};
std::vector<AtomBoundRow> atom_mass_bounds(const RieszProduct& mu,
                                           const std::vector<std::uint64_t>& Ks);

// Mass and distance data for the all-zero-block event sets
//   D_k = {x : blocks k and k+1 both all-zero}.
struct BlockEventRow {
  std::uint64_t k = 0;
  std::uint64_t N_k, N_k1, N_k2;  // digit indices bounding blocks k, k+1
  Rat eps_k, eps_k1;
  Rat mass;                       // (1 - eps_k)(1 - eps_k1)
  Rat eps_prefix_sum;             // sum of eps_j, j <= k (divergence watch)
  Rat zero_prefix_mass;           // prod of (1 - eps_j), j <= k, monotone to 0
};
struct BlockEventReport {
  std::vector<BlockEventRow> rows;
  // for a digit horizon M: the block k(M) containing M and the bound
  // 2 n_M / n(N_{k(M)+2}) valid for ||n_M x|| on D_{k(M)}
  std::uint64_t k_of_M = 0;
  Int n_M;
  Rat norm_bound;
};
BlockEventReport block_event_report(const BlockDigitMeasure& mu,
                                    std::uint64_t k_max, std::uint64_t M);

// Averaged squared transform over [-N, N]; converges to the sum of squared
// point masses, so small values witness continuity of the non-atomic part.
struct WienerAverage {
  Int N;
  RatIv average;
  std::optional<Rat> atomic_target;  // sum of squared masses (atomic case)
};
WienerAverage wiener_average(const CircleMeasure& mu, const Int& N,
                             unsigned bits);

// ---- sampling --------------------------------------------------------------------

// Pseudorandom points distributed per the measure, as exact rationals.
std::vector<Rat> sample_points(const CircleMeasure& mu, std::uint64_t count,
                               std::uint64_t seed, unsigned bits);
// Block-digit sampling with the raw digit vectors exposed (digit positions
// 1..digit_horizon); used for exact distance checks on the sampled points.
std::vector<std::vector<Int>> sample_block_digits(const BlockDigitMeasure& mu,
                                                  std::uint64_t count,
                                                  std::uint64_t seed,
                                                  std::uint64_t digit_horizon);

// ---- arc-system construction -------------------------------------------------------

// Builds the nested arc system over the terms of seq (integer consecutive
// ratios required) with shrink factors h_m; every built level must satisfy
// the room condition 1/h_m >= 10 n_m / n_{m+1}.  start = 0 picks the
// smallest starting index from which the whole build is feasible (the
// construction is allowed to begin past the first terms); an explicit
// start is used as-is, and the first failing level is reported.  The
// offsets are symmetric around each parent center, so the transform
// factorizes level by level.
enum class ShrinkRule { squares, linear, listed };
struct CantorBuildReport {
  CantorArcMeasure measure;
  std::uint64_t start = 1;       // index of the root level actually used
  std::vector<Rat> room;         // n_{m+1} / (n_m h_m) per level
  Rat shrink_sum;                // sum of 1/h_m over built levels
};
CantorBuildReport cantor_support(const IntSequence& seq, ShrinkRule rule,
                                 const std::vector<Int>& listed_h,
                                 std::uint64_t depth, std::uint64_t start = 0);

}  // namespace rigidlab
