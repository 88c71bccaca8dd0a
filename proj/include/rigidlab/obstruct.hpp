#pragma once
#include "rigidlab/numeric.hpp"
#include "rigidlab/sequences.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rigidlab {

// A linear form with integer coefficients that is constant and nonzero on
// consecutive terms of a sequence:
//   c_1 n_{m} + c_2 n_{m+1} + ... + c_K n_{m+K-1} = d  for all m in the window.
// Such a form certifies that no ergodic system can be rigid along the
// sequence: the constant offset d prevents the Fourier coefficients from
// accumulating at 1.
struct LinearFormWitness {
  std::vector<Int> coeffs;      // c_1..c_K, first and last nonzero
  Int d = 0;                    // normalized so d > 0
  std::uint64_t window_start = 1;
  std::uint64_t window_len = 0;
  // Whether the form held at 2*window_len positions past the search window.
  bool reverified = false;
  std::string describe() const;
};

// Exhaustive small-coefficient search. Order: K = 1..k_max, then rising
// max|c_i| = 1..c_max, lexicographic among vectors with that max; vectors
// with a zero leading or trailing coefficient are skipped (they duplicate a
// shorter K). First hit wins; the sign is normalized so d > 0.
// Returns nullopt when no form within budget is constant on the window.
std::optional<LinearFormWitness> differencing_obstruction(
    const IntSequence& seq, unsigned k_max, const Int& c_max,
    std::uint64_t window, std::uint64_t start = 1);

// Direct big-integer re-evaluation of a witness over [start, start+count).
bool verify_witness(const IntSequence& seq, const LinearFormWitness& w,
                    std::uint64_t start, std::uint64_t count);

// Empirical equidistribution probe: exponential-sum averages
//   A(x) = (1/M) sum_{m<=M} e(n_m x)
// at `samples` pseudorandom dyadic angles. Small |A(x)| across samples is
// evidence the sequence has no differencing obstruction of the above kind.
struct WeylSample {
  Rat angle;          // the sampled dyadic angle
  Rat abs_avg;        // midpoint estimate of |A(x)|
};
struct WeylProfile {
  std::uint64_t horizon = 0;
  std::vector<WeylSample> rows;
  Rat max_abs_avg;
  bool below_threshold = false;   // max over samples < threshold
  Rat threshold;
};
WeylProfile weyl_profile(const IntSequence& seq, std::uint64_t horizon,
                         unsigned samples, std::uint64_t seed,
                         const Rat& threshold);

// Partial sums of distances to the nearest integer, sum_{m<=M} ||n_m x||.
// The fixed-point overload demands enough fractional bits to keep the
// accumulated rounding error meaningful next to the sum itself.
struct AbsNormSums {
  std::vector<Rat> partial;   // partial[i] = sum over m <= i+1
  Rat total;
  Rat error_bound;            // 0 for the exact-rational overload
};
AbsNormSums abs_norm_partial_sum(const IntSequence& seq, const Rat& x,
                                 std::uint64_t horizon);
AbsNormSums abs_norm_partial_sum(const IntSequence& seq, const FixedAngle& x,
                                 std::uint64_t horizon);

// Examines gaps n_{m+1} - n_m over a window and flags indices whose gap
// fails to exceed the running minimum seen earlier in the window. A
// sequence whose gaps tend to infinity produces no flags past the first
// few indices; interleaved sequences (e.g. n and n+1 merged) flag forever.
struct GapReport {
  std::uint64_t start = 1;
  std::vector<Int> gaps;
  std::vector<std::uint64_t> violations;  // indices m with a non-increasing gap
  Int min_gap;
  bool divergence_evidence = false;  // no violations in the later half
};
GapReport gap_divergence(const IntSequence& seq, std::uint64_t start,
                         std::uint64_t window);

// Density of values of sum_l c_l n_{i_l} inside [-N, N], over index tuples
// with every i_l <= index_horizon. Zero is recorded separately since the
// diagonal always produces it for difference forms.
struct SumsetDensity {
  Int distinct_nonzero = 0;
  bool zero_attained = false;
  Rat density;              // distinct_nonzero / (2N+1)
  std::uint64_t tuples = 0;
};
SumsetDensity sumset_density_probe(const IntSequence& seq,
                                   const std::vector<Int>& coeffs,
                                   const Int& N, std::uint64_t index_horizon,
                                   std::uint64_t budget = 1u << 24);

}  // namespace rigidlab
