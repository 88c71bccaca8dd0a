#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rigidlab/numeric.hpp"

namespace rigidlab {

namespace detail {
class SeqCore;
}

// How a finite parameter list continues past its end.
enum class ListExtend { repeat_last, cycle };

struct GrowthSample {
  Int N;
  Int count;          // #{m : n_m <= N}
  Rat density;        // count / N
  bool sidon_violated;  // count > C * ln N (certified)
};

struct GrowthReport {
  std::vector<GrowthSample> samples;
  std::uint64_t tail_start = 1;
  std::uint64_t horizon = 0;
  Int min_tail_gap;        // min of n_{m+1} - n_m over [tail_start, horizon)
  Int min_late_gap;        // same but over the top half of the window
  Rat min_ratio;           // min n_{m+1}/n_m over the window
  Rat max_ratio;
  bool gap_divergence_fails =
      false;  // small gaps recur arbitrarily late in the window
};

// Strictly increasing sequence of positive integers, 1-indexed, lazily
// generated and memoized.  Monotonicity is enforced at generation time; the
// only tolerated exception is the leading duplicate 1 of a continued-fraction
// denominator sequence whose first partial quotient is 1.
class IntSequence {
 public:
  // unset; using it before assignment raises InternalError
  IntSequence() = default;

  static IntSequence powers(const Int& a);
  static IntSequence integer_ratio_product(std::vector<Int> ratios,
                                           ListExtend extend);
  // coefficients in ascending degree order, evaluated at m = 1, 2, ...
  static IntSequence polynomial(std::vector<Int> coeffs);
  static IntSequence perturbed_powers(const Int& a, std::vector<Int> coeffs);
  // term(m) = q_{m-1}: denominators 1, a_1, a_2*a_1+1, ... of the continued
  // fraction with the given partial quotients
  static IntSequence continued_fraction_denominators(std::vector<Int> quotients,
                                                     ListExtend extend);
  static IntSequence chacon_heights_minus_one();
  static IntSequence explicit_terms(std::vector<Int> terms);
  static IntSequence union_of(std::vector<IntSequence> parts);
  static IntSequence shifted(IntSequence base, const Int& offset);
  // term(m) = sum_i coeffs[i] * term(m-1-i); no spectral claims attached
  static IntSequence linear_recurrence(std::vector<Int> coeffs,
                                       std::vector<Int> init);
  // library-internal: terms produced by a closure (constructions elsewhere)
  static IntSequence from_generator(std::function<Int(std::uint64_t)> gen,
                                    std::string description);

  Int term(std::uint64_t m) const;  // 1-indexed
  std::vector<Int> terms(std::uint64_t lo, std::uint64_t hi) const;

  // exact #{m : n_m <= N}; walks the sequence, so guarded by an index budget
  Int count_up_to(const Int& N, std::uint64_t index_budget = 10000000) const;
  Rat density(const Int& N, std::uint64_t index_budget = 10000000) const;

  // all nonempty subset sums of {n_lo, ..., n_hi}, sorted, deduplicated
  std::vector<Int> finite_sums(std::uint64_t lo, std::uint64_t hi,
                               std::uint64_t budget = 1u << 22) const;

  GrowthReport growth_report(const std::vector<Int>& sample_Ns,
                             std::uint64_t tail_start, std::uint64_t horizon,
                             const Rat& sidon_C,
                             std::uint64_t index_budget = 10000000) const;

  std::string describe() const;

 private:
  explicit IntSequence(std::shared_ptr<detail::SeqCore> core);
  std::shared_ptr<detail::SeqCore> core_;
};

}  // namespace rigidlab
