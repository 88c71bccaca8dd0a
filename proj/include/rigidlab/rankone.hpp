#pragma once
#include "rigidlab/numeric.hpp"
#include "rigidlab/odometer.hpp"
#include "rigidlab/sequences.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace rigidlab {

// One cutting-and-stacking step: the current tower is cut into q columns of
// equal width and restacked left to right, inserting spacers[i] spacer
// levels above column i (spacers[0] goes below the first column).  The new
// height is q*h + sum(spacers).
struct RankOneStage {
  std::uint64_t q = 0;
  std::vector<Int> spacers;  // size q+1
};

// Stage-indexed construction rules.  Stages are 1-based: stage(m) carries
// tower m into tower m+1.
class RankOneSpec {
 public:
  // classic three-column construction with a single middle spacer
  static RankOneSpec chacon();
  // finite list of explicit stages, starting height h1
  static RankOneSpec from_stages(Int h1, std::vector<RankOneStage> stages);
  // Heights forced to the terms of n (so n_{m+1} = q_m h_m + leftovers) with
  // all leftover spacers on top of the last column, plus enough extra whole-
  // column spacer blocks to push the spacer share above 1/m.  Infinite
  // total measure; the tower keeps s_m = q_m - p_m columns.
  static RankOneSpec infinite_from_heights(IntSequence n);
  // Heights forced to the terms of n; when the division leaves a remainder,
  // one spacer goes above column floor(q/3) and the rest on top.  Finite
  // total measure when sum r_m / n_{m+1} converges.
  static RankOneSpec finite_from_heights(IntSequence n);

  RankOneStage stage(std::uint64_t m) const;  // m >= 1
  Int height(std::uint64_t m) const;          // h_m; h_1 from the spec
  // bookkeeping for the height-forced presets (q_m, r_m, p_m, s_m)
  struct PresetRow {
    std::uint64_t m = 0;
    Int q, r, p, s;
  };
  bool has_preset_rows() const;
  PresetRow preset_row(std::uint64_t m) const;
  std::string describe() const;

 private:
  struct Core;
  explicit RankOneSpec(std::shared_ptr<Core> core);
  std::shared_ptr<Core> core_;
};

// Exact tower bookkeeping after building some stages: level widths and the
// spacer mass added per stage.  Total mass is normalized to 1 at stage 1.
struct TowerStageInfo {
  std::uint64_t m = 0;
  Int h;
  Rat level_width;
  Rat spacer_mass_added;
  Rat total_mass;
  Rat spacer_fraction;  // spacer_mass_added / total_mass (after the stage)
};
struct TowerState {
  std::uint64_t stages = 0;
  Int h;
  Rat level_width;
  Rat total_mass;
  std::vector<TowerStageInfo> info;
};
TowerState build_tower(const RankOneSpec& spec, std::uint64_t stages);

// Measure of T^n E \ E (and of the symmetric difference) for E a union of
// levels of tower m, bracketed by refining E through later stages until the
// unresolved top-crossing mass is below tol.
struct DeltaMassBracket {
  RatIv one_sided;   // mu(T^n E \ E)
  RatIv symmetric;   // mu(T^n E  symmetric-difference  E) = 2 * one_sided
  Rat set_mass;      // mu(E), exact
  std::uint64_t resolved_stage = 0;
};
DeltaMassBracket delta_mass(const RankOneSpec& spec, std::uint64_t m,
                            const std::vector<Int>& levels, const Int& n,
                            const Rat& tol);

// ---- symbolic side of the three-column construction ------------------------------

// The stage-k word over {0,1}: B_0 = 0, B_{k+1} = B_k B_k 1 B_k.  The
// positions added as the single new spacer at each stage (and their copies
// under later stages) form the marker set used for the non-recurrence check.
struct ChaconWord {
  std::uint64_t k = 0;
  std::vector<bool> symbol;   // 1 = spacer
  std::vector<bool> marker;   // first-added-spacer positions, one per B_1 copy
  Int length() const { return Int(symbol.size()); }
  Int ones() const;
  Int markers() const;
};
ChaconWord chacon_word(std::uint64_t k);  // k <= 16

// Whether the marker set avoids itself under the shift by h_m - 1 (the
// tower height minus one): empty intersection means the markers never
// return at that time.  Exact bitset check.
struct ChaconShiftCheck {
  std::uint64_t k = 0, m = 0;
  Int shift;
  Int overlap;       // markers meeting their own translate
  bool disjoint = false;
};
ChaconShiftCheck chacon_marker_shift(std::uint64_t k, std::uint64_t m,
                                     const Int& shift_offset);

// ---- revised set construction on an exact cyclic system ---------------------------

// Starting from a set A (union of levels of the height-H odometer tower)
// with T A disjoint from A, removes from B = T A the small error sets
// D_m = (T^{n_m} B) symmetric-difference A for greedily chosen indices m
// while the removed mass stays within budget * mass(A); the surviving set
// C returns exactly into A at the chosen times and misses itself.
struct ReviseStep {
  std::uint64_t m = 0;
  Int n;             // sequence term
  Rat d_mass;        // mass of the error set at this index
  bool selected = false;
};
struct ReviseResult {
  LevelSet A, B, C;
  std::vector<ReviseStep> steps;
  std::vector<std::uint64_t> selected;
  Rat removed_mass;
  Rat c_mass;
  bool c_nonempty = false;
  bool returns_verified = false;  // T^{n_m - 1} C lands in A, misses C
};
ReviseResult nonrecurrent_set_from_rigidity(const Odometer& odo,
                                            const LevelSet& A,
                                            const IntSequence& seq,
                                            std::uint64_t horizon,
                                            const Rat& budget);

}  // namespace rigidlab
