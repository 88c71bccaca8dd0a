#include "rigidlab/rankone.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

#include "rigidlab/errors.hpp"

namespace rigidlab {

// ---- construction rules ------------------------------------------------------------

struct RankOneSpec::Core {
  enum class Kind { chacon, explicit_stages, infinite_heights, finite_heights };
  Kind kind = Kind::chacon;
  Int h1 = 1;
  std::vector<RankOneStage> stages;  // explicit list
  IntSequence n;                     // height-forced presets

  mutable std::mutex mu;
  mutable std::vector<Int> heights;            // heights[i] = h_{i+1}
  mutable std::vector<RankOneSpec::PresetRow> rows;

  Int height_locked(std::uint64_t m);
  RankOneStage stage_locked(std::uint64_t m);
};

RankOneSpec::RankOneSpec(std::shared_ptr<Core> core) : core_(std::move(core)) {}

RankOneSpec RankOneSpec::chacon() {
  auto core = std::make_shared<Core>();
  core->kind = Core::Kind::chacon;
  core->h1 = 1;
  return RankOneSpec(std::move(core));
}

RankOneSpec RankOneSpec::from_stages(Int h1, std::vector<RankOneStage> stages) {
  if (h1 < 1) throw ConfigError("starting height must be >= 1");
  for (const RankOneStage& s : stages) {
    if (s.q < 1) throw ConfigError("each stage needs at least one column");
    if (s.spacers.size() != s.q + 1)
      throw ConfigError("spacer list must have q+1 entries");
    for (const Int& sp : s.spacers)
      if (sp < 0) throw ConfigError("spacer counts are nonnegative");
  }
  auto core = std::make_shared<Core>();
  core->kind = Core::Kind::explicit_stages;
  core->h1 = std::move(h1);
  core->stages = std::move(stages);
  return RankOneSpec(std::move(core));
}

RankOneSpec RankOneSpec::infinite_from_heights(IntSequence n) {
  auto core = std::make_shared<Core>();
  core->kind = Core::Kind::infinite_heights;
  core->h1 = n.term(1);
  core->n = std::move(n);
  return RankOneSpec(std::move(core));
}

RankOneSpec RankOneSpec::finite_from_heights(IntSequence n) {
  auto core = std::make_shared<Core>();
  core->kind = Core::Kind::finite_heights;
  core->h1 = n.term(1);
  core->n = std::move(n);
  return RankOneSpec(std::move(core));
}

RankOneStage RankOneSpec::Core::stage_locked(std::uint64_t m) {
  switch (kind) {
    case Kind::chacon: {
      RankOneStage s;
      s.q = 3;
      s.spacers = {Int(0), Int(0), Int(1), Int(0)};
      return s;
    }
    case Kind::explicit_stages: {
      if (m > stages.size())
        throw ResourceError("construction has " +
                            std::to_string(stages.size()) + " stages");
      return stages[static_cast<std::size_t>(m - 1)];
    }
    case Kind::infinite_heights:
    case Kind::finite_heights:
      break;
  }

  Int h = height_locked(m);
  Int H = n.term(m + 1);
  Int q = H / h;
  Int r = H - q * h;
  if (q < 2)
    throw ConfigError("height ratio below 2 at stage " + std::to_string(m));
  std::uint64_t qi = q.convert_to<std::uint64_t>();

  RankOneStage s;
  if (kind == Kind::infinite_heights) {
    // push enough whole-column spacer blocks on top that the spacer share
    // of the new tower exceeds 1/m; the tower keeps s = q - p columns
    Int p;
    Int mm(static_cast<long long>(m));
    if (H - r * mm < 0) {
      p = 0;
    } else {
      p = floor_div(H - r * mm, h * mm) + 1;
    }
    if (p > q - 1) p = q - 1;  // always keep one column
    if (p < 0) p = 0;
    Int cols = q - p;
    std::uint64_t ci = cols.convert_to<std::uint64_t>();
    s.q = ci;
    s.spacers.assign(ci + 1, Int(0));
    s.spacers[ci] = r + p * h;
    if (rows.size() < m) rows.resize(m);
    rows[m - 1] = PresetRow{m, q, r, p, cols};
    return s;
  }

  // finite_heights
  s.q = qi;
  s.spacers.assign(qi + 1, Int(0));
  if (r > 0) {
    Int a = q / 3;
    std::size_t ai = a.convert_to<std::size_t>();
    s.spacers[ai] += 1;
    s.spacers[qi] += r - 1;
  }
  if (rows.size() < m) rows.resize(m);
  rows[m - 1] = PresetRow{m, q, r, Int(0), q};
  return s;
}

Int RankOneSpec::Core::height_locked(std::uint64_t m) {
  if (m == 0) throw ConfigError("stages are 1-indexed");
  if (heights.empty()) heights.push_back(h1);
  while (heights.size() < m) {
    std::uint64_t built = heights.size();  // have h_1..h_built
    RankOneStage s = stage_locked(built);
    Int next = Int(s.q) * heights.back();
    for (const Int& sp : s.spacers) next += sp;
    // the height-forced presets must reproduce their target sequence
    if (kind == Kind::infinite_heights || kind == Kind::finite_heights) {
      if (next != n.term(built + 1))
        throw InternalError("stage failed to reach the forced height");
    }
    heights.push_back(std::move(next));
  }
  return heights[static_cast<std::size_t>(m - 1)];
}

RankOneStage RankOneSpec::stage(std::uint64_t m) const {
  if (m == 0) throw ConfigError("stages are 1-indexed");
  std::lock_guard<std::mutex> lock(core_->mu);
  core_->height_locked(m);  // fills preset rows up to m-1
  return core_->stage_locked(m);
}

Int RankOneSpec::height(std::uint64_t m) const {
  std::lock_guard<std::mutex> lock(core_->mu);
  return core_->height_locked(m);
}

bool RankOneSpec::has_preset_rows() const {
  return core_->kind == Core::Kind::infinite_heights ||
         core_->kind == Core::Kind::finite_heights;
}

RankOneSpec::PresetRow RankOneSpec::preset_row(std::uint64_t m) const {
  if (!has_preset_rows())
    throw ConfigError("no division bookkeeping for this construction");
  std::lock_guard<std::mutex> lock(core_->mu);
  core_->height_locked(m + 1);
  if (m == 0 || core_->rows.size() < m || core_->rows[m - 1].m != m)
    throw InternalError("preset row not materialized");
  return core_->rows[m - 1];
}

std::string RankOneSpec::describe() const {
  switch (core_->kind) {
    case Core::Kind::chacon:
      return "three-column tower with one middle spacer";
    case Core::Kind::explicit_stages:
      return "explicit stages from height " + core_->h1.str();
    case Core::Kind::infinite_heights:
      return "spacer-heavy tower over " + core_->n.describe();
    case Core::Kind::finite_heights:
      return "thin-spacer tower over " + core_->n.describe();
  }
  return "?";
}

// ---- exact tower bookkeeping ---------------------------------------------------------

TowerState build_tower(const RankOneSpec& spec, std::uint64_t stages) {
  if (stages == 0) throw ConfigError("need at least one stage");
  if (stages > 4096) throw ResourceError("stage budget exhausted");
  TowerState st;
  st.stages = stages;
  Rat w(1, spec.height(1));
  Rat total = 1;
  st.info.push_back({1, spec.height(1), w, Rat(0), total, Rat(0)});
  for (std::uint64_t m = 1; m < stages; ++m) {
    RankOneStage s = spec.stage(m);
    w /= Int(s.q);
    Int spacer_count = 0;
    for (const Int& sp : s.spacers) spacer_count += sp;
    Rat added = Rat(spacer_count) * w;
    total += added;
    st.info.push_back(
        {m + 1, spec.height(m + 1), w, added, total, Rat(added / total)});
  }
  st.h = spec.height(stages);
  st.level_width = w;
  st.total_mass = total;
  return st;
}

// ---- image mass brackets ---------------------------------------------------------------

DeltaMassBracket delta_mass(const RankOneSpec& spec, std::uint64_t m,
                            const std::vector<Int>& levels, const Int& n,
                            const Rat& tol) {
  if (m == 0) throw ConfigError("stages are 1-indexed");
  if (levels.empty()) throw ConfigError("need a nonempty level set");
  if (n < 0) throw ConfigError("only forward images are bracketed");
  if (tol <= 0) throw ConfigError("tolerance must be positive");

  Int h = spec.height(m);
  std::vector<Int> E = levels;
  std::sort(E.begin(), E.end());
  E.erase(std::unique(E.begin(), E.end()), E.end());
  if (E.front() < 0 || E.back() >= h)
    throw ConfigError("level outside the stage-" + std::to_string(m) +
                      " tower");

  // level width at stage m
  Rat w(1, spec.height(1));
  for (std::uint64_t j = 1; j < m; ++j) w /= Int(spec.stage(j).q);

  DeltaMassBracket out;
  out.set_mass = Rat(Int(E.size())) * w;

  std::uint64_t M = m;
  for (;;) {
    Int hM = spec.height(M);
    std::uint64_t hits = 0, crossing = 0;
    for (const Int& L : E) {
      if (L + n >= hM) {
        ++crossing;
      } else if (std::binary_search(E.begin(), E.end(), Int(L + n))) {
        ++hits;
      }
    }
    Rat inter_lo = Rat(Int(hits)) * w;
    Rat inter_hi = Rat(Int(hits + crossing)) * w;
    Rat gap = Rat(Int(crossing)) * w;
    if (gap <= tol || crossing == 0) {
      out.one_sided = RatIv(Rat(out.set_mass - inter_hi),
                            Rat(out.set_mass - inter_lo));
      out.symmetric = iv_scale(out.one_sided, Rat(2));
      out.resolved_stage = M;
      return out;
    }

    // refine through the next stage: each level splits into one copy per
    // surviving column, offset by the column bases
    RankOneStage s = spec.stage(M);
    if (E.size() * s.q > 4000000)
      throw ResourceError("refined level set exceeds the size budget");
    if (M - m > 64) throw ResourceError("refinement depth budget exhausted");
    std::vector<Int> bases;
    bases.reserve(s.q);
    Int pos = s.spacers[0];
    for (std::uint64_t i = 0; i < s.q; ++i) {
      bases.push_back(pos);
      pos += hM + s.spacers[i + 1];
    }
    if (pos != spec.height(M + 1))
      throw InternalError("stage bases do not fill the next tower");
    std::vector<Int> next;
    next.reserve(E.size() * s.q);
    for (const Int& base : bases)
      for (const Int& L : E) next.push_back(base + L);
    std::sort(next.begin(), next.end());
    E = std::move(next);
    w /= Int(s.q);
    ++M;
  }
}

// ---- three-column symbolic words ----------------------------------------------------------

ChaconWord chacon_word(std::uint64_t k) {
  if (k == 0 || k > 16) throw ConfigError("word stage must be 1..16");
  std::vector<bool> sym = {false};   // B_0 = 0
  std::vector<bool> mark = {false};
  for (std::uint64_t j = 0; j < k; ++j) {
    std::size_t L = sym.size();
    std::vector<bool> s2;
    s2.reserve(3 * L + 1);
    std::vector<bool> m2;
    m2.reserve(3 * L + 1);
    s2.insert(s2.end(), sym.begin(), sym.end());
    s2.insert(s2.end(), sym.begin(), sym.end());
    s2.push_back(true);
    s2.insert(s2.end(), sym.begin(), sym.end());
    m2.insert(m2.end(), mark.begin(), mark.end());
    m2.insert(m2.end(), mark.begin(), mark.end());
    // the freshly inserted spacer is the marker only at the first stage;
    // later stages copy the stage-1 markers and add an unmarked spacer
    m2.push_back(j == 0);
    m2.insert(m2.end(), mark.begin(), mark.end());
    sym = std::move(s2);
    mark = std::move(m2);
  }
  ChaconWord out;
  out.k = k;
  out.symbol = std::move(sym);
  out.marker = std::move(mark);
  return out;
}

Int ChaconWord::ones() const {
  std::size_t c = 0;
  for (bool b : symbol) c += b;
  return Int(c);
}

Int ChaconWord::markers() const {
  std::size_t c = 0;
  for (bool b : marker) c += b;
  return Int(c);
}

ChaconShiftCheck chacon_marker_shift(std::uint64_t k, std::uint64_t m,
                                     const Int& shift_offset) {
  if (m > k) throw ConfigError("shift stage cannot exceed the word stage");
  ChaconWord w = chacon_word(k);
  // the stage-(m+1) tower height is (3^(m+1) - 1) / 2
  Int height = (ipow(3, m + 1) - 1) / 2;
  Int shift = height - 1 + shift_offset;
  if (shift < 0) throw ConfigError("net shift must be nonnegative");
  ChaconShiftCheck out;
  out.k = k;
  out.m = m;
  out.shift = shift;
  std::size_t sh = shift.convert_to<std::size_t>();
  std::size_t overlap = 0;
  for (std::size_t i = 0; i + sh < w.marker.size(); ++i) {
    if (w.marker[i] && w.marker[i + sh]) ++overlap;
  }
  out.overlap = Int(overlap);
  out.disjoint = (overlap == 0);
  return out;
}

// ---- revised set construction ----------------------------------------------------------------

ReviseResult nonrecurrent_set_from_rigidity(const Odometer& odo,
                                            const LevelSet& A,
                                            const IntSequence& seq,
                                            std::uint64_t horizon,
                                            const Rat& budget) {
  if (budget <= 0 || budget >= 1)
    throw ConfigError("removal budget must lie in (0, 1)");
  if (A.levels.empty()) throw ConfigError("base set is empty");

  // the shift acts as an exact level rotation only when H is one of the
  // digit-position sizes of the machine
  bool H_ok = false;
  for (std::uint64_t t = 1; t <= 4096; ++t) {
    Int nt = odo.level_count(t);
    if (nt == A.H) {
      H_ok = true;
      break;
    }
    if (nt > A.H) break;
  }
  if (!H_ok)
    throw ConfigError("tower height is not a digit-position size of the machine");

  ReviseResult out;
  out.A = A;
  out.B = level_shift(A, 1);
  if (!level_intersect(out.B, A).levels.empty())
    throw ConfigError("the base set must move off itself in one step");

  Rat allowance = budget * A.mass();
  Rat removed = 0;
  LevelSet removal = make_level_set(A.H, {});
  for (std::uint64_t m = 1; m <= horizon; ++m) {
    Int nm = seq.term(m);
    LevelSet image = level_shift(out.B, nm - 1);
    LevelSet D = level_symdiff(image, A);
    ReviseStep step;
    step.m = m;
    step.n = nm;
    step.d_mass = D.mass();
    if (removed + step.d_mass <= allowance) {
      step.selected = true;
      removed += step.d_mass;
      out.selected.push_back(m);
      // points of B that would land outside A at this return time
      LevelSet bad = level_minus(image, A);
      removal = level_union(removal, level_shift(bad, Int(1 - nm)));
    }
    out.steps.push_back(step);
  }
  out.C = level_minus(out.B, removal);
  out.removed_mass = removed;
  out.c_mass = out.C.mass();
  out.c_nonempty = !out.C.levels.empty();

  out.returns_verified = out.c_nonempty;
  for (std::uint64_t m : out.selected) {
    Int nm = seq.term(m);
    LevelSet img = level_shift(out.C, nm - 1);
    if (!level_minus(img, A).levels.empty() ||
        !level_intersect(img, out.C).levels.empty()) {
      out.returns_verified = false;
      break;
    }
  }
  return out;
}

}  // namespace rigidlab
