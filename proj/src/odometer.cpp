#include "rigidlab/odometer.hpp"

#include <algorithm>
#include <sstream>

#include "rigidlab/errors.hpp"

namespace rigidlab {

// ---- base machine ---------------------------------------------------------------

struct Odometer::Core {
  std::vector<Int> radixes;
  ListExtend extend;
  mutable std::mutex mu;
  mutable std::vector<Int> n;  // n[t] = product of the first t radixes

  Int rho(std::uint64_t t) const {
    std::size_t i = static_cast<std::size_t>(t);
    if (i < radixes.size()) return radixes[i];
    if (extend == ListExtend::repeat_last) return radixes.back();
    return radixes[i % radixes.size()];
  }

  Int level_count(std::uint64_t t) const {
    std::lock_guard<std::mutex> lock(mu);
    if (n.empty()) n.push_back(Int(1));
    while (n.size() <= t) n.push_back(n.back() * rho(n.size() - 1));
    return n[static_cast<std::size_t>(t)];
  }
};

Odometer::Odometer(std::vector<Int> radixes, ListExtend extend)
    : core_(std::make_shared<Core>()) {
  if (radixes.empty()) throw ConfigError("need at least one radix");
  for (const Int& r : radixes)
    if (r < 2) throw ConfigError("radixes must be >= 2");
  core_->radixes = std::move(radixes);
  core_->extend = extend;
}

Int Odometer::radix(std::uint64_t t) const { return core_->rho(t); }

Int Odometer::level_count(std::uint64_t t) const {
  return core_->level_count(t);
}

IntSequence Odometer::heights() const {
  Odometer self(*this);
  return IntSequence::from_generator(
      [self](std::uint64_t m) { return self.level_count(m); },
      "digit-position sizes of " + describe());
}

std::string Odometer::describe() const {
  std::ostringstream os;
  os << "odometer(";
  for (std::size_t i = 0; i < core_->radixes.size(); ++i) {
    if (i) os << ",";
    os << core_->radixes[i];
  }
  os << (core_->extend == ListExtend::repeat_last ? ",rep)" : ",cyc)");
  return os.str();
}

std::string OdometerPoint::describe() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i) os << ",";
    os << digits[i];
  }
  os << ",0...]";
  return os.str();
}

OdometerPoint advance(const Odometer& odo, OdometerPoint x, Int r) {
  if (r < 0) throw ConfigError("only forward iteration is supported");
  for (std::size_t t = 0; t < x.digits.size(); ++t) {
    Int rho = odo.radix(t);
    if (x.digits[t] < 0 || x.digits[t] >= rho)
      throw ConfigError("digit out of range at position " + std::to_string(t));
  }
  Int carry = 0;
  std::size_t t = 0;
  while (r > 0 || carry > 0) {
    if (t >= x.digits.size()) x.digits.push_back(Int(0));
    Int rho = odo.radix(t);
    Int cur = x.digits[t] + r % rho + carry;
    x.digits[t] = cur % rho;
    carry = cur / rho;
    r /= rho;
    ++t;
    if (t > 1000000) throw ResourceError("carry propagation budget exhausted");
  }
  return x;
}

std::uint64_t trailing_zero_digits(const Odometer& odo, const Int& r) {
  if (r < 1) throw ConfigError("defined for r >= 1");
  std::uint64_t t = 0;
  while (r % odo.level_count(t + 1) == 0) {
    ++t;
    if (t > 1000000) throw ResourceError("zero-digit scan budget exhausted");
  }
  return t;
}

Rat character_exponent(const Odometer& odo, std::uint64_t m,
                       const OdometerPoint& x) {
  if (m == 0) throw ConfigError("digit positions are 1-indexed");
  Int j = 0;
  for (std::size_t t = 0; t < x.digits.size() && t < m; ++t)
    j += x.digits[t] * odo.level_count(t);
  return Rat(j, odo.level_count(m));
}

CxIv character(const Odometer& odo, std::uint64_t m, const OdometerPoint& x,
               unsigned bits) {
  Rat e = character_exponent(odo, m, x);
  return CxIv(cos2pi_iv(e, bits), sin2pi_iv(e, bits));
}

Rat cylinder_delta(const Odometer& odo, std::uint64_t t0, const Int& r) {
  Int H = odo.level_count(t0 + 1);
  // The cylinder is the bottom level of the height-H tower and T^r rotates
  // the levels by r mod H, so the two sets are equal or disjoint.
  if (mod_floor(r, H) == 0) return Rat(0);
  return Rat(2, H);
}

// ---- level sets ------------------------------------------------------------------

Rat LevelSet::mass() const { return Rat(Int(levels.size()), H); }

bool LevelSet::contains(const Int& lev) const {
  return std::binary_search(levels.begin(), levels.end(), lev);
}

std::string LevelSet::describe() const {
  std::ostringstream os;
  os << levels.size() << " of " << H << " levels";
  return os.str();
}

LevelSet make_level_set(const Int& H, std::vector<Int> levels) {
  if (H < 1) throw ConfigError("tower height must be >= 1");
  for (const Int& l : levels)
    if (l < 0 || l >= H) throw ConfigError("level outside [0, H)");
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return LevelSet{H, std::move(levels)};
}

LevelSet level_shift(const LevelSet& s, const Int& r) {
  std::vector<Int> out;
  out.reserve(s.levels.size());
  for (const Int& l : s.levels) out.push_back(mod_floor(l + r, s.H));
  std::sort(out.begin(), out.end());
  return LevelSet{s.H, std::move(out)};
}

namespace {
void check_same_tower(const LevelSet& a, const LevelSet& b) {
  if (a.H != b.H) throw ConfigError("level sets live on different towers");
}
}  // namespace

LevelSet level_union(const LevelSet& a, const LevelSet& b) {
  check_same_tower(a, b);
  std::vector<Int> out;
  std::set_union(a.levels.begin(), a.levels.end(), b.levels.begin(),
                 b.levels.end(), std::back_inserter(out));
  return LevelSet{a.H, std::move(out)};
}

LevelSet level_minus(const LevelSet& a, const LevelSet& b) {
  check_same_tower(a, b);
  std::vector<Int> out;
  std::set_difference(a.levels.begin(), a.levels.end(), b.levels.begin(),
                      b.levels.end(), std::back_inserter(out));
  return LevelSet{a.H, std::move(out)};
}

LevelSet level_intersect(const LevelSet& a, const LevelSet& b) {
  check_same_tower(a, b);
  std::vector<Int> out;
  std::set_intersection(a.levels.begin(), a.levels.end(), b.levels.begin(),
                        b.levels.end(), std::back_inserter(out));
  return LevelSet{a.H, std::move(out)};
}

LevelSet level_symdiff(const LevelSet& a, const LevelSet& b) {
  check_same_tower(a, b);
  std::vector<Int> out;
  std::set_symmetric_difference(a.levels.begin(), a.levels.end(),
                                b.levels.begin(), b.levels.end(),
                                std::back_inserter(out));
  return LevelSet{a.H, std::move(out)};
}

Rat level_delta_mass(const LevelSet& s, const Int& r) {
  return level_symdiff(level_shift(s, r), s).mass();
}

// ---- cocycles --------------------------------------------------------------------

struct OdometerCocycle::Core {
  Odometer odo;
  std::vector<std::uint64_t> positions;  // m_k

  explicit Core(Odometer o) : odo(std::move(o)) {}
};

OdometerCocycle::OdometerCocycle(std::shared_ptr<Core> core)
    : core_(std::move(core)) {}

OdometerCocycle OdometerCocycle::good_function(const Odometer& odo,
                                               std::uint64_t terms) {
  if (terms == 0) throw ConfigError("need at least one component");
  if (terms > 1000000) throw ResourceError("component budget exhausted");
  auto core = std::make_shared<Core>(odo);
  Int last = 0;
  std::uint64_t t = 1;
  while (core->positions.size() < terms) {
    Int nt = odo.level_count(t);
    if (last == 0 || nt >= 2 * last) {
      core->positions.push_back(t);
      last = nt;
    }
    ++t;
    if (t > 64 * terms + 64)
      throw ResourceError("digit positions grow too slowly to separate");
  }
  return OdometerCocycle(std::move(core));
}

std::uint64_t OdometerCocycle::terms() const {
  return core_->positions.size();
}

std::uint64_t OdometerCocycle::position(std::uint64_t k) const {
  if (k == 0 || k > core_->positions.size())
    throw ConfigError("component index out of range");
  return core_->positions[static_cast<std::size_t>(k - 1)];
}

Rat OdometerCocycle::n_amp_sq(std::uint64_t k) const {
  if (k == 0 || k > core_->positions.size())
    throw ConfigError("component index out of range");
  return Rat(1, Int(k));
}

Rat OdometerCocycle::amp_sq(std::uint64_t k) const {
  Int nm = core_->odo.level_count(position(k));
  return Rat(1, Int(k) * nm * nm);
}

const Odometer& OdometerCocycle::base() const { return core_->odo; }

CoboundarySums coboundary_test(const OdometerCocycle& c,
                               const std::vector<std::uint64_t>& sample_Ks) {
  if (sample_Ks.empty()) throw ConfigError("need at least one sample index");
  std::vector<std::uint64_t> Ks = sample_Ks;
  std::sort(Ks.begin(), Ks.end());
  if (Ks.back() > 10000000) throw ResourceError("partial-sum budget exhausted");

  CoboundarySums out;
  Rat acc = 0;
  std::uint64_t k = 0;
  for (std::uint64_t K : Ks) {
    while (k < K) {
      ++k;
      // |n_{m_k} a_{m_k}|^2 = 1/k by construction; past the stored
      // components the amplitude rule continues the same schedule
      acc += (k <= c.terms()) ? c.n_amp_sq(k) : Rat(1, Int(k));
    }
    out.partials.emplace_back(K, acc);
  }
  out.last = acc;
  out.diverging = out.partials.size() < 2 ||
                  out.partials.back().second > out.partials.front().second;
  return out;
}

namespace {

// sum_{i<r} e^{2 pi i * i/n}, as a certified rectangle; r in [0, n)
CxIv partial_cycle_sum(const Int& r, const Int& n, unsigned bits) {
  if (r == 0) return CxIv(RatIv(Rat(0)), RatIv(Rat(0)));
  CxIv one = CxIv::one();
  CxIv num = cx_sub(one, CxIv(cos2pi_iv(Rat(r, n), bits),
                              sin2pi_iv(Rat(r, n), bits)));
  CxIv den = cx_sub(one, CxIv(cos2pi_iv(Rat(1, n), bits),
                              sin2pi_iv(Rat(1, n), bits)));
  return cx_div(num, den);
}

CxIv cx_mul_iv(const RatIv& a, const CxIv& z) {
  return CxIv(iv_mul(a, z.re), iv_mul(a, z.im));
}

}  // namespace

CocycleSumReport cocycle_sum(const OdometerCocycle& c, const Int& n,
                             const OdometerPoint& x, unsigned bits) {
  if (n < 0) throw ConfigError("only forward sums are defined");
  const Odometer& odo = c.base();
  CocycleSumReport out;
  out.value = CxIv(RatIv(Rat(0)), RatIv(Rat(0)));
  for (std::uint64_t k = 1; k <= c.terms(); ++k) {
    std::uint64_t m = c.position(k);
    Int nm = odo.level_count(m);
    Int r = mod_floor(n, nm);
    Rat j = character_exponent(odo, m, x);

    CocycleSumTerm term;
    term.k = k;
    term.m = m;
    term.n_m = nm;
    term.residual = r;
    term.start_exponent = j;
    out.terms.push_back(term);

    if (r == 0) continue;  // whole cycles cancel exactly
    CxIv geo = partial_cycle_sum(r, nm, bits);
    CxIv rotated = cx_mul(CxIv(cos2pi_iv(j, bits), sin2pi_iv(j, bits)), geo);
    RatIv amp = sqrt_iv(c.amp_sq(k), bits);
    out.value = cx_add(out.value, cx_mul_iv(amp, rotated));
    out.value = cx_round_out(out.value, 4 * bits);
  }
  return out;
}

CocycleNormReport cocycle_norm_bound(const OdometerCocycle& c,
                                     std::uint64_t m0, unsigned bits) {
  if (m0 == 0) throw ConfigError("digit positions are 1-indexed");
  const Odometer& odo = c.base();
  CocycleNormReport out;
  out.m0 = m0;
  out.n_m0 = odo.level_count(m0);
  Int n0 = out.n_m0;
  RatIv acc(Rat(0));
  Rat crude = 0;
  for (std::uint64_t k = 1; k <= c.terms(); ++k) {
    std::uint64_t m = c.position(k);
    if (m <= m0) continue;
    Int nm = odo.level_count(m);
    // component contributes |a_k|^2 |sum_{i<n0} e(i/nm)|^2; the modulus
    // squared is sin^2(pi n0/nm) / sin^2(pi/nm).  The denominator sine is of
    // order 1/nm, so the working precision has to grow with bit_length(nm)
    // for the enclosure to stay away from zero.
    unsigned wb = bits + bit_length(nm) + 32;
    RatIv s_num = sin2pi_iv(Rat(n0, 2 * nm), wb);
    RatIv s_den = sin2pi_iv(Rat(1, 2 * nm), wb);
    RatIv ratio_sq = iv_div(iv_mul(s_num, s_num), iv_mul(s_den, s_den));
    Rat a2 = c.amp_sq(k);
    RatIv term = iv_scale(ratio_sq, a2);
    // |geometric sum| <= n0 always, so clip against the exact ceiling
    Rat cap = a2 * Rat(n0 * n0);
    if (term.hi > cap) term.hi = cap;
    if (term.lo < 0) term.lo = 0;
    acc = iv_add(acc, term);
    acc = iv_round_out(acc, 4 * bits);
    crude += cap;
    ++out.terms_used;
  }
  out.norm_sq = acc;
  out.crude_upper = crude;
  out.within_crude = (acc.hi <= crude);
  return out;
}

}  // namespace rigidlab
