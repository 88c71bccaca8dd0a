#include "rigidlab/rotation.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

#include "rigidlab/errors.hpp"

namespace rigidlab {

// ---- continued fractions ----------------------------------------------------

struct ContinuedFraction::Core {
  std::vector<Int> quotients;
  ListExtend extend;
  mutable std::mutex mu;
  mutable std::vector<Convergent> conv;  // conv[k] = (p_k, q_k)

  Int a(std::uint64_t k) const {  // k >= 1
    if (quotients.empty()) throw ConfigError("empty partial quotient list");
    std::size_t i = static_cast<std::size_t>(k - 1);
    if (i < quotients.size()) return quotients[i];
    if (extend == ListExtend::repeat_last) return quotients.back();
    return quotients[i % quotients.size()];
  }

  // ensure conv.size() > k
  void extend_to(std::uint64_t k) const {
    if (conv.empty()) {
      conv.push_back({Int(0), Int(1)});             // p_0/q_0 = 0/1
      conv.push_back({Int(1), a(1)});               // p_1/q_1 = 1/a_1
    }
    while (conv.size() <= k) {
      std::uint64_t n = conv.size();
      Int an = a(n);
      Int p = an * conv[n - 1].p + conv[n - 2].p;
      Int q = an * conv[n - 1].q + conv[n - 2].q;
      conv.push_back({std::move(p), std::move(q)});
    }
  }
};

ContinuedFraction::ContinuedFraction(std::vector<Int> quotients,
                                     ListExtend extend)
    : core_(std::make_shared<Core>()) {
  if (quotients.empty()) throw ConfigError("need at least one partial quotient");
  for (const Int& a : quotients)
    if (a < 1) throw ConfigError("partial quotients must be >= 1");
  core_->quotients = std::move(quotients);
  core_->extend = extend;
}

ContinuedFraction ContinuedFraction::golden() {
  return ContinuedFraction({Int(1)}, ListExtend::repeat_last);
}

Int ContinuedFraction::quotient(std::uint64_t k) const {
  if (k == 0) throw ConfigError("partial quotients are 1-indexed");
  return core_->a(k);
}

ContinuedFraction::Convergent ContinuedFraction::convergent(
    std::uint64_t k) const {
  std::lock_guard<std::mutex> lock(core_->mu);
  core_->extend_to(k);
  return core_->conv[k];
}

std::uint64_t ContinuedFraction::index_with_q_above(const Int& bound) const {
  std::lock_guard<std::mutex> lock(core_->mu);
  core_->extend_to(1);
  std::uint64_t k = 0;
  for (;;) {
    core_->extend_to(k);
    if (core_->conv[k].q > bound) return k;
    ++k;
    if (k > 100000000) throw ResourceError("convergent index out of range");
  }
}

std::pair<Rat, Rat> ContinuedFraction::bracket(const Int& q_bound) const {
  std::uint64_t k = index_with_q_above(q_bound);
  Convergent c1 = convergent(k), c2 = convergent(k + 1);
  Rat r1(c1.p, c1.q), r2(c2.p, c2.q);
  // even-index convergents sit below alpha, odd above
  if (k % 2 == 0) return {r1, r2};
  return {r2, r1};
}

RatIv ContinuedFraction::norm_mult(const Int& n) const {
  if (n == 0) return RatIv(Rat(0));
  Int an = n < 0 ? Int(-n) : n;
  std::uint64_t k = index_with_q_above(4 * an * (Int(1) << 64));
  Convergent c1 = convergent(k), c2 = convergent(k + 1);
  Rat e1 = frac_part(Rat(an * c1.p, c1.q));
  Rat e2 = frac_part(Rat(an * c2.p, c2.q));
  Rat d1 = norm_dist(e1), d2 = norm_dist(e2);
  Rat w = rat_abs(Rat(an * c1.p, c1.q) - Rat(an * c2.p, c2.q));
  // n*alpha lies between the two endpoint products, and ||.|| is
  // 1-Lipschitz, so both endpoint distances pin it within w; intersect.
  Rat lo = std::max(Rat(0), Rat(std::max(d1, d2) - w));
  Rat hi = std::min(Rat(1, 2), Rat(std::min(d1, d2) + w));
  if (lo > hi) {  // numerically impossible, but keep the interval legal
    lo = std::max(Rat(0), Rat(std::min(d1, d2) - w));
    hi = std::min(Rat(1, 2), Rat(std::max(d1, d2) + w));
  }
  return RatIv(lo, hi);
}

bool ContinuedFraction::norm_lt(const Int& n, const Rat& thresh) const {
  if (n == 0) return thresh > 0;
  Int an = n < 0 ? Int(-n) : n;
  Int factor = Int(1) << 64;
  for (int round = 0; round < 40; ++round) {
    std::uint64_t k = index_with_q_above(4 * an * factor);
    Convergent c1 = convergent(k), c2 = convergent(k + 1);
    Rat e1 = frac_part(Rat(an * c1.p, c1.q));
    Rat e2 = frac_part(Rat(an * c2.p, c2.q));
    Rat d1 = norm_dist(e1), d2 = norm_dist(e2);
    Rat w = rat_abs(Rat(an * c1.p, c1.q) - Rat(an * c2.p, c2.q));
    Rat lo = std::max(Rat(0), Rat(std::max(d1, d2) - w));
    Rat hi = std::min(Rat(1, 2), Rat(std::min(d1, d2) + w));
    if (hi < thresh) return true;
    if (lo >= thresh) return false;
    factor <<= 64;
  }
  throw InternalError("norm comparison failed to separate from threshold");
}

RatIv ContinuedFraction::q_norm_q(std::uint64_t k) const {
  Convergent c = convergent(k);
  return iv_scale(norm_mult(c.q), Rat(c.q));
}

IntSequence ContinuedFraction::denominators() const {
  ContinuedFraction self(*this);
  return IntSequence::from_generator(
      [self](std::uint64_t m) { return self.convergent(m).q; },
      "continued-fraction denominators " + describe());
}

std::string ContinuedFraction::describe() const {
  std::ostringstream os;
  os << "[0;";
  for (std::size_t i = 0; i < core_->quotients.size(); ++i) {
    if (i) os << ",";
    os << core_->quotients[i];
  }
  os << (core_->extend == ListExtend::repeat_last ? ",rep]" : ",cyc]");
  return os.str();
}

// ---- exact counting of close return times -----------------------------------

namespace {

// sum_{n=1}^{M} floor((a*n + b) / c)
Int fs1(const Int& M, const Int& a, const Int& b, const Int& c) {
  return floor_sum(M + 1, a, b, c) - floor_div(b, c);
}

// #{1 <= n <= M : (n*P mod Q) <= A}, exact
Int count_mod_leq(const Int& M, const Int& P, const Int& Q, const Int& A) {
  if (A < 0) return 0;
  if (A >= Q) return M;
  return fs1(M, P, Int(0), Q) - fs1(M, P, Int(-A - 1), Q);
}

// number of n in [1, M] with n*P == A (mod Q); also reports one solution
Int count_mod_eq(const Int& M, const Int& P, const Int& Q, const Int& A) {
  Int g = gcd(P, Q);
  if (A % g != 0) return 0;
  Int Pr = P / g, Qr = Q / g, Ar = (A / g) % Qr;
  Int inv;
  if (mpz_invert(inv.backend().data(), Pr.backend().data(),
                 Qr.backend().data()) == 0)
    throw InternalError("modular inverse does not exist");
  Int n0 = (Ar * inv) % Qr;
  if (n0 == 0) n0 = Qr;
  if (n0 > M) return 0;
  return (M - n0) / Qr + 1;
}

}  // namespace

Int count_close(const ContinuedFraction& cf, const Int& M, const Rat& delta) {
  if (M < 1) return 0;
  if (delta <= 0 || delta >= Rat(1, 2))
    throw ConfigError("distance threshold must lie in (0, 1/2)");
  Int num = numerator(delta), den = denominator(delta);
  std::uint64_t k = cf.index_with_q_above(4 * M * den);
  auto c = cf.convergent(k);
  // alpha = p/q + eps with sign(eps) fixed by the parity of k
  bool eps_positive = (k % 2 == 0);

  Int P = c.p * den, Q = c.q * den;
  Int A_lo = num * c.q;        // frac <= delta boundary scaled to /Q
  Int A_hi = Q - A_lo;         // frac >= 1 - delta boundary

  Int low = count_mod_leq(M, P, Q, A_lo);
  Int high = M - count_mod_leq(M, P, Q, A_hi - 1);
  Int total = low + high;

  // Rational ties sit exactly on a boundary; the true point is nudged by
  // n*eps, whose sign we know, so each tie is kept or dropped exactly.
  Int t_lo = count_mod_eq(M, P, Q, A_lo);
  Int t_hi = count_mod_eq(M, P, Q, A_hi);
  if (eps_positive) {
    total -= t_lo;   // frac = delta + n*eps > delta: outside
  } else {
    total -= t_hi;   // frac = 1 - delta + n*eps < 1 - delta: outside
  }
  return total;
}

// ---- syndetic return-time bound ----------------------------------------------

namespace {

// Incremental membership scanner for ||n alpha|| < thresh over consecutive n,
// exact via a deep convergent.  The object must not outlive its cf.
struct HitScanner {
  Int p, q;
  bool eps_positive;
  Int num, den;    // threshold
  Int j = 0;       // j_n = n*p mod q

  HitScanner(const ContinuedFraction& cf, const Rat& thresh, const Int& n_max) {
    num = numerator(thresh);
    den = denominator(thresh);
    std::uint64_t k = cf.index_with_q_above(4 * n_max * den * 256);
    auto c = cf.convergent(k);
    p = c.p;
    q = c.q;
    eps_positive = (k % 2 == 0);
  }

  // advance to the next n and report membership (strict inequality)
  bool step() {
    j += p;
    if (j >= q) j -= q;  // p < q, so one subtraction restores the range
    // low side: j/q < num/den, tie resolved by the nudge direction
    Int lhs = j * den, rhs = num * q;
    if (lhs < rhs) return true;
    if (lhs == rhs) return !eps_positive;
    // high side: (q - j)/q < num/den
    Int lhs2 = (q - j) * den;
    if (lhs2 < rhs) return true;
    if (lhs2 == rhs) return eps_positive;
    return false;
  }
};

}  // namespace

SyndeticBound syndeticity_constant(const ContinuedFraction& cf, const Rat& eps,
                                   const Int& scan_budget) {
  if (eps <= 0 || eps > Rat(1, 2))
    throw ConfigError("neighborhood size must lie in (0, 1/2]");
  SyndeticBound out;

  // first convergent with ||q_k alpha|| < eps/4
  std::uint64_t k = 1;
  for (;; ++k) {
    if (cf.norm_lt(cf.convergent(k).q, eps / 4)) break;
    if (k > 100000) throw ResourceError("no convergent within reach");
  }
  out.conv_index = k;
  Int cycle = cf.convergent(k).q + cf.convergent(k + 1).q;
  out.cycle = cycle;
  if (cycle > scan_budget)
    throw ResourceError("return-time cycle exceeds the scan budget");

  // Pass 1: max gap between hits ||n alpha|| < eps/2 across one cycle.
  Rat half = eps / 2;
  if (half >= Rat(1, 2)) half = Rat(1, 2) - Rat(1, 1u << 20);
  HitScanner scan(cf, half, cycle * 16 + 1024);
  Int last = 0, max_gap = 0, hits = 0, n = 0;
  for (Int i = 1; i <= cycle; ++i) {
    ++n;
    if (scan.step()) {
      ++hits;
      if (n - last > max_gap) max_gap = n - last;
      last = n;
    }
  }
  if (hits == 0) throw InternalError("no return inside a full cycle");
  out.hits = hits;
  Int N = max_gap;

  // Pass 2: keep scanning 10*N more windows; a bigger gap would falsify the
  // bound, in which case the larger value is reported instead.
  Int ext_max = 0;
  Int limit = n + 11 * N;
  while (n < limit) {
    ++n;
    if (scan.step()) {
      if (n - last > ext_max) ext_max = n - last;
      last = n;
    }
  }
  if (n - last > ext_max) ext_max = n - last;  // trailing open gap
  out.reverified = (ext_max <= N);
  out.N = std::max(N, ext_max);
  return out;
}

// ---- density schedules --------------------------------------------------------

DensityRule DensityRule::inv_log() { return DensityRule(Kind::inv_log); }
DensityRule DensityRule::inv_sqrt() { return DensityRule(Kind::inv_sqrt); }

Int DensityRule::threshold_index(const Rat& t) const {
  if (t <= 0 || t >= 1) throw ConfigError("density target must be in (0,1)");
  if (kind_ == Kind::inv_sqrt) {
    // 1/sqrt(N+1) <= t  <=>  N >= 1/t^2 - 1
    Rat bound = 1 / (t * t) - 1;
    Int N = -floor_div(-numerator(bound), denominator(bound));  // ceil
    return std::max(N, Int(1));
  }
  // 1/ln(N+2) <= t  <=>  N + 2 >= e^(1/t)
  Rat e = 1 / t;
  // magnitude of e^(1/t) in bits, plus room to separate the ceiling
  unsigned bits =
      Int(3 * numerator(e) / (2 * denominator(e))).convert_to<unsigned>() + 96;
  for (int round = 0; round < 20; ++round) {
    RatIv iv = exp_iv(e, bits);
    Int lo_ceil = -floor_div(-numerator(iv.lo), denominator(iv.lo));
    Int hi_ceil = -floor_div(-numerator(iv.hi), denominator(iv.hi));
    if (lo_ceil == hi_ceil) return std::max(Int(hi_ceil - 2), Int(1));
    bits *= 2;
  }
  throw InternalError("exponential failed to separate from an integer");
}

RatIv DensityRule::at(const Int& N, unsigned bits) const {
  if (N < 1) throw ConfigError("schedule index must be >= 1");
  if (kind_ == Kind::inv_sqrt) {
    Int s = sqrt(Int(N + 1));  // integer square root
    if (s * s == N + 1) return RatIv(Rat(1, s));
    return RatIv(Rat(1, s + 1), Rat(1, s));
  }
  RatIv l = log_iv(Rat(N + 2), bits);
  return iv_div(RatIv(Rat(1)), l);
}

std::string DensityRule::describe() const {
  return kind_ == Kind::inv_log ? "1/ln(N+2)" : "1/sqrt(N+1)";
}

// ---- slow-growth rigid sequence ------------------------------------------------

namespace {

struct SlowMembership {
  std::vector<Int> stage_ends;  // M_1 < M_2 < ... < M_K
  // membership test data shared by the lazy enumerator
  Int p, q;
  bool eps_positive = true;

  // stage whose threshold applies to n (1-based); 0 if past the horizon
  unsigned stage_of(const Int& n) const {
    for (std::size_t j = 0; j < stage_ends.size(); ++j)
      if (n <= stage_ends[j]) return static_cast<unsigned>(j + 1);
    return 0;
  }

  bool member(const Int& n) const {
    unsigned st = stage_of(n);
    if (st == 0) return false;
    Int j = (n * p) % q;
    Int scale = pow2(st);  // threshold 2^-st
    Int lhs = j * scale;
    if (lhs < q) return true;
    if (lhs == q) return !eps_positive;
    Int lhs2 = (q - j) * scale;
    if (lhs2 < q) return true;
    if (lhs2 == q) return eps_positive;
    return false;
  }
};

}  // namespace

SlowRigidityResult slow_rigidity_sequence(const ContinuedFraction& cf,
                                          const DensityRule& rule,
                                          unsigned stages) {
  if (stages == 0) throw ConfigError("need at least one stage");
  if (stages > 6)
    throw ResourceError("stage depth capped at 6 (horizons grow doubly fast)");

  SlowRigidityResult out;
  std::vector<Int> Ms;          // checkpoint horizons
  std::vector<Int> stage_count; // count_close(M_j, 2^-j) - count_close(M_{j-1}, 2^-j)
  Int union_count = 0;

  Int prev_M = 0;
  for (unsigned k = 1; k <= stages; ++k) {
    Rat target(1, ipow(4, k));
    Int Nk = rule.threshold_index(target);
    Int M = std::max(std::max(Nk, Int(2 * prev_M)), Int(16));
    Rat thr(1, pow2(k));
    bool half = (thr >= Rat(1, 2));
    Int cnt;
    for (int round = 0;; ++round) {
      // at stage 1 the threshold 1/2 admits every n
      cnt = half ? M : count_close(cf, M, thr);
      if (cnt * pow2(k) >= M) break;
      M *= 2;
      if (round > 200) throw ResourceError("stage horizon search exhausted");
    }
    Int below = half ? prev_M
                     : (prev_M == 0 ? Int(0) : count_close(cf, prev_M, thr));
    stage_count.push_back(cnt - below);
    union_count += cnt - below;
    Ms.push_back(M);

    SlowCheckpoint cp;
    cp.k = k;
    cp.threshold_N = Nk;
    cp.M = M;
    cp.count = union_count;
    cp.density = Rat(union_count, M);
    unsigned bits = 128;
    for (int round = 0; round < 16; ++round) {
      RatIv d = rule.at(M, bits);
      if (cp.density > d.hi) {
        cp.d_upper = d.hi;
        cp.beats_target = true;
        break;
      }
      if (cp.density <= d.lo) {
        cp.d_upper = d.hi;
        cp.beats_target = false;
        break;
      }
      bits *= 2;
    }
    out.checkpoints.push_back(cp);
    prev_M = M;
  }

  // Lazy member enumeration over [1, M_K]: per-n membership against the
  // stage threshold for the range n falls into.
  auto mem = std::make_shared<SlowMembership>();
  mem->stage_ends = Ms;
  {
    Int M_top = Ms.back();
    std::uint64_t k = cf.index_with_q_above(4 * M_top * pow2(stages) * 256);
    auto c = cf.convergent(k);
    mem->p = c.p;
    mem->q = c.q;
    mem->eps_positive = (k % 2 == 0);
  }
  auto cursor = std::make_shared<Int>(0);
  Int M_top = Ms.back();
  out.members = IntSequence::from_generator(
      [mem, cursor, M_top](std::uint64_t) {
        Int n = *cursor;
        for (;;) {
          ++n;
          if (n > M_top)
            throw ResourceError("enumeration past the constructed horizon");
          if (mem->member(n)) break;
        }
        *cursor = n;
        return n;
      },
      "slow-growth rigid returns for " + cf.describe());
  return out;
}

// ---- bounded-growth rigid sequence ---------------------------------------------

GrowthRule GrowthRule::m_log2m() { return GrowthRule(Kind::m_log2m, Int(0)); }
GrowthRule GrowthRule::m_squared() { return GrowthRule(Kind::m_squared, Int(0)); }
GrowthRule GrowthRule::linear(Int slope) {
  if (slope < 1) throw ConfigError("slope must be >= 1");
  return GrowthRule(Kind::linear_slope, std::move(slope));
}

Int GrowthRule::at(const Int& m) const {
  if (m < 1) throw ConfigError("growth rules are evaluated at m >= 1");
  switch (kind_) {
    case Kind::m_log2m: {
      Int c = Int(bit_length(Int(m)));  // ceil(log2(m+1)) for m >= 1
      return m * c;
    }
    case Kind::m_squared:
      return m * m;
    case Kind::linear_slope:
      return slope_ * m;
  }
  throw InternalError("unreachable growth kind");
}

Int GrowthRule::first_at_least(const Int& target) const {
  if (target <= 1) return Int(1);
  switch (kind_) {
    case Kind::m_log2m: {
      // at(m)/m = ceil(log2(m+1)) reaches t first at m = 2^(t-1)
      // (slope threshold form; see the phase-switch rule below)
      Int m = 1;
      while (at(m) < target) m *= 2;
      // binary refine
      Int lo = m / 2 + 1, hi = m;
      while (lo < hi) {
        Int mid = (lo + hi) / 2;
        if (at(mid) >= target) hi = mid; else lo = mid + 1;
      }
      return lo;
    }
    case Kind::m_squared: {
      Int s = sqrt(Int(target));  // floor sqrt
      if (s * s < target) ++s;
      return std::max(s, Int(1));
    }
    case Kind::linear_slope:
      return -floor_div(-target, slope_);  // ceil(target / slope)
  }
  throw InternalError("unreachable growth kind");
}

std::string GrowthRule::describe() const {
  switch (kind_) {
    case Kind::m_log2m: return "m*ceil(log2(m+1))";
    case Kind::m_squared: return "m^2";
    case Kind::linear_slope: return slope_.str() + "*m";
  }
  return "?";
}

namespace {

// least m with psi(m) >= m * slope_target (the per-term slope clears the
// next phase's block length)
Int first_slope_at_least(const GrowthRule& rule, const Int& target) {
  Int m = 1;
  for (int i = 0; i < 4096; ++i) {
    if (rule.at(m) >= m * target) {
      if (m == 1) return m;
      Int lo = m / 2 + 1, hi = m;
      while (lo < hi) {
        Int mid = (lo + hi) / 2;
        if (rule.at(mid) >= mid * target) hi = mid; else lo = mid + 1;
      }
      return lo;
    }
    m *= 2;
  }
  throw ResourceError("growth rule never clears the required slope");
}

struct BoundedEmitState {
  std::vector<Int> switch_at;   // K_L: last m served by phase L (cumulative)
  std::vector<Int> block_len;   // N_L
  std::vector<Int> phase_start; // S_L: blocks of phase L begin after this
  Int emitted = 0;              // m of the last emitted term
  Int block_in_phase = 0;       // next block index within the current phase
  std::size_t phase = 0;        // current phase (0-based)
};

}  // namespace

BoundedGrowthResult bounded_growth_rigidity_sequence(
    const ContinuedFraction& cf, const GrowthRule& rule, unsigned phases) {
  if (phases == 0) throw ConfigError("need at least one phase");
  if (phases > 8) throw ResourceError("phase count capped at 8");

  BoundedGrowthResult out;
  std::vector<Int> N(phases + 2);
  for (unsigned s = 1; s <= phases + 1; ++s) {
    SyndeticBound b = syndeticity_constant(cf, Rat(1, pow2(s)));
    N[s] = b.N;
  }
  out.C = N[1];

  auto st = std::make_shared<BoundedEmitState>();
  Int start = 0;
  Int prev_switch = 0;
  for (unsigned L = 1; L <= phases; ++L) {
    Int K = (L < phases)
                ? first_slope_at_least(rule, N[L + 1])
                : prev_switch + (Int(1) << 20);  // last phase: generous tail
    if (K <= prev_switch) K = prev_switch + 1;
    BoundedGrowthPhase ph;
    ph.L = L;
    ph.N = N[L];
    ph.K = K - prev_switch;
    ph.start = start;
    out.phases.push_back(ph);

    st->switch_at.push_back(K);
    st->block_len.push_back(N[L]);
    st->phase_start.push_back(start);
    start += (K - prev_switch) * N[L];
    prev_switch = K;
  }

  ContinuedFraction cf_copy(cf);
  out.members = IntSequence::from_generator(
      [st, cf_copy](std::uint64_t m) {
        Int mm(static_cast<long long>(m));
        if (mm > st->switch_at.back())
          throw ResourceError("enumeration past the constructed phases");
        while (mm > st->switch_at[st->phase]) {
          ++st->phase;
          st->block_in_phase = 0;
        }
        const Int& NL = st->block_len[st->phase];
        const Int& S = st->phase_start[st->phase];
        Rat thr(1, pow2(static_cast<unsigned>(st->phase) + 2));
        Int lo = S + st->block_in_phase * NL;
        ++st->block_in_phase;
        for (Int n = lo + 1; n <= lo + NL; ++n) {
          if (cf_copy.norm_lt(n, thr)) {
            st->emitted = n;
            return n;
          }
        }
        // the syndetic bound promised a hit in every block of this length
        throw InternalError("syndetic bound violated during emission");
      },
      "bounded-growth rigid returns for " + cf.describe());
  return out;
}

bool BoundedGrowthResult::verify_prefix(const GrowthRule& rule,
                                        std::uint64_t count) const {
  for (std::uint64_t m = 1; m <= count; ++m) {
    if (members.term(m) > C * rule.at(Int(static_cast<long long>(m))))
      return false;
  }
  return true;
}

RatIv norm_sum_along(const ContinuedFraction& cf, const IntSequence& seq,
                     std::uint64_t horizon) {
  RatIv acc(Rat(0));
  for (std::uint64_t m = 1; m <= horizon; ++m) {
    acc = iv_add(acc, cf.norm_mult(seq.term(m)));
    if (m % 64 == 0) acc = iv_round_out(acc, 512);
  }
  return acc;
}

}  // namespace rigidlab
