#include "rigidlab/measures.hpp"

#include <algorithm>
#include <sstream>

#include "rigidlab/errors.hpp"

namespace rigidlab {

// ---- family accessors --------------------------------------------------------

std::uint64_t RieszProduct::factor_count() const {
  if (positions == Positions::geometric) return 0;
  return xs.size();
}

Rat RieszProduct::x(std::uint64_t k) const {
  if (k == 0) throw ConfigError("factors are 1-indexed");
  if (positions == Positions::geometric) {
    if (ratio < 2) throw ConfigError("position ratio must be >= 2");
    return Rat(1, ipow(ratio, k));
  }
  if (k > xs.size()) throw ResourceError("factor index beyond the listed positions");
  Rat v = xs[static_cast<std::size_t>(k - 1)];
  if (v <= 0 || v >= 1) throw ConfigError("positions must lie in (0, 1)");
  return v;
}

Rat RieszProduct::b(std::uint64_t k) const {
  if (k == 0) throw ConfigError("factors are 1-indexed");
  if (weights == Weights::harmonic) return Rat(1, Int(k + 1));
  if (k > bs.size()) throw ResourceError("factor index beyond the listed weights");
  Rat v = bs[static_cast<std::size_t>(k - 1)];
  if (v <= 0 || v > Rat(1, 2))
    throw ConfigError("weights must lie in (0, 1/2]");
  return v;
}

Int BlockDigitMeasure::radix(std::uint64_t m) const {
  if (m == 0) throw ConfigError("digit positions are 1-indexed");
  if (radixes.empty()) throw ConfigError("need at least one digit size");
  std::size_t i = static_cast<std::size_t>(m - 1);
  Int r = (i < radixes.size())
              ? radixes[i]
              : (extend == ListExtend::repeat_last
                     ? radixes.back()
                     : radixes[i % radixes.size()]);
  if (r < 2) throw ConfigError("digit sizes must be >= 2");
  return r;
}

Int BlockDigitMeasure::n(std::uint64_t m) const {
  Int prod = 1;
  for (std::uint64_t t = 1; t <= m; ++t) prod *= radix(t);
  return prod;
}

std::uint64_t BlockDigitMeasure::block_len(std::uint64_t k) const {
  if (lengths == BlockLengths::triangular) return k + 1;
  if (lens.empty()) throw ConfigError("need at least one block length");
  for (std::size_t i = 0; i + 1 < lens.size(); ++i)
    if (lens[i] >= lens[i + 1])
      throw ConfigError("block lengths must be strictly increasing");
  if (lens[0] == 0) throw ConfigError("block lengths must be positive");
  std::size_t i = static_cast<std::size_t>(k);
  if (i < lens.size()) return lens[i];
  return lens.back() + (i - lens.size() + 1);  // keep growing past the list
}

std::uint64_t BlockDigitMeasure::N(std::uint64_t k) const {
  std::uint64_t acc = 0;
  for (std::uint64_t j = 0; j < k; ++j) acc += block_len(j);
  return acc;
}

Rat BlockDigitMeasure::eps(std::uint64_t k) const {
  if (eps_rule == EpsRule::harmonic_shift) return Rat(1, Int(k + 2));
  if (epss.empty()) throw ConfigError("need at least one block probability");
  std::size_t i = static_cast<std::size_t>(k);
  Rat e = (i < epss.size()) ? epss[i] : epss.back();
  if (e <= 0 || e > Rat(1, 2))
    throw ConfigError("block probabilities must lie in (0, 1/2]");
  return e;
}

Int BlockDigitMeasure::pattern_count(std::uint64_t k) const {
  Int prod = 1;
  for (std::uint64_t m = N(k) + 1; m <= N(k + 1); ++m) prod *= radix(m);
  return prod;
}

std::string describe(const CircleMeasure& mu) {
  struct V {
    std::string operator()(const AtomicMeasure& a) const {
      return std::to_string(a.atoms.size()) + " point masses";
    }
    std::string operator()(const RieszProduct& r) const {
      std::ostringstream os;
      os << "three-point convolution product, ";
      if (r.positions == RieszProduct::Positions::geometric)
        os << "positions " << r.ratio << "^-k";
      else
        os << r.xs.size() << " listed positions";
      return os.str();
    }
    std::string operator()(const BlockDigitMeasure& b) const {
      std::ostringstream os;
      os << "blockwise digit law over radixes(";
      for (std::size_t i = 0; i < b.radixes.size(); ++i) {
        if (i) os << ",";
        os << b.radixes[i];
      }
      os << ")";
      return os.str();
    }
    std::string operator()(const CantorArcMeasure& c) const {
      return "nested arc system, depth " + std::to_string(c.levels.size());
    }
  };
  return std::visit(V{}, mu);
}

// ---- transforms -----------------------------------------------------------------

namespace {

void validate_atoms(const AtomicMeasure& mu) {
  if (mu.atoms.empty()) throw ConfigError("need at least one point mass");
  Rat total = 0;
  for (const auto& [pos, mass] : mu.atoms) {
    if (mass < 0) throw ConfigError("masses are nonnegative");
    if (pos < 0 || pos >= 1) throw ConfigError("positions live on [0, 1)");
    total += mass;
  }
  if (total != 1) throw ConfigError("masses must sum to 1");
}

CxIv cx_exp_minus(const Rat& t, unsigned bits) {
  return e2pi_minus_iv(t, bits);
}

// shared cosine cache so profile/average loops reuse factor values
struct RieszEval {
  const RieszProduct& mu;
  unsigned bits;
  std::map<Rat, RatIv> cache;

  explicit RieszEval(const RieszProduct& m, unsigned b) : mu(m), bits(b) {}

  RatIv cos_at(const Rat& t) {
    Rat key = frac_part(t);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    RatIv v = cos2pi_iv(key, bits);
    cache.emplace(key, v);
    return v;
  }

  // number of factors needed so the dropped tail cannot move the product
  // by more than 2^-(bits+2); only the geometric rule has a tail
  std::uint64_t pick_truncation(const Int& n, std::uint64_t trunc) {
    if (mu.positions == RieszProduct::Positions::listed)
      return mu.xs.size();
    if (mu.ratio < 2) throw ConfigError("position ratio must be >= 2");
    Int an = n < 0 ? Int(-n) : n;
    std::uint64_t K = std::max<std::uint64_t>(trunc, 1);
    Rat budget(1, pow2(bits + 2));
    for (;; K += 4) {
      // dropped factors sit within pi^2 n^2 ratio^-2K / (ratio^2 - 1) of 1
      Rat tail = Rat(987, 100) * Rat(an) * Rat(an) /
                 Rat((ipow(mu.ratio, 2 * K)) * (mu.ratio * mu.ratio - 1));
      if (tail <= budget) return K;
      if (K > 100000000) throw ResourceError("truncation search exhausted");
    }
  }

  Rat tail_radius(const Int& n, std::uint64_t K) const {
    if (mu.positions == RieszProduct::Positions::listed) return Rat(0);
    Int an = n < 0 ? Int(-n) : n;
    return Rat(987, 100) * Rat(an) * Rat(an) /
           Rat((ipow(mu.ratio, 2 * K)) * (mu.ratio * mu.ratio - 1));
  }

  std::pair<RatIv, std::uint64_t> value(const Int& n, std::uint64_t trunc) {
    if (n == 0) return {RatIv(Rat(1)), 0};
    std::uint64_t K = pick_truncation(n, trunc);
    RatIv prod(Rat(1));
    for (std::uint64_t k = 1; k <= K; ++k) {
      Rat w = 2 * mu.a(k) * mu.b(k);
      RatIv c = cos_at(Rat(Rat(n) * mu.x(k)));
      // factor = 1 - w * (1 - cos)
      RatIv f = iv_sub(RatIv(Rat(1)), iv_scale(iv_sub(RatIv(Rat(1)), c), w));
      prod = iv_mul(prod, f);
      if (k % 8 == 0) prod = iv_round_out(prod, 4 * bits);
    }
    Rat T = tail_radius(n, K);
    if (T != 0) prod = iv_mul(prod, RatIv(Rat(1 - T), Rat(1)));
    return {prod, K};
  }
};

FourierValue fourier_atomic(const AtomicMeasure& mu, const Int& n,
                            unsigned bits) {
  validate_atoms(mu);
  CxIv acc(RatIv(Rat(0)), RatIv(Rat(0)));
  for (const auto& [pos, mass] : mu.atoms) {
    Rat t = frac_part(Rat(Rat(n) * pos));
    acc = cx_add(acc, cx_scale(cx_exp_minus(t, bits), mass));
  }
  return {acc, mu.atoms.size()};
}

FourierValue fourier_riesz(const RieszProduct& mu, const Int& n, unsigned bits,
                           std::uint64_t trunc) {
  RieszEval ev(mu, bits + 16);
  auto [iv, K] = ev.value(n, trunc);
  return {CxIv(iv, RatIv(Rat(0))), K};
}

// one block of the digit law; exact rational when the character is trivial
// on the block or on everything before it
CxIv block_factor(const BlockDigitMeasure& mu, std::uint64_t k, const Int& n,
                  unsigned bits) {
  Int n_lo = mu.n(mu.N(k));       // size below the block
  Int n_hi = mu.n(mu.N(k + 1));   // size through the block
  Rat e = mu.eps(k);
  Int P = n_hi / n_lo;
  if (mod_floor(n, n_hi) == 0) return CxIv::one();
  if (mod_floor(n, n_lo) == 0) {
    // all pattern phases cancel: factor = (1 - e) - e / (P - 1)
    Rat v = (1 - e) - e / Rat(P - 1);
    return CxIv(RatIv(v), RatIv(Rat(0)));
  }
  CxIv one = CxIv::one();
  CxIv num = cx_sub(one, cx_exp_minus(frac_part(Rat(n, n_lo)), bits));
  CxIv den = cx_sub(one, cx_exp_minus(frac_part(Rat(n, n_hi)), bits));
  CxIv S = cx_div(num, den);
  // factor = (1 - e) + e (S - 1) / (P - 1)
  return cx_add(CxIv(RatIv(Rat(1 - e)), RatIv(Rat(0))),
                cx_scale(cx_sub(S, one), Rat(e / Rat(P - 1))));
}

FourierValue fourier_block(const BlockDigitMeasure& mu, const Int& n,
                           unsigned bits, std::uint64_t trunc) {
  if (n == 0) return {CxIv::one(), 0};
  Int an = n < 0 ? Int(-n) : n;
  // blocks past K differ from 1 by at most pi |n| eps_k / n(N_k); the sum
  // of those bounds is below 2 pi |n| / n(N_K)
  std::uint64_t K = std::max<std::uint64_t>(trunc, 1);
  Rat budget(1, pow2(bits + 2));
  for (;; ++K) {
    Rat tail = Rat(44 * an, 7 * mu.n(mu.N(K)));
    if (tail <= budget) break;
    if (K > 4096) throw ResourceError("block truncation search exhausted");
  }
  CxIv prod = CxIv::one();
  for (std::uint64_t k = 0; k < K; ++k) {
    prod = cx_mul(prod, block_factor(mu, k, n, bits + 16));
    prod = cx_round_out(prod, 4 * bits);
  }
  Rat T(44 * an, 7 * mu.n(mu.N(K)));
  CxIv tail_box(RatIv(Rat(1 - T), Rat(1 + T)), RatIv(Rat(-T), Rat(T)));
  return {cx_mul(prod, tail_box), K};
}

FourierValue fourier_cantor(const CantorArcMeasure& mu, const Int& n,
                            unsigned bits) {
  if (mu.levels.empty()) throw ConfigError("arc system has no levels");
  if (n == 0) return {CxIv::one(), mu.levels.size()};
  CxIv prod = CxIv::one();
  for (std::size_t i = 0; i < mu.levels.size(); ++i) {
    const CantorArcLevel& lv = mu.levels[i];
    if (lv.count == 0) throw ConfigError("empty offset family");
    // (1/count) sum_t e(-n (first + t step) / n_i), geometric in t
    Rat unit(1, lv.n);
    Rat ts = frac_part(Rat(Rat(n) * Rat(lv.step) * unit));
    CxIv rot = cx_exp_minus(frac_part(Rat(Rat(n) * Rat(lv.first) * unit)), bits);
    CxIv avg;
    if (ts == 0) {
      avg = rot;  // all offsets share the phase
    } else {
      CxIv one = CxIv::one();
      Rat tc = frac_part(Rat(Rat(n) * Rat(lv.step) * Rat(Int(lv.count)) * unit));
      CxIv num = cx_sub(one, cx_exp_minus(tc, bits));
      CxIv den = cx_sub(one, cx_exp_minus(ts, bits));
      avg = cx_scale(cx_mul(rot, cx_div(num, den)), Rat(1, Int(lv.count)));
    }
    prod = cx_mul(prod, avg);
    prod = cx_round_out(prod, 4 * bits);
  }
  // uniform leaf arc of width w: multiply by sin(pi n w) / (pi n w)
  const CantorArcLevel& leaf = mu.levels.back();
  Rat w(1, leaf.n * leaf.h);
  Rat nw = Rat(n) * w;
  RatIv s = sin2pi_iv(frac_part(Rat(nw / 2)), bits);
  RatIv denom = iv_mul(pi_iv(bits), RatIv(nw));
  prod = cx_mul(prod, CxIv(iv_div(s, denom), RatIv(Rat(0))));
  return {prod, mu.levels.size()};
}

}  // namespace

FourierValue fourier(const CircleMeasure& mu, const Int& n, unsigned bits,
                     std::uint64_t trunc) {
  if (bits < 16 || bits > 1u << 20)
    throw ConfigError("precision must be 16..1048576 bits");
  struct V {
    const Int& n;
    unsigned bits;
    std::uint64_t trunc;
    FourierValue operator()(const AtomicMeasure& m) const {
      return fourier_atomic(m, n, bits);
    }
    FourierValue operator()(const RieszProduct& m) const {
      return fourier_riesz(m, n, bits, trunc);
    }
    FourierValue operator()(const BlockDigitMeasure& m) const {
      return fourier_block(m, n, bits, trunc);
    }
    FourierValue operator()(const CantorArcMeasure& m) const {
      return fourier_cantor(m, n, bits);
    }
  };
  return std::visit(V{n, bits, trunc}, mu);
}

std::vector<GapRow> rigidity_gap_profile(const CircleMeasure& mu,
                                         const IntSequence& seq,
                                         std::uint64_t m_lo, std::uint64_t m_hi,
                                         unsigned bits, std::uint64_t trunc) {
  if (m_lo == 0 || m_hi < m_lo) throw ConfigError("bad profile index range");
  std::vector<GapRow> rows;
  for (std::uint64_t m = m_lo; m <= m_hi; ++m) {
    GapRow row;
    row.m = m;
    row.n = seq.term(m);
    FourierValue fv = fourier(mu, row.n, bits, trunc);
    row.value = fv.value;
    row.gap_re = iv_sub(RatIv(Rat(1)), fv.value.re);
    row.abs_gap_sq = cx_abs_sq(cx_sub(CxIv::one(), fv.value));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<AtomBoundRow> atom_mass_bounds(
    const RieszProduct& mu, const std::vector<std::uint64_t>& Ks) {
  if (Ks.empty()) throw ConfigError("need at least one truncation index");
  std::vector<std::uint64_t> sorted = Ks;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == 0) throw ConfigError("truncation indices start at 1");
  std::vector<AtomBoundRow> rows;
  Rat prod = 1;
  std::uint64_t k = 0;
  for (std::uint64_t K : sorted) {
    while (k < K) {
      ++k;
      prod *= 1 - 2 * mu.a(k) * mu.b(k);
    }
    rows.push_back({K, Rat(3 * prod)});
  }
  return rows;
}

BlockEventReport block_event_report(const BlockDigitMeasure& mu,
                                    std::uint64_t k_max, std::uint64_t M) {
  if (M == 0) throw ConfigError("digit horizon must be >= 1");
  BlockEventReport out;
  Rat eps_sum = 0, zero_mass = 1;
  for (std::uint64_t k = 0; k <= k_max; ++k) {
    BlockEventRow row;
    row.k = k;
    row.N_k = mu.N(k);
    row.N_k1 = mu.N(k + 1);
    row.N_k2 = mu.N(k + 2);
    row.eps_k = mu.eps(k);
    row.eps_k1 = mu.eps(k + 1);
    row.mass = (1 - row.eps_k) * (1 - row.eps_k1);
    eps_sum += row.eps_k;
    zero_mass *= 1 - row.eps_k;
    row.eps_prefix_sum = eps_sum;
    row.zero_prefix_mass = zero_mass;
    out.rows.push_back(row);
  }
  // block containing digit position M
  std::uint64_t k = 0;
  while (mu.N(k + 1) < M) {
    ++k;
    if (k > 1000000) throw ResourceError("block scan budget exhausted");
  }
  out.k_of_M = k;
  out.n_M = mu.n(M);
  out.norm_bound = Rat(2 * out.n_M, mu.n(mu.N(k + 2)));
  return out;
}

WienerAverage wiener_average(const CircleMeasure& mu, const Int& N,
                             unsigned bits) {
  if (N < 1) throw ConfigError("averaging range must be >= 1");
  if (N > (Int(1) << 22)) throw ResourceError("averaging range budget exhausted");
  std::uint64_t Nu = N.convert_to<std::uint64_t>();

  WienerAverage out;
  out.N = N;
  RatIv acc(Rat(1));  // |transform(0)|^2 = 1 for a probability measure

  if (const RieszProduct* rp = std::get_if<RieszProduct>(&mu)) {
    RieszEval ev(*rp, bits + 16);
    for (std::uint64_t n = 1; n <= Nu; ++n) {
      auto [iv, K] = ev.value(Int(n), 0);
      (void)K;
      RatIv sq = iv_mul(iv, iv);
      if (iv.lo <= 0 && iv.hi >= 0) sq.lo = 0;  // tight square across 0
      acc = iv_add(acc, iv_scale(sq, Rat(2)));
      if (n % 32 == 0) acc = iv_round_out(acc, 4 * bits);
    }
  } else {
    for (std::uint64_t n = 1; n <= Nu; ++n) {
      FourierValue fv = fourier(mu, Int(n), bits);
      acc = iv_add(acc, iv_scale(cx_abs_sq(fv.value), Rat(2)));
      if (n % 32 == 0) acc = iv_round_out(acc, 4 * bits);
    }
  }
  out.average = iv_scale(acc, Rat(1, 2 * N + 1));
  if (const AtomicMeasure* am = std::get_if<AtomicMeasure>(&mu)) {
    Rat t = 0;
    for (const auto& [pos, mass] : am->atoms) t += mass * mass;
    out.atomic_target = t;
  }
  return out;
}

// ---- sampling --------------------------------------------------------------------

namespace {

Rat unit_draw(DetRng& rng, unsigned bits) {
  return Rat(rng.random_bits(bits), pow2(bits));
}

Rat sample_atomic(const AtomicMeasure& mu, DetRng& rng) {
  Rat u = unit_draw(rng, 96);
  Rat acc = 0;
  for (const auto& [pos, mass] : mu.atoms) {
    acc += mass;
    if (u < acc) return pos;
  }
  return mu.atoms.back().first;
}

Rat sample_riesz(const RieszProduct& mu, DetRng& rng, unsigned bits) {
  std::uint64_t K;
  if (mu.positions == RieszProduct::Positions::listed) {
    K = mu.xs.size();
  } else {
    // truncation shifts the point by at most sum_{k>K} x_k < 2^-(bits+2)
    if (mu.ratio < 2) throw ConfigError("position ratio must be >= 2");
    K = 1;
    Rat budget(1, pow2(bits + 2));
    while (Rat(mu.x(K)) * Rat(mu.ratio, mu.ratio - 1) > budget) ++K;
  }
  Rat x = 0;
  for (std::uint64_t k = 1; k <= K; ++k) {
    Rat w = 2 * mu.a(k) * mu.b(k);
    Rat u = unit_draw(rng, 96);
    if (u < w) {
      bool plus = (rng.below(2) == 0);
      x += plus ? mu.x(k) : Rat(-mu.x(k));
    }
  }
  return frac_part(x);
}

std::vector<Int> draw_block_digits(const BlockDigitMeasure& mu, DetRng& rng,
                                   std::uint64_t digit_horizon) {
  std::vector<Int> digits;  // 1-indexed positions stored from index 0
  std::uint64_t k = 0;
  while (digits.size() < digit_horizon) {
    std::uint64_t len = mu.block_len(k);
    Rat e = mu.eps(k);
    Rat u = unit_draw(rng, 96);
    if (u < 1 - e) {
      for (std::uint64_t i = 0; i < len; ++i) digits.push_back(Int(0));
    } else {
      Int P = mu.pattern_count(k);
      Int pat = rng.below_big(P - 1) + 1;  // uniform nonzero pattern
      std::uint64_t base = mu.N(k);
      for (std::uint64_t i = 1; i <= len; ++i) {
        Int a = mu.radix(base + i);
        digits.push_back(pat % a);
        pat /= a;
      }
    }
    ++k;
    if (k > 1000000) throw ResourceError("block sampling budget exhausted");
  }
  digits.resize(digit_horizon);
  return digits;
}

Rat sample_block(const BlockDigitMeasure& mu, DetRng& rng, unsigned bits) {
  // enough digits that the dropped tail is below 2^-(bits+4)
  std::uint64_t horizon = 1;
  while (mu.n(horizon) < pow2(bits + 4)) {
    ++horizon;
    if (horizon > 100000) throw ResourceError("digit horizon budget exhausted");
  }
  std::vector<Int> digits = draw_block_digits(mu, rng, horizon);
  Rat x = 0;
  for (std::uint64_t m = 1; m <= horizon; ++m)
    x += Rat(digits[m - 1], mu.n(m));
  return x;
}

Rat sample_cantor(const CantorArcMeasure& mu, DetRng& rng, unsigned bits) {
  if (mu.levels.empty()) throw ConfigError("arc system has no levels");
  Rat center = 0;
  for (const CantorArcLevel& lv : mu.levels) {
    Int t = rng.below_big(Int(lv.count));
    center += Rat(lv.first + t * lv.step, lv.n);
  }
  const CantorArcLevel& leaf = mu.levels.back();
  Rat w(1, leaf.n * leaf.h);
  Rat u = unit_draw(rng, bits + 8) - Rat(1, 2);
  return frac_part(Rat(center + u * w));
}

}  // namespace

std::vector<Rat> sample_points(const CircleMeasure& mu, std::uint64_t count,
                               std::uint64_t seed, unsigned bits) {
  if (count == 0) throw ConfigError("need a positive sample count");
  if (count > 10000000) throw ResourceError("sample budget exhausted");
  DetRng rng(seed);
  std::vector<Rat> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    struct V {
      DetRng& rng;
      unsigned bits;
      Rat operator()(const AtomicMeasure& m) const {
        validate_atoms(m);
        return sample_atomic(m, rng);
      }
      Rat operator()(const RieszProduct& m) const {
        return sample_riesz(m, rng, bits);
      }
      Rat operator()(const BlockDigitMeasure& m) const {
        return sample_block(m, rng, bits);
      }
      Rat operator()(const CantorArcMeasure& m) const {
        return sample_cantor(m, rng, bits);
      }
    };
    out.push_back(std::visit(V{rng, bits}, mu));
  }
  return out;
}

std::vector<std::vector<Int>> sample_block_digits(const BlockDigitMeasure& mu,
                                                  std::uint64_t count,
                                                  std::uint64_t seed,
                                                  std::uint64_t digit_horizon) {
  if (count == 0) throw ConfigError("need a positive sample count");
  if (digit_horizon == 0) throw ConfigError("digit horizon must be >= 1");
  if (count > 10000000) throw ResourceError("sample budget exhausted");
  DetRng rng(seed);
  std::vector<std::vector<Int>> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i)
    out.push_back(draw_block_digits(mu, rng, digit_horizon));
  return out;
}

// ---- arc-system construction --------------------------------------------------------

CantorBuildReport cantor_support(const IntSequence& seq, ShrinkRule rule,
                                 const std::vector<Int>& listed_h,
                                 std::uint64_t depth, std::uint64_t start) {
  if (depth == 0) throw ConfigError("need at least one level");
  if (depth > 64) throw ResourceError("depth budget exhausted");
  auto h_of = [&](std::uint64_t m) -> Int {
    Int v;
    switch (rule) {
      case ShrinkRule::squares:
        v = Int(m) * Int(m);
        break;
      case ShrinkRule::linear:
        v = Int(m);
        break;
      case ShrinkRule::listed:
        if (m > listed_h.size())
          throw ConfigError("shrink list shorter than the deepest level used");
        v = listed_h[static_cast<std::size_t>(m - 1)];
        break;
    }
    if (v < 1) throw ConfigError("shrink factors must be >= 1");
    return v;
  };
  for (std::size_t i = 0; rule == ShrinkRule::listed && i + 1 < listed_h.size();
       ++i)
    if (listed_h[i] > listed_h[i + 1])
      throw ConfigError("shrink factors must be non-decreasing");

  // room condition 1/h_m >= 10 n_m / n_{m+1} on every built transition;
  // returns the first failing level, or 0 when the window works
  auto fails_at = [&](std::uint64_t s) -> std::uint64_t {
    for (std::uint64_t m = s; m + 1 <= s + depth - 1; ++m) {
      Int nm = seq.term(m), nm1 = seq.term(m + 1);
      if (nm1 % nm != 0)
        throw ConfigError("consecutive terms must have integer ratio at level " +
                          std::to_string(m));
      if (nm1 < 10 * nm * h_of(m)) return m;
    }
    return 0;
  };

  std::uint64_t s = start;
  if (s == 0) {
    std::uint64_t first_bad = 0;
    for (s = 1; s <= 256; ++s) {
      std::uint64_t bad = fails_at(s);
      if (bad == 0) break;
      if (first_bad == 0) first_bad = bad;
    }
    if (s > 256)
      throw ConfigError("arcs too wide for the next level at level " +
                        std::to_string(first_bad) +
                        "; no feasible starting level up to 256");
  } else {
    std::uint64_t bad = fails_at(s);
    if (bad)
      throw ConfigError("arcs too wide for the next level at level " +
                        std::to_string(bad));
  }

  CantorBuildReport out;
  out.start = s;
  out.shrink_sum = 0;

  // n[i], h[i] for build levels i = 1..depth at sequence indices s+i-1
  std::vector<Int> n(depth + 1), h(depth + 1);
  for (std::uint64_t i = 1; i <= depth; ++i) {
    n[i] = seq.term(s + i - 1);
    h[i] = h_of(s + i - 1);
    out.shrink_sum += Rat(1, h[i]);
  }
  for (std::uint64_t i = 1; i + 1 <= depth; ++i)
    out.room.push_back(Rat(n[i + 1], n[i] * h[i]));

  // root level: every residue
  {
    CantorArcLevel lv;
    lv.n = n[1];
    lv.h = h[1];
    lv.first = 0;
    lv.step = 1;
    lv.count = n[1].convert_to<std::uint64_t>();
    out.measure.levels.push_back(lv);
  }
  for (std::uint64_t m = 2; m <= depth; ++m) {
    Rat w_parent(1, n[m - 1] * h[m - 1]);
    Rat w_child(1, n[m] * h[m]);
    // largest |offset| keeping the child arc inside the parent arc
    Rat span = Rat(n[m]) * (w_parent - w_child) / 2;
    Int s = floor_div(numerator(span), denominator(span));
    if (s < 1)
      throw ConfigError("no room for two children at level " +
                        std::to_string(m));
    // keep about one child per 1/n_m step density prescribed by the rule
    Int target = n[m] / (n[m - 1] * h[m - 1]);
    if (target < 2) target = 2;
    Int c = std::min(Int(2 * s + 1), target);
    if (c > 2 && c % 2 == 0) c -= 1;  // symmetric family around the center
    CantorArcLevel lv;
    lv.n = n[m];
    lv.h = h[m];
    if (c == 2) {
      lv.first = -s;
      lv.step = 2 * s;
      lv.count = 2;
    } else {
      Int step = (2 * s) / (c - 1);
      if (step < 1) step = 1;
      lv.step = step;
      lv.first = -((c - 1) / 2) * step;
      lv.count = c.convert_to<std::uint64_t>();
    }
    out.measure.levels.push_back(lv);
  }
  return out;
}

}  // namespace rigidlab
