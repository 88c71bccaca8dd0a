#include "rigidlab/obstruct.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "rigidlab/errors.hpp"
#include "rigidlab/rng.hpp"

namespace rigidlab {

std::string LinearFormWitness::describe() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (i) os << ",";
    os << coeffs[i];
  }
  os << ") -> " << d << " on [" << window_start << ", "
     << window_start + window_len << ")";
  return os.str();
}

namespace {

// Evaluates the form at position m using cached terms (0-based vector that
// holds terms start..start+need-1 at offsets 0..need-1).
Int eval_form(const std::vector<Int>& terms, std::uint64_t offset,
              const std::vector<Int>& c) {
  Int acc = 0;
  for (std::size_t i = 0; i < c.size(); ++i) acc += c[i] * terms[offset + i];
  return acc;
}

// Checks constancy of the form over the window; returns the constant if it
// is the same nonzero value everywhere.
std::optional<Int> constant_on_window(const std::vector<Int>& terms,
                                      std::uint64_t window,
                                      const std::vector<Int>& c) {
  Int d0 = eval_form(terms, 0, c);
  if (d0 == 0) return std::nullopt;
  for (std::uint64_t m = 1; m < window; ++m) {
    if (eval_form(terms, m, c) != d0) return std::nullopt;
  }
  return d0;
}

// Walks coefficient vectors of length k with entries in [-cap, cap] in
// lexicographic order, keeping only those whose max |entry| equals cap and
// whose first and last entries are nonzero. Calls fn on each; stops early
// if fn returns true.
bool for_each_vector(unsigned k, long cap,
                     const std::function<bool(const std::vector<Int>&)>& fn) {
  std::vector<long> v(k, -cap);
  std::vector<Int> c(k);
  for (;;) {
    bool max_ok = false;
    for (unsigned i = 0; i < k; ++i)
      if (v[i] == cap || v[i] == -cap) max_ok = true;
    if (max_ok && v[0] != 0 && v[k - 1] != 0) {
      for (unsigned i = 0; i < k; ++i) c[i] = v[i];
      if (fn(c)) return true;
    }
    unsigned pos = k;
    while (pos > 0) {
      if (v[pos - 1] < cap) {
        ++v[pos - 1];
        break;
      }
      v[pos - 1] = -cap;
      --pos;
    }
    if (pos == 0) return false;
  }
}

}  // namespace

std::optional<LinearFormWitness> differencing_obstruction(
    const IntSequence& seq, unsigned k_max, const Int& c_max,
    std::uint64_t window, std::uint64_t start) {
  if (k_max == 0 || k_max > 8) throw ConfigError("form length must be 1..8");
  if (c_max < 1 || c_max > 64)
    throw ConfigError("coefficient cap must be 1..64");
  if (window < 4) throw ConfigError("window must cover at least 4 positions");
  const long cap_max = static_cast<long>(c_max);

  std::optional<LinearFormWitness> found;
  for (unsigned k = 1; k <= k_max && !found; ++k) {
    // Terms for the search window plus the re-verification stretch.
    std::vector<Int> terms =
        seq.terms(start, start + window + 2 * window + k - 1);
    for (long cap = 1; cap <= cap_max && !found; ++cap) {
      for_each_vector(k, cap, [&](const std::vector<Int>& c) {
        auto d = constant_on_window(terms, window, c);
        if (!d) return false;
        LinearFormWitness w;
        w.coeffs = c;
        w.d = *d;
        if (w.d < 0) {
          for (auto& ci : w.coeffs) ci = -ci;
          w.d = -w.d;
        }
        w.window_start = start;
        w.window_len = window;
        // Extend the check across twice the window again; a genuine
        // differencing identity persists, a coincidence usually will not.
        w.reverified = true;
        for (std::uint64_t m = window; m < 3 * window; ++m) {
          if (eval_form(terms, m, w.coeffs) != w.d) {
            w.reverified = false;
            break;
          }
        }
        found = w;
        return true;
      });
    }
  }
  return found;
}

bool verify_witness(const IntSequence& seq, const LinearFormWitness& w,
                    std::uint64_t start, std::uint64_t count) {
  if (w.coeffs.empty()) return false;
  std::vector<Int> terms = seq.terms(start, start + count + w.coeffs.size() - 1);
  for (std::uint64_t m = 0; m < count; ++m) {
    if (eval_form(terms, m, w.coeffs) != w.d) return false;
  }
  return true;
}

WeylProfile weyl_profile(const IntSequence& seq, std::uint64_t horizon,
                         unsigned samples, std::uint64_t seed,
                         const Rat& threshold) {
  if (horizon == 0) throw ConfigError("horizon must be positive");
  if (samples == 0) throw ConfigError("need at least one sample");
  WeylProfile out;
  out.horizon = horizon;
  out.threshold = threshold;
  out.max_abs_avg = 0;

  std::vector<Int> terms = seq.terms(1, horizon + 1);
  const unsigned fbits =
      static_cast<unsigned>(bit_length(terms.back())) + 64;
  const unsigned wbits = 64;  // working precision for the trig midpoints
  DetRng rng(seed);
  for (unsigned s = 0; s < samples; ++s) {
    FixedAngle x = rng.random_angle(fbits);
    Rat re = 0, im = 0;
    for (const Int& n : terms) {
      Rat t = x.times_int_mod1(n).to_rat();
      re += cos2pi_iv(t, wbits).mid();
      im += sin2pi_iv(t, wbits).mid();
    }
    re /= horizon;
    im /= horizon;
    // |A| is reported through a rational mid-rule square root.
    Rat sq = re * re + im * im;
    RatIv abs_iv = sqrt_iv(sq, 80);
    WeylSample row;
    row.angle = x.to_rat();
    row.abs_avg = abs_iv.mid();
    if (row.abs_avg > out.max_abs_avg) out.max_abs_avg = row.abs_avg;
    out.rows.push_back(std::move(row));
  }
  out.below_threshold = out.max_abs_avg < threshold;
  return out;
}

AbsNormSums abs_norm_partial_sum(const IntSequence& seq, const Rat& x,
                                 std::uint64_t horizon) {
  if (horizon == 0) throw ConfigError("horizon must be positive");
  AbsNormSums out;
  out.total = 0;
  out.error_bound = 0;
  out.partial.reserve(horizon);
  for (std::uint64_t m = 1; m <= horizon; ++m) {
    out.total += norm_dist(Rat(seq.term(m) * x));
    out.partial.push_back(out.total);
  }
  return out;
}

AbsNormSums abs_norm_partial_sum(const IntSequence& seq, const FixedAngle& x,
                                 std::uint64_t horizon) {
  if (horizon == 0) throw ConfigError("horizon must be positive");
  Int n_top = seq.term(horizon);
  const unsigned needed = static_cast<unsigned>(bit_length(n_top)) + 64;
  if (x.frac_bits() < needed) {
    std::ostringstream os;
    os << "angle carries " << x.frac_bits() << " fractional bits, need >= "
       << needed << " for horizon " << horizon;
    throw PrecisionError(os.str());
  }
  AbsNormSums out;
  out.total = 0;
  out.partial.reserve(horizon);
  // Worst case each ||n_m x|| is off by n_m * 2^-F from the angle the
  // caller had in mind; the bound accumulates those.
  Rat err = 0;
  Rat scale = Rat(1, pow2(x.frac_bits()));
  for (std::uint64_t m = 1; m <= horizon; ++m) {
    Int n = seq.term(m);
    out.total += x.times_int_mod1(n).norm_dist();
    err += Rat(n) * scale;
    out.partial.push_back(out.total);
  }
  out.error_bound = err;
  return out;
}

GapReport gap_divergence(const IntSequence& seq, std::uint64_t start,
                         std::uint64_t window) {
  if (window < 2) throw ConfigError("window must cover at least 2 gaps");
  GapReport out;
  out.start = start;
  std::vector<Int> terms = seq.terms(start, start + window + 1);
  Int running_min = 0;
  bool have_min = false;
  for (std::uint64_t i = 0; i < window; ++i) {
    Int g = terms[i + 1] - terms[i];
    out.gaps.push_back(g);
    if (have_min && g <= running_min) out.violations.push_back(start + i);
    if (!have_min || g < running_min) {
      running_min = g;
      have_min = true;
    }
  }
  out.min_gap = *std::min_element(out.gaps.begin(), out.gaps.end());
  out.divergence_evidence = true;
  for (std::uint64_t v : out.violations) {
    if (v - start >= window / 2) out.divergence_evidence = false;
  }
  return out;
}

SumsetDensity sumset_density_probe(const IntSequence& seq,
                                   const std::vector<Int>& coeffs,
                                   const Int& N, std::uint64_t index_horizon,
                                   std::uint64_t budget) {
  if (coeffs.empty() || coeffs.size() > 3)
    throw ConfigError("between 1 and 3 coefficients");
  if (N < 1) throw ConfigError("range bound must be positive");
  if (index_horizon == 0) throw ConfigError("index horizon must be positive");
  const std::size_t L = coeffs.size();
  double tuples_est = 1;
  for (std::size_t l = 0; l < L; ++l)
    tuples_est *= static_cast<double>(index_horizon);
  if (tuples_est > static_cast<double>(budget)) {
    std::ostringstream os;
    os << "tuple count " << tuples_est << " exceeds budget " << budget;
    throw ResourceError(os.str());
  }

  std::vector<Int> terms = seq.terms(1, index_horizon + 1);
  SumsetDensity out;
  std::set<Int> seen;
  std::vector<std::uint64_t> idx(L, 0);
  std::uint64_t tuples = 0;
  for (;;) {
    Int v = 0;
    for (std::size_t l = 0; l < L; ++l) v += coeffs[l] * terms[idx[l]];
    ++tuples;
    if (v == 0) {
      out.zero_attained = true;
    } else if (v >= -N && v <= N) {
      seen.insert(v);
    }
    std::size_t pos = L;
    while (pos > 0) {
      if (idx[pos - 1] + 1 < index_horizon) {
        ++idx[pos - 1];
        break;
      }
      idx[pos - 1] = 0;
      --pos;
    }
    if (pos == 0) break;
  }
  out.tuples = tuples;
  out.distinct_nonzero = Int(seen.size());
  out.density = Rat(out.distinct_nonzero, 2 * N + 1);
  return out;
}

}  // namespace rigidlab
