#include "rigidlab/report.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "rigidlab/errors.hpp"
#include "rigidlab/obstruct.hpp"
#include "rigidlab/odometer.hpp"
#include "rigidlab/rankone.hpp"
#include "rigidlab/rng.hpp"
#include "rigidlab/rotation.hpp"

namespace rigidlab {

// ---- value serialization ----------------------------------------------------

Json j_int(const Int& v) { return Json(to_string(v)); }
Json j_rat(const Rat& v) { return Json(to_string(v)); }

Json j_iv(const RatIv& v) {
  Json j;
  j["lo"] = to_string(v.lo);
  j["hi"] = to_string(v.hi);
  return j;
}

Json j_cx(const CxIv& v) {
  Json j;
  j["re"] = j_iv(v.re);
  j["im"] = j_iv(v.im);
  return j;
}

// ---- config field access ------------------------------------------------------

namespace {

const Json* find_field(const Json& j, const std::string& name) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(name);
  return it == j.end() ? nullptr : &*it;
}

[[noreturn]] void missing(const std::string& name) {
  throw ConfigError("missing field '" + name + "'");
}

Int as_int(const Json& v, const std::string& name) {
  if (v.is_number_integer()) return Int(v.get<long long>());
  if (v.is_number_unsigned()) return Int(v.get<unsigned long long>());
  if (v.is_string()) return parse_int(v.get<std::string>());
  throw ConfigError("field '" + name + "' must be an integer or decimal string");
}

Rat as_rat(const Json& v, const std::string& name) {
  if (v.is_number_integer()) return Rat(v.get<long long>());
  if (v.is_number_unsigned()) return Rat(v.get<unsigned long long>());
  if (v.is_string()) return parse_rat(v.get<std::string>());
  throw ConfigError("field '" + name + "' must be a rational \"p/q\" or integer");
}

Int int_field(const Json& j, const std::string& name) {
  const Json* v = find_field(j, name);
  if (!v) missing(name);
  return as_int(*v, name);
}

Int int_field_or(const Json& j, const std::string& name, const Int& dflt) {
  const Json* v = find_field(j, name);
  return v ? as_int(*v, name) : dflt;
}

Rat rat_field(const Json& j, const std::string& name) {
  const Json* v = find_field(j, name);
  if (!v) missing(name);
  return as_rat(*v, name);
}

Rat rat_field_or(const Json& j, const std::string& name, const Rat& dflt) {
  const Json* v = find_field(j, name);
  return v ? as_rat(*v, name) : dflt;
}

std::uint64_t u64_field_or(const Json& j, const std::string& name,
                           std::uint64_t dflt) {
  const Json* v = find_field(j, name);
  if (!v) return dflt;
  Int n = as_int(*v, name);
  if (n < 0) throw ConfigError("field '" + name + "' must be >= 0");
  if (bit_length(n) > 63) throw ConfigError("field '" + name + "' too large");
  return n.convert_to<std::uint64_t>();
}

std::uint64_t u64_field(const Json& j, const std::string& name) {
  if (!find_field(j, name)) missing(name);
  return u64_field_or(j, name, 0);
}

std::string str_field(const Json& j, const std::string& name) {
  const Json* v = find_field(j, name);
  if (!v) missing(name);
  if (!v->is_string()) throw ConfigError("field '" + name + "' must be a string");
  return v->get<std::string>();
}

std::string str_field_or(const Json& j, const std::string& name,
                         const std::string& dflt) {
  return find_field(j, name) ? str_field(j, name) : dflt;
}

bool bool_field_or(const Json& j, const std::string& name, bool dflt) {
  const Json* v = find_field(j, name);
  if (!v) return dflt;
  if (!v->is_boolean()) throw ConfigError("field '" + name + "' must be a bool");
  return v->get<bool>();
}

std::vector<Int> int_list(const Json& j, const std::string& name) {
  const Json* v = find_field(j, name);
  if (!v) missing(name);
  if (!v->is_array()) throw ConfigError("field '" + name + "' must be an array");
  std::vector<Int> out;
  for (const Json& e : *v) out.push_back(as_int(e, name));
  return out;
}

std::vector<std::uint64_t> u64_list(const Json& j, const std::string& name) {
  std::vector<std::uint64_t> out;
  for (const Int& v : int_list(j, name)) {
    if (v < 0 || bit_length(v) > 63)
      throw ConfigError("field '" + name + "' entries must be small and >= 0");
    out.push_back(v.convert_to<std::uint64_t>());
  }
  return out;
}

ListExtend extend_field(const Json& j, const std::string& name) {
  std::string s = str_field_or(j, name, "repeat");
  if (s == "repeat" || s == "repeat_last") return ListExtend::repeat_last;
  if (s == "cycle") return ListExtend::cycle;
  throw ConfigError("field '" + name + "' must be \"repeat\" or \"cycle\"");
}

}  // namespace

// ---- builders --------------------------------------------------------------------

IntSequence sequence_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("sequence spec must be an object");
  std::string kind = str_field(j, "kind");
  if (kind == "powers") return IntSequence::powers(int_field(j, "base"));
  if (kind == "ratios")
    return IntSequence::integer_ratio_product(int_list(j, "ratios"),
                                              extend_field(j, "extend"));
  if (kind == "polynomial")
    return IntSequence::polynomial(int_list(j, "coeffs"));
  if (kind == "perturbed_powers")
    return IntSequence::perturbed_powers(int_field(j, "base"),
                                         int_list(j, "coeffs"));
  if (kind == "continued_fraction")
    return IntSequence::continued_fraction_denominators(
        int_list(j, "quotients"), extend_field(j, "extend"));
  if (kind == "chacon") return IntSequence::chacon_heights_minus_one();
  if (kind == "explicit") return IntSequence::explicit_terms(int_list(j, "terms"));
  if (kind == "shifted") {
    const Json* of = find_field(j, "of");
    if (!of) missing("of");
    return IntSequence::shifted(sequence_from_json(*of), int_field(j, "offset"));
  }
  if (kind == "union") {
    const Json* parts = find_field(j, "parts");
    if (!parts || !parts->is_array()) missing("parts");
    std::vector<IntSequence> seqs;
    for (const Json& p : *parts) seqs.push_back(sequence_from_json(p));
    return IntSequence::union_of(std::move(seqs));
  }
  if (kind == "recurrence")
    return IntSequence::linear_recurrence(int_list(j, "coeffs"),
                                          int_list(j, "init"));
  throw ConfigError("unknown sequence kind '" + kind + "'");
}

CircleMeasure measure_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("measure spec must be an object");
  std::string kind = str_field(j, "kind");
  if (kind == "atomic") {
    const Json* atoms = find_field(j, "atoms");
    if (!atoms || !atoms->is_array()) missing("atoms");
    AtomicMeasure m;
    for (const Json& a : *atoms) {
      if (!a.is_array() || a.size() != 2)
        throw ConfigError("each atom is a [position, mass] pair");
      m.atoms.emplace_back(as_rat(a[0], "atoms"), as_rat(a[1], "atoms"));
    }
    return m;
  }
  if (kind == "riesz") {
    RieszProduct m;
    if (find_field(j, "xs")) {
      m.positions = RieszProduct::Positions::listed;
      const Json* xs = find_field(j, "xs");
      for (const Json& e : *xs) m.xs.push_back(as_rat(e, "xs"));
    } else {
      m.ratio = int_field_or(j, "ratio", Int(2));
    }
    if (find_field(j, "bs")) {
      m.weights = RieszProduct::Weights::listed;
      const Json* bs = find_field(j, "bs");
      for (const Json& e : *bs) m.bs.push_back(as_rat(e, "bs"));
    }
    return m;
  }
  if (kind == "block") {
    BlockDigitMeasure m;
    m.radixes = int_list(j, "radixes");
    m.extend = extend_field(j, "extend");
    if (const Json* bl = find_field(j, "block_lengths")) {
      if (bl->is_string() && bl->get<std::string>() == "triangular") {
        m.lengths = BlockDigitMeasure::BlockLengths::triangular;
      } else {
        m.lengths = BlockDigitMeasure::BlockLengths::listed;
        m.lens = u64_list(j, "block_lengths");
      }
    }
    if (const Json* ep = find_field(j, "eps")) {
      if (ep->is_string() && ep->get<std::string>() == "harmonic") {
        m.eps_rule = BlockDigitMeasure::EpsRule::harmonic_shift;
      } else {
        m.eps_rule = BlockDigitMeasure::EpsRule::listed;
        for (const Json& e : *ep) m.epss.push_back(as_rat(e, "eps"));
      }
    }
    return m;
  }
  if (kind == "cantor") {
    const Json* sj = find_field(j, "sequence");
    if (!sj) missing("sequence");
    IntSequence seq = sequence_from_json(*sj);
    std::uint64_t depth = u64_field(j, "depth");
    ShrinkRule rule = ShrinkRule::squares;
    std::vector<Int> listed;
    if (const Json* sh = find_field(j, "shrink")) {
      if (sh->is_string()) {
        std::string s = sh->get<std::string>();
        if (s == "squares")
          rule = ShrinkRule::squares;
        else if (s == "linear")
          rule = ShrinkRule::linear;
        else
          throw ConfigError("shrink must be \"squares\", \"linear\" or a list");
      } else {
        rule = ShrinkRule::listed;
        listed = int_list(j, "shrink");
      }
    }
    std::uint64_t start = u64_field_or(j, "start", 0);
    return cantor_support(seq, rule, listed, depth, start).measure;
  }
  throw ConfigError("unknown measure kind '" + kind + "'");
}

// ---- analysis dispatch -------------------------------------------------------------

namespace {

struct Ctx {
  std::uint64_t seed = 0;
  unsigned bits = 128;
  std::uint64_t horizon = 32;
  Rat tolerance = Rat(1, 1000000);
  bool has_seq = false;
  IntSequence seq;
};

IntSequence seq_param(const Json& a, const Ctx& ctx) {
  if (const Json* sj = find_field(a, "sequence")) return sequence_from_json(*sj);
  if (!ctx.has_seq)
    throw ConfigError("no sequence: give a top-level one or a local override");
  return ctx.seq;
}

CircleMeasure measure_param(const Json& a) {
  const Json* mj = find_field(a, "measure");
  if (!mj) missing("measure");
  return measure_from_json(*mj);
}

ContinuedFraction cf_param(const Json& a) {
  if (bool_field_or(a, "golden", false)) return ContinuedFraction::golden();
  if (!find_field(a, "quotients"))
    throw ConfigError("give \"quotients\" or \"golden\": true");
  return ContinuedFraction(int_list(a, "quotients"), extend_field(a, "extend"));
}

Odometer odometer_param(const Json& a) {
  return Odometer(int_list(a, "radixes"), extend_field(a, "extend"));
}

struct HandlerOut {
  std::string check;
  Json data;
};

// -- sequences

HandlerOut h_seq_terms(const Json& a, const Ctx& ctx) {
  IntSequence s = seq_param(a, ctx);
  std::uint64_t lo = u64_field_or(a, "lo", 1);
  std::uint64_t hi = u64_field_or(a, "hi", ctx.horizon);
  Json data;
  data["sequence"] = s.describe();
  Json rows = Json::array();
  std::uint64_t m = lo;
  for (const Int& t : s.terms(lo, hi)) {
    Json r;
    r["m"] = m++;
    r["n"] = j_int(t);
    rows.push_back(r);
  }
  data["rows"] = rows;
  return {"term-enumeration", data};
}

HandlerOut h_seq_sums(const Json& a, const Ctx& ctx) {
  IntSequence s = seq_param(a, ctx);
  std::uint64_t lo = u64_field_or(a, "lo", 1);
  std::uint64_t hi = u64_field_or(a, "hi", std::min<std::uint64_t>(ctx.horizon, lo + 15));
  std::vector<Int> sums = s.finite_sums(lo, hi);
  Json data;
  data["sequence"] = s.describe();
  data["lo"] = lo;
  data["hi"] = hi;
  data["count"] = sums.size();
  Json vals = Json::array();
  for (const Int& v : sums) vals.push_back(to_string(v));
  data["values"] = vals;
  return {"finite-subset-sums", data};
}

HandlerOut h_seq_growth(const Json& a, const Ctx& ctx) {
  IntSequence s = seq_param(a, ctx);
  std::vector<Int> Ns;
  if (find_field(a, "sample_Ns")) {
    Ns = int_list(a, "sample_Ns");
  } else {
    for (Int N = 16; N <= 65536; N *= 4) Ns.push_back(N);
  }
  std::uint64_t tail = u64_field_or(a, "tail_start", 1);
  std::uint64_t hor = u64_field_or(a, "horizon", ctx.horizon);
  Rat C = rat_field_or(a, "sidon_C", Rat(10));
  GrowthReport g = s.growth_report(Ns, tail, hor, C);
  Json data;
  data["sequence"] = s.describe();
  Json rows = Json::array();
  for (const GrowthSample& smp : g.samples) {
    Json r;
    r["N"] = j_int(smp.N);
    r["count"] = j_int(smp.count);
    r["density"] = j_rat(smp.density);
    r["sidon_violated"] = smp.sidon_violated;
    rows.push_back(r);
  }
  data["rows"] = rows;
  data["min_tail_gap"] = j_int(g.min_tail_gap);
  data["min_late_gap"] = j_int(g.min_late_gap);
  data["min_ratio"] = j_rat(g.min_ratio);
  data["max_ratio"] = j_rat(g.max_ratio);
  data["gap_divergence_fails"] = g.gap_divergence_fails;
  return {"growth-and-gap-profile", data};
}

// -- obstructions

HandlerOut h_obstruct_witness(const Json& a, const Ctx& ctx) {
  IntSequence s = seq_param(a, ctx);
  unsigned k_max = static_cast<unsigned>(u64_field_or(a, "k_max", 4));
  Int c_max = int_field_or(a, "c_max", Int(8));
  std::uint64_t window = u64_field_or(a, "window", 16);
  std::uint64_t start = u64_field_or(a, "start", 1);
  auto w = differencing_obstruction(s, k_max, c_max, window, start);
  Json data;
  data["sequence"] = s.describe();
  data["k_max"] = k_max;
  data["c_max"] = j_int(c_max);
  data["window"] = window;
  data["found"] = w.has_value();
  if (w) {
    Json cs = Json::array();
    for (const Int& c : w->coeffs) cs.push_back(to_string(c));
    data["coeffs"] = cs;
    data["d"] = j_int(w->d);
    data["reverified"] = w->reverified;
    data["summary"] = w->describe();
  }
  return {"constant-linear-form-search", data};
}

HandlerOut h_obstruct_weyl(const Json& a, const Ctx& ctx) {
  IntSequence s = seq_param(a, ctx);
  std::uint64_t horizon = u64_field_or(a, "horizon", ctx.horizon);
  unsigned samples = static_cast<unsigned>(u64_field_or(a, "samples", 16));
  Rat threshold = rat_field_or(a, "threshold", Rat(1, 10));
  std::uint64_t seed = u64_field_or(a, "seed", ctx.seed);
  WeylProfile p = weyl_profile(s, horizon, samples, seed, threshold);
  Json data;
  data["sequence"] = s.describe();
  data["horizon"] = p.horizon;
  Json rows = Json::array();
  for (const WeylSample& r : p.rows) {
    Json e;
    e["angle"] = j_rat(r.angle);
    e["abs_avg"] = decimal_string(r.abs_avg, 12);
    rows.push_back(e);
  }
  data["rows"] = rows;
  data["max_abs_avg"] = decimal_string(p.max_abs_avg, 12);
  data["threshold"] = j_rat(p.threshold);
  data["below_threshold"] = p.below_threshold;
  return {"exponential-sum-average", data};
}

HandlerOut h_obstruct_gaps(const Json& a, const Ctx& ctx) {
  IntSequence s = seq_param(a, ctx);
  std::uint64_t start = u64_field_or(a, "start", 1);
  std::uint64_t window = u64_field_or(a, "window", ctx.horizon);
  GapReport g = gap_divergence(s, start, window);
  Json data;
  data["sequence"] = s.describe();
  data["start"] = g.start;
  data["window"] = window;
  data["min_gap"] = j_int(g.min_gap);
  data["violations"] = g.violations.size();
  data["divergence_evidence"] = g.divergence_evidence;
  return {"gap-divergence-scan", data};
}

HandlerOut h_obstruct_sumset(const Json& a, const Ctx& ctx) {
  IntSequence s = seq_param(a, ctx);
  std::vector<Int> coeffs =
      find_field(a, "coeffs") ? int_list(a, "coeffs")
                              : std::vector<Int>{Int(1), Int(-1)};
  Int N = int_field_or(a, "N", Int(1000));
  std::uint64_t ih = u64_field_or(a, "index_horizon", ctx.horizon);
  SumsetDensity d = sumset_density_probe(s, coeffs, N, ih);
  Json data;
  data["sequence"] = s.describe();
  data["N"] = j_int(N);
  data["index_horizon"] = ih;
  data["distinct_nonzero"] = j_int(d.distinct_nonzero);
  data["zero_attained"] = d.zero_attained;
  data["density"] = j_rat(d.density);
  data["tuples"] = d.tuples;
  return {"difference-form-value-density", data};
}

// -- measures

HandlerOut h_measure_fourier(const Json& a, const Ctx& ctx) {
  CircleMeasure mu = measure_param(a);
  Int n = int_field(a, "n");
  std::uint64_t trunc = u64_field_or(a, "trunc", 0);
  FourierValue fv = fourier(mu, n, ctx.bits, trunc);
  Json data;
  data["measure"] = describe(mu);
  data["n"] = j_int(n);
  data["value"] = j_cx(fv.value);
  data["truncated_at"] = fv.truncated_at;
  return {"transform-bracket", data};
}

HandlerOut h_measure_profile(const Json& a, const Ctx& ctx) {
  CircleMeasure mu = measure_param(a);
  IntSequence s = seq_param(a, ctx);
  std::uint64_t m_lo = u64_field_or(a, "m_lo", 1);
  std::uint64_t m_hi = u64_field_or(a, "m_hi", ctx.horizon);
  std::uint64_t trunc = u64_field_or(a, "trunc", 0);
  auto rows = rigidity_gap_profile(mu, s, m_lo, m_hi, ctx.bits, trunc);
  Json data;
  data["measure"] = describe(mu);
  data["sequence"] = s.describe();
  Json jr = Json::array();
  Json plot_rows = Json::array();
  for (const GapRow& r : rows) {
    Json e;
    e["m"] = r.m;
    e["n"] = j_int(r.n);
    e["re_lo"] = j_rat(r.value.re.lo);
    e["re_hi"] = j_rat(r.value.re.hi);
    e["gap_lo"] = j_rat(r.gap_re.lo);
    e["gap_hi"] = j_rat(r.gap_re.hi);
    e["abs_gap_sq_hi"] = j_rat(r.abs_gap_sq.hi);
    jr.push_back(e);
    plot_rows.push_back(Json::array({Json(r.m), Json(to_string(r.n)),
                                     Json(decimal_string(r.gap_re.lo, 12)),
                                     Json(decimal_string(r.gap_re.hi, 12))}));
  }
  data["rows"] = jr;
  Json plot;
  plot["columns"] = Json::array({"m", "n_m", "gap_lower", "gap_upper"});
  plot["rows"] = plot_rows;
  data["plot"] = plot;
  return {"transform-gap-along-sequence", data};
}

HandlerOut h_measure_atoms(const Json& a, const Ctx&) {
  const Json* mj = find_field(a, "measure");
  if (!mj) missing("measure");
  CircleMeasure mu = measure_from_json(*mj);
  const RieszProduct* rp = std::get_if<RieszProduct>(&mu);
  if (!rp) throw ConfigError("atom bounds apply to the product family only");
  std::vector<std::uint64_t> Ks =
      find_field(a, "Ks") ? u64_list(a, "Ks")
                          : std::vector<std::uint64_t>{25, 50, 100, 200};
  auto rows = atom_mass_bounds(*rp, Ks);
  Json data;
  data["measure"] = describe(mu);
  Json jr = Json::array();
  for (const AtomBoundRow& r : rows) {
    Json e;
    e["K"] = r.K;
    e["bound"] = j_rat(r.bound);
    e["bound_dec"] = decimal_string(r.bound, 12);
    jr.push_back(e);
  }
  data["rows"] = jr;
  return {"atom-mass-ceiling", data};
}

HandlerOut h_measure_blocks(const Json& a, const Ctx&) {
  const Json* mj = find_field(a, "measure");
  if (!mj) missing("measure");
  CircleMeasure mu = measure_from_json(*mj);
  const BlockDigitMeasure* bm = std::get_if<BlockDigitMeasure>(&mu);
  if (!bm) throw ConfigError("block events apply to the digit family only");
  std::uint64_t k_max = u64_field_or(a, "k_max", 8);
  std::uint64_t M = u64_field_or(a, "M", 10);
  BlockEventReport rep = block_event_report(*bm, k_max, M);
  Json data;
  data["measure"] = describe(mu);
  Json jr = Json::array();
  for (const BlockEventRow& r : rep.rows) {
    Json e;
    e["k"] = r.k;
    e["N_k"] = r.N_k;
    e["N_k1"] = r.N_k1;
    e["N_k2"] = r.N_k2;
    e["eps_k"] = j_rat(r.eps_k);
    e["eps_k1"] = j_rat(r.eps_k1);
    e["mass"] = j_rat(r.mass);
    e["eps_prefix_sum"] = j_rat(r.eps_prefix_sum);
    e["zero_prefix_mass"] = j_rat(r.zero_prefix_mass);
    jr.push_back(e);
  }
  data["rows"] = jr;
  data["M"] = M;
  data["k_of_M"] = rep.k_of_M;
  data["n_M"] = j_int(rep.n_M);
  data["norm_bound"] = j_rat(rep.norm_bound);
  return {"zero-block-event-masses", data};
}

HandlerOut h_measure_wiener(const Json& a, const Ctx& ctx) {
  CircleMeasure mu = measure_param(a);
  Int N = int_field_or(a, "N", Int(ctx.horizon));
  WienerAverage w = wiener_average(mu, N, ctx.bits);
  Json data;
  data["measure"] = describe(mu);
  data["N"] = j_int(w.N);
  data["average"] = j_iv(w.average);
  data["average_dec"] = decimal_string(w.average.mid(), 12);
  if (w.atomic_target) data["atomic_target"] = j_rat(*w.atomic_target);
  return {"averaged-squared-transform", data};
}

HandlerOut h_measure_sample(const Json& a, const Ctx& ctx) {
  CircleMeasure mu = measure_param(a);
  std::uint64_t count = u64_field_or(a, "count", 16);
  std::uint64_t seed = u64_field_or(a, "seed", ctx.seed);
  auto pts = sample_points(mu, count, seed, ctx.bits);
  Json data;
  data["measure"] = describe(mu);
  data["count"] = count;
  data["seed"] = seed;
  std::uint64_t listed = std::min<std::uint64_t>(count, 1000);
  data["listed"] = listed;
  Json vals = Json::array();
  for (std::uint64_t i = 0; i < listed; ++i) vals.push_back(to_string(pts[i]));
  data["points"] = vals;
  return {"measure-sampling", data};
}

HandlerOut h_measure_cantor_build(const Json& a, const Ctx& ctx) {
  IntSequence s = seq_param(a, ctx);
  std::uint64_t depth = u64_field_or(a, "depth", 4);
  ShrinkRule rule = ShrinkRule::squares;
  std::vector<Int> listed;
  if (const Json* sh = find_field(a, "shrink")) {
    if (sh->is_string()) {
      std::string v = sh->get<std::string>();
      if (v == "squares")
        rule = ShrinkRule::squares;
      else if (v == "linear")
        rule = ShrinkRule::linear;
      else
        throw ConfigError("shrink must be \"squares\", \"linear\" or a list");
    } else {
      rule = ShrinkRule::listed;
      listed = int_list(a, "shrink");
    }
  }
  std::uint64_t start = u64_field_or(a, "start", 0);
  CantorBuildReport rep = cantor_support(s, rule, listed, depth, start);
  Json data;
  data["sequence"] = s.describe();
  data["depth"] = depth;
  data["start"] = rep.start;
  Json lv = Json::array();
  for (const CantorArcLevel& l : rep.measure.levels) {
    Json e;
    e["n"] = j_int(l.n);
    e["h"] = j_int(l.h);
    e["first"] = j_int(l.first);
    e["step"] = j_int(l.step);
    e["count"] = l.count;
    lv.push_back(e);
  }
  data["levels"] = lv;
  Json room = Json::array();
  for (const Rat& r : rep.room) room.push_back(to_string(r));
  data["room"] = room;
  data["shrink_sum"] = j_rat(rep.shrink_sum);
  return {"nested-arc-support-build", data};
}

// -- rank one

RankOneSpec rankone_param(const Json& a, const Ctx& ctx) {
  std::string preset = str_field_or(a, "preset", "chacon");
  if (preset == "chacon") return RankOneSpec::chacon();
  if (preset == "infinite")
    return RankOneSpec::infinite_from_heights(seq_param(a, ctx));
  if (preset == "finite")
    return RankOneSpec::finite_from_heights(seq_param(a, ctx));
  throw ConfigError("preset must be chacon, infinite or finite");
}

HandlerOut h_rankone_build(const Json& a, const Ctx& ctx) {
  RankOneSpec spec = rankone_param(a, ctx);
  std::uint64_t stages = u64_field_or(a, "stages", 8);
  TowerState st = build_tower(spec, stages);
  Json data;
  data["spec"] = spec.describe();
  Json rows = Json::array();
  for (const TowerStageInfo& i : st.info) {
    Json e;
    e["m"] = i.m;
    e["h"] = j_int(i.h);
    e["level_width"] = j_rat(i.level_width);
    e["spacer_mass_added"] = j_rat(i.spacer_mass_added);
    e["total_mass"] = j_rat(i.total_mass);
    e["spacer_fraction"] = j_rat(i.spacer_fraction);
    if (spec.has_preset_rows() && i.m >= 1 && i.m < st.stages) {
      RankOneSpec::PresetRow pr = spec.preset_row(i.m);
      e["q"] = j_int(pr.q);
      e["r"] = j_int(pr.r);
      e["p"] = j_int(pr.p);
      e["s"] = j_int(pr.s);
    }
    rows.push_back(e);
  }
  data["rows"] = rows;
  data["final_height"] = j_int(st.h);
  data["total_mass"] = j_rat(st.total_mass);
  return {"tower-bookkeeping", data};
}

HandlerOut h_rankone_delta(const Json& a, const Ctx& ctx) {
  RankOneSpec spec = rankone_param(a, ctx);
  std::uint64_t m = u64_field_or(a, "m", 3);
  std::vector<Int> levels =
      find_field(a, "levels") ? int_list(a, "levels") : std::vector<Int>{Int(0)};
  Int n = int_field(a, "n");
  Rat tol = rat_field_or(a, "tol", ctx.tolerance);
  DeltaMassBracket b = delta_mass(spec, m, levels, n, tol);
  Json data;
  data["spec"] = spec.describe();
  data["m"] = m;
  data["n"] = j_int(n);
  data["set_mass"] = j_rat(b.set_mass);
  data["one_sided"] = j_iv(b.one_sided);
  data["symmetric"] = j_iv(b.symmetric);
  data["resolved_stage"] = b.resolved_stage;
  return {"level-set-return-mass", data};
}

HandlerOut h_rankone_word(const Json& a, const Ctx&) {
  std::uint64_t k = u64_field_or(a, "k", 5);
  ChaconWord w = chacon_word(k);
  Json data;
  data["k"] = w.k;
  data["length"] = j_int(w.length());
  data["ones"] = j_int(w.ones());
  data["markers"] = j_int(w.markers());
  std::string prefix;
  for (std::size_t i = 0; i < w.symbol.size() && i < 64; ++i)
    prefix += w.symbol[i] ? '1' : '0';
  data["prefix"] = prefix;
  return {"three-column-word", data};
}

HandlerOut h_rankone_shift(const Json& a, const Ctx&) {
  std::uint64_t k = u64_field_or(a, "k", 5);
  std::uint64_t m = u64_field_or(a, "m", 1);
  Int offset = int_field_or(a, "offset", Int(0));
  ChaconShiftCheck c = chacon_marker_shift(k, m, offset);
  Json data;
  data["k"] = c.k;
  data["m"] = c.m;
  data["shift"] = j_int(c.shift);
  data["overlap"] = j_int(c.overlap);
  data["disjoint"] = c.disjoint;
  return {"marker-shift-disjointness", data};
}

// -- rotation

HandlerOut h_rotation_convergents(const Json& a, const Ctx& ctx) {
  ContinuedFraction cf = cf_param(a);
  std::uint64_t count = u64_field_or(a, "count", ctx.horizon);
  Json data;
  data["alpha"] = cf.describe();
  Json rows = Json::array();
  for (std::uint64_t k = 0; k <= count; ++k) {
    auto c = cf.convergent(k);
    Json e;
    e["k"] = k;
    if (k >= 1) e["a"] = j_int(cf.quotient(k));
    e["p"] = j_int(c.p);
    e["q"] = j_int(c.q);
    if (k >= 1) {
      auto prev = cf.convergent(k - 1);
      e["det"] = j_int(c.p * prev.q - prev.p * c.q);
      RatIv qn = cf.q_norm_q(k);
      e["q_norm_lo"] = j_rat(qn.lo);
      e["q_norm_hi"] = j_rat(qn.hi);
    }
    rows.push_back(e);
  }
  data["rows"] = rows;
  return {"convergent-table", data};
}

HandlerOut h_rotation_count(const Json& a, const Ctx&) {
  ContinuedFraction cf = cf_param(a);
  Int M = int_field(a, "M");
  Rat delta = rat_field(a, "delta");
  Int c = count_close(cf, M, delta);
  Json data;
  data["alpha"] = cf.describe();
  data["M"] = j_int(M);
  data["delta"] = j_rat(delta);
  data["count"] = j_int(c);
  data["density"] = j_rat(Rat(c, M));
  return {"near-return-counting", data};
}

HandlerOut h_rotation_syndetic(const Json& a, const Ctx&) {
  ContinuedFraction cf = cf_param(a);
  Rat eps = rat_field(a, "eps");
  SyndeticBound b = syndeticity_constant(cf, eps);
  Json data;
  data["alpha"] = cf.describe();
  data["eps"] = j_rat(eps);
  data["N"] = j_int(b.N);
  data["conv_index"] = b.conv_index;
  data["cycle"] = j_int(b.cycle);
  data["hits"] = j_int(b.hits);
  data["reverified"] = b.reverified;
  return {"return-gap-bound", data};
}

HandlerOut h_rotation_slow(const Json& a, const Ctx&) {
  ContinuedFraction cf = cf_param(a);
  std::string rule_s = str_field_or(a, "rule", "inv_log");
  DensityRule rule = rule_s == "inv_log"    ? DensityRule::inv_log()
                     : rule_s == "inv_sqrt" ? DensityRule::inv_sqrt()
                                            : throw ConfigError(
                                                  "rule must be inv_log or inv_sqrt");
  unsigned stages = static_cast<unsigned>(u64_field_or(a, "stages", 3));
  SlowRigidityResult r = slow_rigidity_sequence(cf, rule, stages);
  Json data;
  data["alpha"] = cf.describe();
  data["rule"] = rule.describe();
  Json rows = Json::array();
  for (const SlowCheckpoint& c : r.checkpoints) {
    Json e;
    e["k"] = c.k;
    e["threshold_N"] = j_int(c.threshold_N);
    e["M"] = j_int(c.M);
    e["count"] = j_int(c.count);
    e["density"] = j_rat(c.density);
    e["d_upper"] = j_rat(c.d_upper);
    e["beats_target"] = c.beats_target;
    rows.push_back(e);
  }
  data["rows"] = rows;
  std::uint64_t emit_terms = u64_field_or(a, "emit_terms", 12);
  Json first = Json::array();
  for (const Int& t : r.members.terms(1, emit_terms)) first.push_back(to_string(t));
  data["first_terms"] = first;
  return {"slow-decay-rigid-sequence", data};
}

HandlerOut h_rotation_bounded(const Json& a, const Ctx&) {
  ContinuedFraction cf = cf_param(a);
  std::string rule_s = str_field_or(a, "rule", "m_log2m");
  GrowthRule rule = rule_s == "m_log2m"     ? GrowthRule::m_log2m()
                    : rule_s == "m_squared" ? GrowthRule::m_squared()
                                            : GrowthRule::linear(parse_int(rule_s));
  unsigned phases = static_cast<unsigned>(u64_field_or(a, "phases", 4));
  std::uint64_t verify_count = u64_field_or(a, "verify_count", 50);
  BoundedGrowthResult r = bounded_growth_rigidity_sequence(cf, rule, phases);
  Json data;
  data["alpha"] = cf.describe();
  data["rule"] = rule.describe();
  data["C"] = j_int(r.C);
  Json rows = Json::array();
  for (const BoundedGrowthPhase& p : r.phases) {
    Json e;
    e["L"] = p.L;
    e["N"] = j_int(p.N);
    e["K"] = j_int(p.K);
    e["start"] = j_int(p.start);
    rows.push_back(e);
  }
  data["rows"] = rows;
  data["verified_prefix"] = r.verify_prefix(rule, verify_count);
  data["verify_count"] = verify_count;
  Json first = Json::array();
  for (const Int& t : r.members.terms(1, std::min<std::uint64_t>(verify_count, 50)))
    first.push_back(to_string(t));
  data["first_terms"] = first;
  return {"growth-capped-rigid-sequence", data};
}

// -- odometer

HandlerOut h_odometer_cylinder(const Json& a, const Ctx&) {
  Odometer odo = odometer_param(a);
  std::uint64_t t0 = u64_field_or(a, "t0", 1);
  Int r = int_field(a, "r");
  Rat d = cylinder_delta(odo, t0, r);
  Json data;
  data["odometer"] = odo.describe();
  data["t0"] = t0;
  data["height"] = j_int(odo.level_count(t0 + 1));
  data["r"] = j_int(r);
  data["delta_mass"] = j_rat(d);
  return {"cylinder-shift-mass", data};
}

HandlerOut h_odometer_cocycle_sum(const Json& a, const Ctx& ctx) {
  Odometer odo = odometer_param(a);
  std::uint64_t terms = u64_field_or(a, "terms", 8);
  OdometerCocycle c = OdometerCocycle::good_function(odo, terms);
  Int n = int_field(a, "n");
  OdometerPoint x;
  if (find_field(a, "x_digits")) x.digits = int_list(a, "x_digits");
  CocycleSumReport rep = cocycle_sum(c, n, x, ctx.bits);
  Json data;
  data["odometer"] = odo.describe();
  data["terms"] = terms;
  data["n"] = j_int(n);
  Json rows = Json::array();
  for (const CocycleSumTerm& t : rep.terms) {
    Json e;
    e["k"] = t.k;
    e["m"] = t.m;
    e["n_m"] = j_int(t.n_m);
    e["residual"] = j_int(t.residual);
    e["start_exponent"] = j_rat(t.start_exponent);
    rows.push_back(e);
  }
  data["rows"] = rows;
  data["value"] = j_cx(rep.value);
  return {"ergodic-sum-bracket", data};
}

HandlerOut h_odometer_norm(const Json& a, const Ctx& ctx) {
  Odometer odo = odometer_param(a);
  std::uint64_t terms = u64_field_or(a, "terms", 40);
  OdometerCocycle c = OdometerCocycle::good_function(odo, terms);
  std::uint64_t m0 = u64_field_or(a, "m0", 5);
  CocycleNormReport rep = cocycle_norm_bound(c, m0, ctx.bits);
  Json data;
  data["odometer"] = odo.describe();
  data["m0"] = rep.m0;
  data["n_m0"] = j_int(rep.n_m0);
  data["norm_sq"] = j_iv(rep.norm_sq);
  data["crude_upper"] = j_rat(rep.crude_upper);
  data["terms_used"] = rep.terms_used;
  data["within_crude"] = rep.within_crude;
  return {"ergodic-sum-norm-bound", data};
}

HandlerOut h_odometer_coboundary(const Json& a, const Ctx&) {
  Odometer odo = odometer_param(a);
  std::uint64_t terms = u64_field_or(a, "terms", 16);
  OdometerCocycle c = OdometerCocycle::good_function(odo, terms);
  std::vector<std::uint64_t> Ks =
      find_field(a, "Ks") ? u64_list(a, "Ks")
                          : std::vector<std::uint64_t>{1, 10, 100, 1000, 10000};
  CoboundarySums s = coboundary_test(c, Ks);
  Json data;
  data["odometer"] = odo.describe();
  Json rows = Json::array();
  for (const auto& [K, v] : s.partials) {
    Json e;
    e["K"] = K;
    e["partial"] = j_rat(v);
    e["partial_dec"] = decimal_string(v, 12);
    rows.push_back(e);
  }
  data["rows"] = rows;
  data["last"] = j_rat(s.last);
  data["diverging"] = s.diverging;
  return {"amplitude-partial-sums", data};
}

HandlerOut h_odometer_revise(const Json& a, const Ctx& ctx) {
  Odometer odo = odometer_param(a);
  Int H = int_field(a, "H");
  std::vector<Int> levels =
      find_field(a, "levels") ? int_list(a, "levels") : std::vector<Int>{Int(0)};
  LevelSet A = make_level_set(H, levels);
  IntSequence seq =
      bool_field_or(a, "use_heights", true) ? odo.heights() : seq_param(a, ctx);
  std::uint64_t horizon = u64_field_or(a, "horizon", ctx.horizon);
  Rat budget = rat_field_or(a, "budget", Rat(1, 100));
  ReviseResult r = nonrecurrent_set_from_rigidity(odo, A, seq, horizon, budget);
  Json data;
  data["odometer"] = odo.describe();
  data["A"] = r.A.describe();
  data["B"] = r.B.describe();
  data["C"] = r.C.describe();
  Json rows = Json::array();
  for (const ReviseStep& st : r.steps) {
    Json e;
    e["m"] = st.m;
    e["n"] = j_int(st.n);
    e["d_mass"] = j_rat(st.d_mass);
    e["selected"] = st.selected;
    rows.push_back(e);
  }
  data["rows"] = rows;
  data["selected_count"] = r.selected.size();
  data["removed_mass"] = j_rat(r.removed_mass);
  data["c_mass"] = j_rat(r.c_mass);
  data["c_nonempty"] = r.c_nonempty;
  data["returns_verified"] = r.returns_verified;
  return {"return-time-set-revision", data};
}

HandlerOut run_one(const Json& a, const Ctx& ctx) {
  std::string kind = str_field(a, "kind");
  using H = HandlerOut (*)(const Json&, const Ctx&);
  static const std::map<std::string, H> table = {
      {"seq.terms", h_seq_terms},
      {"seq.finite_sums", h_seq_sums},
      {"seq.growth", h_seq_growth},
      {"obstruct.witness", h_obstruct_witness},
      {"obstruct.weyl", h_obstruct_weyl},
      {"obstruct.gaps", h_obstruct_gaps},
      {"obstruct.sumset", h_obstruct_sumset},
      {"measure.fourier", h_measure_fourier},
      {"measure.gap_profile", h_measure_profile},
      {"measure.atom_bounds", h_measure_atoms},
      {"measure.block_events", h_measure_blocks},
      {"measure.wiener", h_measure_wiener},
      {"measure.sample", h_measure_sample},
      {"measure.cantor_build", h_measure_cantor_build},
      {"rankone.build", h_rankone_build},
      {"rankone.delta", h_rankone_delta},
      {"rankone.chacon_word", h_rankone_word},
      {"rankone.chacon_shift", h_rankone_shift},
      {"rotation.convergents", h_rotation_convergents},
      {"rotation.count_close", h_rotation_count},
      {"rotation.syndetic", h_rotation_syndetic},
      {"rotation.slow", h_rotation_slow},
      {"rotation.bounded", h_rotation_bounded},
      {"odometer.cylinder", h_odometer_cylinder},
      {"odometer.cocycle_sum", h_odometer_cocycle_sum},
      {"odometer.norm", h_odometer_norm},
      {"odometer.coboundary", h_odometer_coboundary},
      {"odometer.revise", h_odometer_revise},
  };
  auto it = table.find(kind);
  if (it == table.end()) throw ConfigError("unknown analysis kind '" + kind + "'");
  return it->second(a, ctx);
}

}  // namespace

// ---- config / run / emit ------------------------------------------------------------

AnalysisConfig AnalysisConfig::from_string(const std::string& text) {
  try {
    return AnalysisConfig{Json::parse(text)};
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

AnalysisConfig AnalysisConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

Report run(const AnalysisConfig& cfg) {
  const Json& doc = cfg.doc;
  if (!doc.is_object()) throw ConfigError("config root must be an object");

  Ctx ctx;
  ctx.seed = u64_field_or(doc, "seed", 0);
  std::uint64_t bits = u64_field_or(doc, "precision_bits", 128);
  if (bits < 16 || bits > (1u << 20))
    throw ConfigError("precision_bits must be 16..1048576");
  ctx.bits = static_cast<unsigned>(bits);
  ctx.horizon = u64_field_or(doc, "horizon", 32);
  if (ctx.horizon == 0) throw ConfigError("horizon must be positive");
  ctx.tolerance = rat_field_or(doc, "tolerance", Rat(1, 1000000));
  if (ctx.tolerance <= 0) throw ConfigError("tolerance must be positive");
  if (const Json* sj = find_field(doc, "sequence")) {
    ctx.seq = sequence_from_json(*sj);
    ctx.has_seq = true;
  }

  Report rep;
  rep.config_echo = doc;

  const Json* analyses = find_field(doc, "analyses");
  static const Json no_analyses = Json::array();
  if (!analyses) analyses = &no_analyses;
  if (!analyses->is_array()) throw ConfigError("analyses must be an array");

  std::set<std::string> seen;
  auto t_all = std::chrono::steady_clock::now();
  for (const Json& a : *analyses) {
    if (!a.is_object()) throw ConfigError("each analysis must be an object");
    std::string name = str_field(a, "name");
    if (!seen.insert(name).second)
      throw ConfigError("duplicate analysis name '" + name + "'");

    AnalysisResult res;
    res.key = name;
    auto t0 = std::chrono::steady_clock::now();
    try {
      HandlerOut out = run_one(a, ctx);
      res.check = out.check;
      res.data = std::move(out.data);
      res.ok = true;
    } catch (const std::exception& e) {
      res.ok = false;
      res.check = str_field_or(a, "kind", "?");
      res.error = e.what();
    }
    auto t1 = std::chrono::steady_clock::now();
    rep.timings.emplace_back(
        name, std::chrono::duration<double>(t1 - t0).count());
    rep.results.push_back(std::move(res));
  }
  std::sort(rep.results.begin(), rep.results.end(),
            [](const AnalysisResult& x, const AnalysisResult& y) {
              return x.key < y.key;
            });
  std::sort(rep.timings.begin(), rep.timings.end());
  auto t_end = std::chrono::steady_clock::now();
  rep.wall_seconds = std::chrono::duration<double>(t_end - t_all).count();
  return rep;
}

Json Report::to_json() const {
  Json j;
  j["schema_version"] = schema_version;
  j["config"] = config_echo;
  Json rs = Json::array();
  for (const AnalysisResult& r : results) {
    Json e;
    e["name"] = r.key;
    e["check"] = r.check;
    e["ok"] = r.ok;
    if (r.ok)
      e["data"] = r.data;
    else
      e["error"] = r.error;
    rs.push_back(e);
  }
  j["results"] = rs;
  return j;
}

Json Report::meta_json() const {
  Json j;
  j["schema_version"] = schema_version;
  j["wall_seconds"] = wall_seconds;
  Json t;
  for (const auto& [k, v] : timings) t[k] = v;
  j["timings"] = t;
  return j;
}

namespace {

std::string csv_cell(const Json& v) {
  std::string s;
  if (v.is_string())
    s = v.get<std::string>();
  else if (v.is_boolean())
    s = v.get<bool>() ? "true" : "false";
  else if (v.is_number_integer())
    s = std::to_string(v.get<long long>());
  else if (v.is_number_unsigned())
    s = std::to_string(v.get<unsigned long long>());
  else if (v.is_null())
    s = "";
  else
    s = v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += "\"\"";
      else q += c;
    }
    q += "\"";
    return q;
  }
  return s;
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << bytes;
  if (!out) throw ConfigError("write failed for '" + p.string() + "'");
}

std::string rows_to_csv(const Json& rows) {
  // column order: first appearance across all rows
  std::vector<std::string> cols;
  for (const Json& r : rows)
    for (auto it = r.begin(); it != r.end(); ++it)
      if (std::find(cols.begin(), cols.end(), it.key()) == cols.end())
        cols.push_back(it.key());
  std::ostringstream os;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) os << ",";
    os << csv_cell(Json(cols[i]));
  }
  os << "\n";
  for (const Json& r : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) os << ",";
      if (r.contains(cols[i])) os << csv_cell(r.at(cols[i]));
    }
    os << "\n";
  }
  return os.str();
}

std::string plot_to_csv(const Json& plot) {
  std::ostringstream os;
  const Json& cols = plot.at("columns");
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) os << ",";
    os << csv_cell(cols[i]);
  }
  os << "\n";
  for (const Json& row : plot.at("rows")) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ",";
      os << csv_cell(row[i]);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace

void emit(const Report& rep, const std::string& format,
          const std::string& out_dir) {
  if (format != "json" && format != "csv-tables" && format != "plot-csv")
    throw ConfigError("format must be json, csv-tables or plot-csv");
  namespace fs = std::filesystem;
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "'");

  write_file(dir / "report.json", rep.to_json().dump(2) + "\n");
  write_file(dir / "meta.json", rep.meta_json().dump(2) + "\n");

  if (format == "csv-tables") {
    for (const AnalysisResult& r : rep.results) {
      if (!r.ok || !r.data.contains("rows")) continue;
      const Json& rows = r.data.at("rows");
      if (!rows.is_array() || rows.empty()) continue;
      write_file(dir / (r.key + ".csv"), rows_to_csv(rows));
    }
  }
  if (format == "plot-csv") {
    for (const AnalysisResult& r : rep.results) {
      if (!r.ok || !r.data.contains("plot")) continue;
      write_file(dir / (r.key + ".plot.csv"), plot_to_csv(r.data.at("plot")));
    }
  }
}

}  // namespace rigidlab
