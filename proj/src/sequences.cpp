#include "rigidlab/sequences.hpp"

#include <algorithm>
#include <mutex>
#include <set>
#include <sstream>

namespace rigidlab {

namespace detail {

class SeqCore {
 public:
  virtual ~SeqCore() = default;

  Int term(std::uint64_t m) {
    if (m == 0) throw ConfigError("sequence indices are 1-based");
    std::lock_guard<std::mutex> lock(mu_);
    while (memo_.size() < m) {
      std::uint64_t next = memo_.size() + 1;
      Int t = gen(next);
      if (t < 1)
        throw ConfigError(describe() + ": term " + std::to_string(next) +
                          " is not positive");
      if (next >= 2) {
        const Int& prev = memo_.back();
        bool ok = t > prev || (t == prev && next == 2 && allow_initial_dup_);
        if (!ok)
          throw ConfigError(describe() + ": not strictly increasing at index " +
                            std::to_string(next));
      }
      memo_.push_back(std::move(t));
    }
    return memo_[m - 1];
  }

  virtual std::string describe() const = 0;

 protected:
  // compute term `m`; prior terms are available through prior()
  virtual Int gen(std::uint64_t m) = 0;

  const Int& prior(std::uint64_t m) const { return memo_.at(m - 1); }

  bool allow_initial_dup_ = false;

 private:
  std::mutex mu_;
  std::vector<Int> memo_;
};

namespace {

Int list_at(const std::vector<Int>& v, std::uint64_t i, ListExtend mode) {
  if (i < v.size()) return v[i];
  if (mode == ListExtend::repeat_last) return v.back();
  return v[i % v.size()];
}

class PowersCore final : public SeqCore {
 public:
  explicit PowersCore(Int a) : a_(std::move(a)) {
    if (a_ < 2) throw ConfigError("powers: base must be >= 2");
  }
  std::string describe() const override { return "powers(" + a_.str() + ")"; }

 protected:
  Int gen(std::uint64_t m) override { return m == 1 ? a_ : prior(m - 1) * a_; }

 private:
  Int a_;
};

class RatioProductCore final : public SeqCore {
 public:
  RatioProductCore(std::vector<Int> ratios, ListExtend extend)
      : ratios_(std::move(ratios)), extend_(extend) {
    if (ratios_.empty()) throw ConfigError("integer_ratio_product: no ratios");
    for (const Int& r : ratios_)
      if (r < 2) throw ConfigError("integer_ratio_product: ratios must be >= 2");
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "integer_ratio_product(";
    for (size_t i = 0; i < ratios_.size(); ++i)
      os << (i ? "," : "") << ratios_[i];
    os << (extend_ == ListExtend::cycle ? ";cycle)" : ";repeat)");
    return os.str();
  }

 protected:
  Int gen(std::uint64_t m) override {
    if (m == 1) return ratios_[0];
    return prior(m - 1) * list_at(ratios_, m - 1, extend_);
  }

 private:
  std::vector<Int> ratios_;
  ListExtend extend_;
};

class PolynomialCore final : public SeqCore {
 public:
  explicit PolynomialCore(std::vector<Int> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw ConfigError("polynomial: no coefficients");
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "polynomial(";
    for (size_t i = 0; i < coeffs_.size(); ++i) os << (i ? "," : "") << coeffs_[i];
    os << ")";
    return os.str();
  }

 protected:
  Int gen(std::uint64_t m) override {
    Int x(m), acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
      acc = acc * x + *it;
    return acc;
  }

 private:
  std::vector<Int> coeffs_;  // ascending degree
};

class PerturbedPowersCore final : public SeqCore {
 public:
  PerturbedPowersCore(Int a, std::vector<Int> coeffs)
      : a_(std::move(a)), coeffs_(std::move(coeffs)) {
    if (a_ < 2) throw ConfigError("perturbed_powers: base must be >= 2");
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "perturbed_powers(" << a_ << ";";
    for (size_t i = 0; i < coeffs_.size(); ++i) os << (i ? "," : "") << coeffs_[i];
    os << ")";
    return os.str();
  }

 protected:
  Int gen(std::uint64_t m) override {
    Int x(m), p = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
      p = p * x + *it;
    return ipow(a_, static_cast<unsigned>(m)) + p;
  }

 private:
  Int a_;
  std::vector<Int> coeffs_;
};

class CfDenomCore final : public SeqCore {
 public:
  CfDenomCore(std::vector<Int> quotients, ListExtend extend)
      : quot_(std::move(quotients)), extend_(extend) {
    if (quot_.empty())
      throw ConfigError("continued_fraction_denominators: no partial quotients");
    for (const Int& a : quot_)
      if (a < 1)
        throw ConfigError(
            "continued_fraction_denominators: partial quotients must be >= 1");
    // q_0 = 1 and q_1 = a_1 collide when a_1 = 1 (e.g. the golden mean);
    // that duplicate is part of the classical denominator sequence
    allow_initial_dup_ = (quot_[0] == 1);
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "cf_denominators(";
    for (size_t i = 0; i < quot_.size(); ++i) os << (i ? "," : "") << quot_[i];
    os << (extend_ == ListExtend::cycle ? ";cycle)" : ";repeat)");
    return os.str();
  }

 protected:
  Int gen(std::uint64_t m) override {
    // term(m) = q_{m-1}:  q_0 = 1, q_1 = a_1, q_n = a_n q_{n-1} + q_{n-2}
    if (m == 1) return Int(1);
    if (m == 2) return quot_[0];
    Int a = list_at(quot_, m - 2, extend_);
    return a * prior(m - 1) + prior(m - 2);
  }

 private:
  std::vector<Int> quot_;
  ListExtend extend_;
};

class ChaconCore final : public SeqCore {
 public:
  std::string describe() const override { return "chacon_heights_minus_one"; }

 protected:
  Int gen(std::uint64_t m) override {
    // tower heights h_m = (3^{m+1} - 1) / 2; the sequence is h_m - 1
    return (ipow(3, static_cast<unsigned>(m + 1)) - 1) / 2 - 1;
  }
};

class ExplicitCore final : public SeqCore {
 public:
  explicit ExplicitCore(std::vector<Int> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw ConfigError("explicit sequence: no terms");
  }
  std::string describe() const override {
    return "explicit(" + std::to_string(terms_.size()) + " terms)";
  }

 protected:
  Int gen(std::uint64_t m) override {
    if (m > terms_.size())
      throw ResourceError("explicit sequence has only " +
                          std::to_string(terms_.size()) + " terms");
    return terms_[m - 1];
  }

 private:
  std::vector<Int> terms_;
};

class ShiftedCore final : public SeqCore {
 public:
  ShiftedCore(IntSequence base, Int offset)
      : base_(std::move(base)), offset_(std::move(offset)) {}
  std::string describe() const override {
    return "shifted(" + base_.describe() + "," + offset_.str() + ")";
  }

 protected:
  Int gen(std::uint64_t m) override { return base_.term(m) + offset_; }

 private:
  IntSequence base_;
  Int offset_;
};

class LinearRecurrenceCore final : public SeqCore {
 public:
  LinearRecurrenceCore(std::vector<Int> coeffs, std::vector<Int> init)
      : coeffs_(std::move(coeffs)), init_(std::move(init)) {
    if (coeffs_.empty() || init_.size() < coeffs_.size())
      throw ConfigError(
          "linear_recurrence: need >= order many initial terms");
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "linear_recurrence(order " << coeffs_.size() << ")";
    return os.str();
  }

 protected:
  Int gen(std::uint64_t m) override {
    if (m <= init_.size()) return init_[m - 1];
    Int acc = 0;
    for (size_t i = 0; i < coeffs_.size(); ++i)
      acc += coeffs_[i] * prior(m - 1 - i);
    return acc;
  }

 private:
  std::vector<Int> coeffs_;  // term(m) = sum coeffs[i] * term(m-1-i)
  std::vector<Int> init_;
};

class UnionCore final : public SeqCore {
 public:
  explicit UnionCore(std::vector<IntSequence> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw ConfigError("union: no member sequences");
    cursor_.assign(parts_.size(), 1);
  }
  std::string describe() const override {
    std::string s = "union(";
    for (size_t i = 0; i < parts_.size(); ++i)
      s += (i ? "," : "") + parts_[i].describe();
    return s + ")";
  }

 protected:
  Int gen(std::uint64_t m) override {
    // merge with dedup; a member that runs out (explicit list) drops out
    (void)m;
    while (true) {
      size_t best = parts_.size();
      Int best_v;
      for (size_t i = 0; i < parts_.size(); ++i) {
        Int v;
        try {
          v = parts_[i].term(cursor_[i]);
        } catch (const ResourceError&) {
          continue;
        }
        if (best == parts_.size() || v < best_v) {
          best = i;
          best_v = v;
        }
      }
      if (best == parts_.size())
        throw ResourceError("union: all member sequences exhausted");
      ++cursor_[best];
      if (!has_last_ || best_v > last_) {
        has_last_ = true;
        last_ = best_v;
        return best_v;
      }
      // duplicate of the previous emitted value: skip
    }
  }

 private:
  std::vector<IntSequence> parts_;
  std::vector<std::uint64_t> cursor_;
  Int last_;
  bool has_last_ = false;
};

class GeneratorCore final : public SeqCore {
 public:
  GeneratorCore(std::function<Int(std::uint64_t)> gen, std::string desc)
      : gen_(std::move(gen)), desc_(std::move(desc)) {}
  std::string describe() const override { return desc_; }

 protected:
  Int gen(std::uint64_t m) override { return gen_(m); }

 private:
  std::function<Int(std::uint64_t)> gen_;
  std::string desc_;
};

}  // namespace

}  // namespace detail

IntSequence::IntSequence(std::shared_ptr<detail::SeqCore> core)
    : core_(std::move(core)) {}

IntSequence IntSequence::powers(const Int& a) {
  return IntSequence(std::make_shared<detail::PowersCore>(a));
}

IntSequence IntSequence::integer_ratio_product(std::vector<Int> ratios,
                                               ListExtend extend) {
  return IntSequence(
      std::make_shared<detail::RatioProductCore>(std::move(ratios), extend));
}

IntSequence IntSequence::polynomial(std::vector<Int> coeffs) {
  return IntSequence(std::make_shared<detail::PolynomialCore>(std::move(coeffs)));
}

IntSequence IntSequence::perturbed_powers(const Int& a, std::vector<Int> coeffs) {
  return IntSequence(
      std::make_shared<detail::PerturbedPowersCore>(a, std::move(coeffs)));
}

IntSequence IntSequence::continued_fraction_denominators(
    std::vector<Int> quotients, ListExtend extend) {
  return IntSequence(
      std::make_shared<detail::CfDenomCore>(std::move(quotients), extend));
}

IntSequence IntSequence::chacon_heights_minus_one() {
  return IntSequence(std::make_shared<detail::ChaconCore>());
}

IntSequence IntSequence::explicit_terms(std::vector<Int> terms) {
  return IntSequence(std::make_shared<detail::ExplicitCore>(std::move(terms)));
}

IntSequence IntSequence::union_of(std::vector<IntSequence> parts) {
  return IntSequence(std::make_shared<detail::UnionCore>(std::move(parts)));
}

IntSequence IntSequence::shifted(IntSequence base, const Int& offset) {
  return IntSequence(
      std::make_shared<detail::ShiftedCore>(std::move(base), offset));
}

IntSequence IntSequence::linear_recurrence(std::vector<Int> coeffs,
                                           std::vector<Int> init) {
  return IntSequence(std::make_shared<detail::LinearRecurrenceCore>(
      std::move(coeffs), std::move(init)));
}

IntSequence IntSequence::from_generator(std::function<Int(std::uint64_t)> gen,
                                        std::string description) {
  return IntSequence(std::make_shared<detail::GeneratorCore>(
      std::move(gen), std::move(description)));
}

Int IntSequence::term(std::uint64_t m) const {
  if (!core_) throw InternalError("sequence used before assignment");
  return core_->term(m);
}

std::vector<Int> IntSequence::terms(std::uint64_t lo, std::uint64_t hi) const {
  if (lo == 0 || hi < lo) throw ConfigError("bad term range");
  std::vector<Int> out;
  out.reserve(hi - lo + 1);
  for (std::uint64_t m = lo; m <= hi; ++m) out.push_back(term(m));
  return out;
}

Int IntSequence::count_up_to(const Int& N, std::uint64_t index_budget) const {
  if (N < 1) return Int(0);
  Int count = 0;
  for (std::uint64_t m = 1;; ++m) {
    if (m > index_budget)
      throw ResourceError("count_up_to: index budget " +
                          std::to_string(index_budget) + " exhausted");
    Int t;
    try {
      t = term(m);
    } catch (const ResourceError&) {
      break;  // finite sequence ran out below N
    }
    if (t > N) break;
    ++count;
  }
  return count;
}

Rat IntSequence::density(const Int& N, std::uint64_t index_budget) const {
  if (N < 1) throw ConfigError("density: N must be >= 1");
  return Rat(count_up_to(N, index_budget), N);
}

std::vector<Int> IntSequence::finite_sums(std::uint64_t lo, std::uint64_t hi,
                                          std::uint64_t budget) const {
  if (lo == 0 || hi < lo) throw ConfigError("finite_sums: bad index window");
  std::uint64_t width = hi - lo + 1;
  if (width >= 63 || (std::uint64_t(1) << width) - 1 > budget)
    throw ResourceError("finite_sums: 2^" + std::to_string(width) +
                        " subset sums exceed budget");
  std::set<Int> sums;
  for (std::uint64_t m = lo; m <= hi; ++m) {
    Int t = term(m);
    std::set<Int> grown = sums;
    grown.insert(t);
    for (const Int& s : sums) grown.insert(s + t);
    sums.swap(grown);
    if (sums.size() > budget)
      throw ResourceError("finite_sums: result exceeds budget");
  }
  return std::vector<Int>(sums.begin(), sums.end());
}

GrowthReport IntSequence::growth_report(const std::vector<Int>& sample_Ns,
                                        std::uint64_t tail_start,
                                        std::uint64_t horizon,
                                        const Rat& sidon_C,
                                        std::uint64_t index_budget) const {
  if (horizon < tail_start + 1)
    throw ConfigError("growth_report: horizon must exceed tail_start");
  GrowthReport rep;
  rep.tail_start = tail_start;
  rep.horizon = horizon;

  for (const Int& N : sample_Ns) {
    GrowthSample s;
    s.N = N;
    s.count = count_up_to(N, index_budget);
    s.density = Rat(s.count, N);
    // certified test of count > C * ln(N); widen precision until decidable
    s.sidon_violated = false;
    if (N > 1) {
      for (unsigned bits = 96;; bits *= 2) {
        RatIv ln = log_iv(Rat(N), bits);
        if (Rat(s.count) > sidon_C * ln.hi) {
          s.sidon_violated = true;
          break;
        }
        if (Rat(s.count) <= sidon_C * ln.lo) break;
        if (bits > 8192)
          throw InternalError("growth_report: sidon test not separating");
      }
    }
    rep.samples.push_back(std::move(s));
  }

  bool first = true;
  std::uint64_t late_from = tail_start + (horizon - tail_start) / 2;
  for (std::uint64_t m = tail_start; m < horizon; ++m) {
    Int gap = term(m + 1) - term(m);
    Rat ratio(term(m + 1), term(m));
    if (first) {
      rep.min_tail_gap = gap;
      rep.min_late_gap = gap;  // overwritten once the late window starts
      rep.min_ratio = ratio;
      rep.max_ratio = ratio;
      first = false;
    } else {
      rep.min_tail_gap = std::min(rep.min_tail_gap, gap);
      rep.min_ratio = std::min(rep.min_ratio, ratio);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    if (m == late_from) rep.min_late_gap = gap;
    if (m >= late_from) rep.min_late_gap = std::min(rep.min_late_gap, gap);
  }
  // gaps that fail to diverge: the late half of the window still contains a
  // gap no bigger than the smallest one seen early
  rep.gap_divergence_fails = (rep.min_late_gap <= rep.min_tail_gap);
  return rep;
}

std::string IntSequence::describe() const {
  if (!core_) return "(unset)";
  return core_->describe();
}

}  // namespace rigidlab
