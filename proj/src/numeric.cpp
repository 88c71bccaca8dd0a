#include "rigidlab/numeric.hpp"

#include <mpfr.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace rigidlab {

unsigned bit_length(const Int& n) {
  if (n == 0) return 0;
  return static_cast<unsigned>(
      mpz_sizeinbase(n.backend().data(), 2));
}

Int pow2(unsigned k) {
  Int r = 1;
  r <<= k;
  return r;
}

Int ipow(const Int& base, unsigned e) {
  Int r = 1, b = base;
  unsigned k = e;
  while (k) {
    if (k & 1u) r *= b;
    b *= b;
    k >>= 1;
  }
  return r;
}

Int floor_div(const Int& a, const Int& b) {
  if (b == 0) throw InternalError("floor_div by zero");
  Int q;
  if (b > 0) {
    mpz_fdiv_q(q.backend().data(), a.backend().data(), b.backend().data());
  } else {
    // a/b == (-a)/(-b), so reduce to the positive-divisor case
    Int na = -a, nb = -b;
    mpz_fdiv_q(q.backend().data(), na.backend().data(), nb.backend().data());
  }
  return q;
}

Int mod_floor(const Int& a, const Int& b) { return a - floor_div(a, b) * b; }

Int floor_sum(Int n, Int a, Int b, Int c) {
  if (c <= 0) throw InternalError("floor_sum needs c > 0");
  if (n < 0) throw InternalError("floor_sum needs n >= 0");
  Int ans = 0;
  if (a < 0) {
    Int a2 = mod_floor(a, c);
    ans -= n * (n - 1) / 2 * ((a2 - a) / c);
    a = a2;
  }
  if (b < 0) {
    Int b2 = mod_floor(b, c);
    ans -= n * ((b2 - b) / c);
    b = b2;
  }
  while (true) {
    if (a >= c) {
      ans += n * (n - 1) / 2 * (a / c);
      a %= c;
    }
    if (b >= c) {
      ans += n * (b / c);
      b %= c;
    }
    Int y_max = a * n + b;
    if (y_max < c) break;
    n = y_max / c;
    b = mod_floor(y_max, c);
    std::swap(c, a);
  }
  return ans;
}

Rat frac_part(const Rat& t) {
  Int num = numerator(t), den = denominator(t);
  Int f = mod_floor(num, den);
  return Rat(f, den);
}

Rat norm_dist(const Rat& t) {
  Rat f = frac_part(t);
  Rat other = 1 - f;
  return f <= other ? f : other;
}

Rat rat_abs(const Rat& x) { return x < 0 ? Rat(-x) : x; }

Int parse_int(const std::string& s) {
  if (s.empty()) throw ConfigError("empty integer literal");
  size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) throw ConfigError("bad integer literal '" + s + "'");
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i])))
      throw ConfigError("bad integer literal '" + s + "'");
  return Int(s);
}

Rat parse_rat(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rat(parse_int(s));
  Int p = parse_int(s.substr(0, slash));
  Int q = parse_int(s.substr(slash + 1));
  if (q == 0) throw ConfigError("zero denominator in '" + s + "'");
  return Rat(p, q);
}

std::string to_string(const Int& n) { return n.str(); }

std::string to_string(const Rat& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

// ---- intervals --------------------------------------------------------------

RatIv::RatIv(Rat l, Rat h) : lo(std::move(l)), hi(std::move(h)) {
  if (lo > hi) throw InternalError("interval endpoints out of order");
}

RatIv iv_add(const RatIv& a, const RatIv& b) {
  return RatIv(a.lo + b.lo, a.hi + b.hi);
}

RatIv iv_sub(const RatIv& a, const RatIv& b) {
  return RatIv(a.lo - b.hi, a.hi - b.lo);
}

RatIv iv_mul(const RatIv& a, const RatIv& b) {
  Rat c1 = a.lo * b.lo, c2 = a.lo * b.hi, c3 = a.hi * b.lo, c4 = a.hi * b.hi;
  Rat lo = std::min(std::min(c1, c2), std::min(c3, c4));
  Rat hi = std::max(std::max(c1, c2), std::max(c3, c4));
  return RatIv(lo, hi);
}

RatIv iv_scale(const RatIv& a, const Rat& c) {
  if (c >= 0) return RatIv(a.lo * c, a.hi * c);
  return RatIv(a.hi * c, a.lo * c);
}

RatIv iv_div(const RatIv& a, const RatIv& b) {
  if (b.lo <= 0 && b.hi >= 0)
    throw InternalError("interval division by a range containing 0");
  Rat c1 = a.lo / b.lo, c2 = a.lo / b.hi, c3 = a.hi / b.lo, c4 = a.hi / b.hi;
  Rat lo = std::min(std::min(c1, c2), std::min(c3, c4));
  Rat hi = std::max(std::max(c1, c2), std::max(c3, c4));
  return RatIv(lo, hi);
}

RatIv iv_round_out(const RatIv& a, unsigned grid_bits) {
  Int scale = pow2(grid_bits);
  Rat lo(floor_div(numerator(a.lo) * scale, denominator(a.lo)), scale);
  Int hi_num = numerator(a.hi) * scale;
  Int hi_den = denominator(a.hi);
  Rat hi(-floor_div(-hi_num, hi_den), scale);
  return RatIv(lo, hi);
}

CxIv cx_add(const CxIv& a, const CxIv& b) {
  return CxIv(iv_add(a.re, b.re), iv_add(a.im, b.im));
}

CxIv cx_sub(const CxIv& a, const CxIv& b) {
  return CxIv(iv_sub(a.re, b.re), iv_sub(a.im, b.im));
}

CxIv cx_mul(const CxIv& a, const CxIv& b) {
  return CxIv(iv_sub(iv_mul(a.re, b.re), iv_mul(a.im, b.im)),
              iv_add(iv_mul(a.re, b.im), iv_mul(a.im, b.re)));
}

CxIv cx_scale(const CxIv& a, const Rat& c) {
  return CxIv(iv_scale(a.re, c), iv_scale(a.im, c));
}

CxIv cx_div(const CxIv& a, const CxIv& b) {
  RatIv den = cx_abs_sq(b);
  CxIv num = cx_mul(a, cx_conj(b));
  return CxIv(iv_div(num.re, den), iv_div(num.im, den));
}

CxIv cx_round_out(const CxIv& a, unsigned grid_bits) {
  return CxIv(iv_round_out(a.re, grid_bits), iv_round_out(a.im, grid_bits));
}

CxIv cx_conj(const CxIv& a) { return CxIv(a.re, -a.im); }

RatIv cx_abs_sq(const CxIv& a) {
  auto sq = [](const RatIv& v) {
    // tight square: if the interval straddles 0 the lower bound is 0
    Rat l2 = v.lo * v.lo, h2 = v.hi * v.hi;
    if (v.lo <= 0 && v.hi >= 0) return RatIv(Rat(0), std::max(l2, h2));
    return RatIv(std::min(l2, h2), std::max(l2, h2));
  };
  return iv_add(sq(a.re), sq(a.im));
}

// ---- mpfr-backed certified values --------------------------------------------

Rat rat_from_real_exact(const Real& x) {
  if (mpfr_zero_p(x.backend().data())) return Rat(0);
  if (!mpfr_number_p(x.backend().data()))
    throw InternalError("non-finite mpfr value");
  Int m;
  mpfr_exp_t e =
      mpfr_get_z_2exp(m.backend().data(), x.backend().data());
  Rat r(m);
  if (e >= 0) {
    r *= Rat(pow2(static_cast<unsigned>(e)));
  } else {
    r /= Rat(pow2(static_cast<unsigned>(-e)));
  }
  return r;
}

namespace {

struct MpfrTmp {
  mpfr_t v;
  explicit MpfrTmp(unsigned bits) { mpfr_init2(v, bits); }
  ~MpfrTmp() { mpfr_clear(v); }
  MpfrTmp(const MpfrTmp&) = delete;
};

Rat dyadic_from_mpfr(const mpfr_t x) {
  if (mpfr_zero_p(x)) return Rat(0);
  Int m;
  mpfr_exp_t e = mpfr_get_z_2exp(m.backend().data(), x);
  Rat r(m);
  if (e >= 0)
    r *= Rat(pow2(static_cast<unsigned>(e)));
  else
    r /= Rat(pow2(static_cast<unsigned>(-e)));
  return r;
}

}  // namespace

RatIv pi_iv(unsigned bits) {
  MpfrTmp lo(bits), hi(bits);
  mpfr_const_pi(lo.v, MPFR_RNDD);
  mpfr_const_pi(hi.v, MPFR_RNDU);
  return RatIv(dyadic_from_mpfr(lo.v), dyadic_from_mpfr(hi.v));
}

namespace {

// cos/sin of 2*pi*t via 1-Lipschitz enclosure around a nearest-rounded value.
// The angle 2*pi*t carries the pi rounding error; |f'| <= 2*pi * |dt| is
// swallowed by eps below.
RatIv trig2pi_iv(const Rat& t, unsigned bits, bool want_sin) {
  Rat tr = frac_part(t);
  unsigned work = bits + 32;
  MpfrTmp pi(work), theta(work), tv(work), out(work);
  mpfr_const_pi(pi.v, MPFR_RNDN);
  mpfr_set_q(tv.v, Rat(tr).backend().data(), MPFR_RNDN);
  mpfr_mul(theta.v, pi.v, tv.v, MPFR_RNDN);
  mpfr_mul_ui(theta.v, theta.v, 2, MPFR_RNDN);
  if (want_sin)
    mpfr_sin(out.v, theta.v, MPFR_RNDN);
  else
    mpfr_cos(out.v, theta.v, MPFR_RNDN);
  Rat val = dyadic_from_mpfr(out.v);
  // error budget: 3 roundings into theta (each <= 2^-work relative, theta < 7)
  // plus the final rounding; generous fixed bound 2^-(bits+16)
  Rat eps(Int(1), pow2(bits + 16));
  Rat lo = std::max(Rat(-1), Rat(val - eps));
  Rat hi = std::min(Rat(1), Rat(val + eps));
  return RatIv(lo, hi);
}

}  // namespace

RatIv cos2pi_iv(const Rat& t, unsigned bits) {
  return trig2pi_iv(t, bits, false);
}

RatIv sin2pi_iv(const Rat& t, unsigned bits) {
  return trig2pi_iv(t, bits, true);
}

CxIv e2pi_minus_iv(const Rat& t, unsigned bits) {
  return CxIv(cos2pi_iv(t, bits), -sin2pi_iv(t, bits));
}

RatIv log_iv(const Rat& x, unsigned bits) {
  if (x <= 0) throw ConfigError("log of non-positive value");
  MpfrTmp lo(bits), hi(bits), xv(bits + 64);
  // set_q is exact up to one rounding; bracket it by directed rounding twice
  mpfr_set_q(xv.v, Rat(x).backend().data(), MPFR_RNDD);
  mpfr_log(lo.v, xv.v, MPFR_RNDD);
  mpfr_set_q(xv.v, Rat(x).backend().data(), MPFR_RNDU);
  mpfr_log(hi.v, xv.v, MPFR_RNDU);
  return RatIv(dyadic_from_mpfr(lo.v), dyadic_from_mpfr(hi.v));
}

RatIv exp_iv(const Rat& x, unsigned bits) {
  MpfrTmp lo(bits), hi(bits), xv(bits + 64);
  mpfr_set_q(xv.v, Rat(x).backend().data(), MPFR_RNDD);
  mpfr_exp(lo.v, xv.v, MPFR_RNDD);
  mpfr_set_q(xv.v, Rat(x).backend().data(), MPFR_RNDU);
  mpfr_exp(hi.v, xv.v, MPFR_RNDU);
  return RatIv(dyadic_from_mpfr(lo.v), dyadic_from_mpfr(hi.v));
}

RatIv sqrt_iv(const Rat& x, unsigned bits) {
  if (x < 0) throw ConfigError("square root of a negative value");
  if (x == 0) return RatIv(Rat(0));
  MpfrTmp lo(bits), hi(bits), xv(bits + 64);
  mpfr_set_q(xv.v, Rat(x).backend().data(), MPFR_RNDD);
  mpfr_sqrt(lo.v, xv.v, MPFR_RNDD);
  mpfr_set_q(xv.v, Rat(x).backend().data(), MPFR_RNDU);
  mpfr_sqrt(hi.v, xv.v, MPFR_RNDU);
  return RatIv(dyadic_from_mpfr(lo.v), dyadic_from_mpfr(hi.v));
}

Real cos2pi(const Rat& t, unsigned bits) {
  RatIv iv = cos2pi_iv(t, bits);
  Real r;
  mpfr_set_prec(r.backend().data(), bits + 8);
  mpfr_set_q(r.backend().data(), Rat(iv.mid()).backend().data(), MPFR_RNDN);
  return r;
}

Real sin2pi(const Rat& t, unsigned bits) {
  RatIv iv = sin2pi_iv(t, bits);
  Real r;
  mpfr_set_prec(r.backend().data(), bits + 8);
  mpfr_set_q(r.backend().data(), Rat(iv.mid()).backend().data(), MPFR_RNDN);
  return r;
}

std::string decimal_string(const Rat& v, unsigned digits) {
  bool neg = v < 0;
  Rat a = neg ? Rat(-v) : v;
  Int scale = ipow(10, digits);
  // round half up on the absolute value
  Int scaled = floor_div(numerator(a) * scale * 2 + denominator(a),
                         denominator(a) * 2);
  Int ip = scaled / scale, fp = scaled % scale;
  std::string out = ip.str();
  if (digits) {
    std::string frac = fp.str();
    if (frac.size() < digits)
      frac.insert(frac.begin(), digits - frac.size(), '0');
    out += "." + frac;
  }
  if (neg && (ip != 0 || fp != 0)) out.insert(out.begin(), '-');
  return out;
}

// ---- FixedAngle --------------------------------------------------------------

FixedAngle::FixedAngle(Int mant, unsigned frac_bits)
    : mant_(std::move(mant)), bits_(frac_bits) {
  if (bits_ == 0) throw ConfigError("FixedAngle needs at least one bit");
  mant_ = mod_floor(mant_, pow2(bits_));
}

FixedAngle FixedAngle::from_rat(const Rat& t, unsigned frac_bits) {
  Rat f = frac_part(t);
  Int scale = pow2(frac_bits);
  // round to nearest grid point
  Int m = floor_div(numerator(f) * scale * 2 + denominator(f),
                    denominator(f) * 2);
  return FixedAngle(m, frac_bits);
}

Rat FixedAngle::to_rat() const { return Rat(mant_, pow2(bits_)); }

FixedAngle FixedAngle::times_int_mod1(const Int& n) const {
  return FixedAngle(mant_ * n, bits_);
}

FixedAngle FixedAngle::add_mod1(const FixedAngle& other) const {
  if (other.bits_ == bits_) return FixedAngle(mant_ + other.mant_, bits_);
  unsigned b = std::max(bits_, other.bits_);
  Int a = mant_ << (b - bits_);
  Int c = other.mant_ << (b - other.bits_);
  return FixedAngle(a + c, b);
}

Rat FixedAngle::norm_dist() const {
  Int scale = pow2(bits_);
  Int other = scale - mant_;
  return mant_ <= other ? Rat(mant_, scale) : Rat(other, scale);
}

}  // namespace rigidlab
