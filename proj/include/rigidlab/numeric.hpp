#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cstdint>
#include <string>
#include <utility>

#include "rigidlab/errors.hpp"

namespace rigidlab {

// Exact arithmetic everywhere in the core; high precision floats only at the
// final transcendental step, and then always with a certified error bound.
using Int = boost::multiprecision::mpz_int;
using Rat = boost::multiprecision::mpq_rational;
using Real = boost::multiprecision::mpfr_float;

// ---- integer helpers -------------------------------------------------------

// number of bits in |n| (bit_length(0) == 0)
unsigned bit_length(const Int& n);

Int pow2(unsigned k);
Int ipow(const Int& base, unsigned e);

// floor division / remainder (sign of remainder follows the divisor)
Int floor_div(const Int& a, const Int& b);
Int mod_floor(const Int& a, const Int& b);

// sum_{i=0}^{n-1} floor((a*i + b) / c) for c > 0, any sign of a and b.
// O(log) Euclid-style descent; exact.
Int floor_sum(Int n, Int a, Int b, Int c);

// ---- rational helpers ------------------------------------------------------

// fractional part in [0,1)
Rat frac_part(const Rat& t);

// distance to the nearest integer, exact
Rat norm_dist(const Rat& t);

Rat rat_abs(const Rat& x);

// parse "p/q" or "p"; throws ConfigError on junk
Rat parse_rat(const std::string& s);
Int parse_int(const std::string& s);

std::string to_string(const Int& n);
std::string to_string(const Rat& q);

// ---- certified interval scalars --------------------------------------------

// Closed interval with exact rational endpoints.  All transcendental values
// flow through these so that every comparison downstream can be certified.
struct RatIv {
  Rat lo, hi;

  RatIv() : lo(0), hi(0) {}
  RatIv(Rat v) : lo(v), hi(v) {}
  RatIv(Rat l, Rat h);

  Rat width() const { return hi - lo; }
  Rat mid() const { return (lo + hi) / 2; }
  bool contains(const Rat& v) const { return lo <= v && v <= hi; }
  // certified comparisons: true only when every point of the interval passes
  bool certainly_le(const Rat& v) const { return hi <= v; }
  bool certainly_lt(const Rat& v) const { return hi < v; }
  bool certainly_ge(const Rat& v) const { return lo >= v; }
  bool certainly_gt(const Rat& v) const { return lo > v; }

  RatIv operator-() const { return RatIv(-hi, -lo); }
};

RatIv iv_add(const RatIv& a, const RatIv& b);
RatIv iv_sub(const RatIv& a, const RatIv& b);
RatIv iv_mul(const RatIv& a, const RatIv& b);
RatIv iv_scale(const RatIv& a, const Rat& c);
// division; throws InternalError if b straddles 0
RatIv iv_div(const RatIv& a, const RatIv& b);
// outward rounding to the dyadic grid 2^-grid_bits, to stop denominator growth
RatIv iv_round_out(const RatIv& a, unsigned grid_bits);

// complex interval (rectangle)
struct CxIv {
  RatIv re, im;
  CxIv() = default;
  CxIv(RatIv r, RatIv i) : re(std::move(r)), im(std::move(i)) {}
  static CxIv one() { return CxIv(RatIv(Rat(1)), RatIv(Rat(0))); }
};

CxIv cx_add(const CxIv& a, const CxIv& b);
CxIv cx_sub(const CxIv& a, const CxIv& b);
CxIv cx_mul(const CxIv& a, const CxIv& b);
CxIv cx_scale(const CxIv& a, const Rat& c);
CxIv cx_div(const CxIv& a, const CxIv& b);  // a * conj(b) / |b|^2
CxIv cx_round_out(const CxIv& a, unsigned grid_bits);
RatIv cx_abs_sq(const CxIv& a);  // |z|^2 as an interval
CxIv cx_conj(const CxIv& a);

// ---- certified transcendental evaluations ----------------------------------

// exact dyadic rational equal to the mpfr value (no rounding)
Rat rat_from_real_exact(const Real& x);

RatIv pi_iv(unsigned bits);
// cos(2*pi*t) and sin(2*pi*t) for rational t; t is reduced mod 1 exactly first
RatIv cos2pi_iv(const Rat& t, unsigned bits);
RatIv sin2pi_iv(const Rat& t, unsigned bits);
// e^{-2*pi*i*t} as a complex rectangle
CxIv e2pi_minus_iv(const Rat& t, unsigned bits);
// natural log of a positive rational, certified by directed rounding
RatIv log_iv(const Rat& x, unsigned bits);
// e^x for rational x, certified by directed rounding
RatIv exp_iv(const Rat& x, unsigned bits);
// square root of a nonnegative rational, certified by directed rounding
RatIv sqrt_iv(const Rat& x, unsigned bits);

// value of cos/sin at 2*pi*t rounded to nearest at the given precision
// (uncertified convenience for report output)
Real cos2pi(const Rat& t, unsigned bits);
Real sin2pi(const Rat& t, unsigned bits);

// decimal rendering of a rational with a fixed number of fractional digits,
// round-to-nearest; used for stable report output
std::string decimal_string(const Rat& v, unsigned digits);

// ---- fixed-point angles ----------------------------------------------------

// A point of the circle [0,1) held as mant / 2^frac_bits.  The represented
// dyadic value is exact; whoever approximates an irrational target with one
// of these owns the (target - dyadic) error term.
class FixedAngle {
 public:
  FixedAngle() : mant_(0), bits_(64) {}
  FixedAngle(Int mant, unsigned frac_bits);

  static FixedAngle from_rat(const Rat& t, unsigned frac_bits);

  unsigned frac_bits() const { return bits_; }
  const Int& mantissa() const { return mant_; }

  Rat to_rat() const;
  // this * n mod 1, exact on the dyadic representative
  FixedAngle times_int_mod1(const Int& n) const;
  FixedAngle add_mod1(const FixedAngle& other) const;
  // distance of the dyadic representative to the nearest integer
  Rat norm_dist() const;

 private:
  Int mant_;       // in [0, 2^bits_)
  unsigned bits_;
};

}  // namespace rigidlab
