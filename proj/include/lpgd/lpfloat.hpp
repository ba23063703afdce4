#pragma once

// Emulated low-precision binary floating point with subnormals and no
// inf/nan. Values are carried in doubles; every format here embeds exactly.
// Relative resolution u_fl = 2^-sig_bits, so rounding errors satisfy
// |delta| < 2 u_fl.

#include <string>
#include <string_view>

#include "lpgd/dyadic.hpp"
#include "lpgd/random_stream.hpp"
#include "lpgd/scheme.hpp"

namespace lpgd {

struct FloatFormat {
  int sig_bits = 24;  // includes the implicit bit
  int exp_bits = 8;

  int total_bits() const { return sig_bits + exp_bits; }
  int bias() const { return (1 << (exp_bits - 1)) - 1; }
  int emin() const { return 1 - bias(); }
  int emax() const { return bias(); }
  double u() const;
  double max_value() const;
  double min_normal() const;
  double min_subnormal() const;
  // Spacing of the grid around a value with binary exponent e.
  double gap_at_exponent(int e) const;
  std::string to_string() const;

  friend bool operator==(const FloatFormat&, const FloatFormat&) = default;
};

// sig_bits >= 2, exp_bits in [2, 11], 1 + exp_bits + sig_bits - 1 <= 32.
FloatFormat make_float_format(int sig_bits, int exp_bits);
// "fp<total>e<exp_bits>" or "binary32" / "binary16" / "bfloat16".
FloatFormat parse_float_format(std::string_view text);

// hi + lo, exactly.
struct ExactPair {
  double hi = 0.0;
  double lo = 0.0;
  double approx() const { return hi + lo; }
  int sign() const { return hi > 0 ? 1 : (hi < 0 ? -1 : 0); }
};

ExactPair two_sum(double a, double b);
ExactPair two_prod(double a, double b);

struct FlCandidates {
  double lower = 0.0;
  double upper = 0.0;
  double gap = 0.0;
  Dyadic frac;  // (x - lower) / gap in [0, 1]; zero when x is on the grid
  bool lower_even = true;
};

// The two neighbours of x in fmt. Throws OverflowError when |x| exceeds the
// largest finite value.
FlCandidates fl_candidates(const ExactPair& x, FloatFormat fmt);
bool fl_representable(double x, FloatFormat fmt);

struct FlResult {
  double value = 0.0;
  double delta = 0.0;  // |value - x| / |x|, 0 when x == 0
};

Dyadic fl_prob_round_down(const ExactPair& x, FloatFormat fmt, const RoundingScheme& scheme, int v_sign = 0);
FlResult fl_round(const ExactPair& x, FloatFormat fmt, const RoundingScheme& scheme, RandomStream& rng,
                  int v_sign = 0);
FlResult fl_round(double x, FloatFormat fmt, const RoundingScheme& scheme, RandomStream& rng, int v_sign = 0);
// a - b rounded once; the exact difference is formed with two_sum.
FlResult fl_sub_round(double a, double b, FloatFormat fmt, const RoundingScheme& scheme, RandomStream& rng,
                      int v_sign = 0);
FlResult fl_add_round(double a, double b, FloatFormat fmt, const RoundingScheme& scheme, RandomStream& rng,
                      int v_sign = 0);
FlResult fl_mul_round(double a, double b, FloatFormat fmt, const RoundingScheme& scheme, RandomStream& rng,
                      int v_sign = 0);
// lower + gap * (1 - p), in double.
double fl_expected_round(const ExactPair& x, FloatFormat fmt, const RoundingScheme& scheme, int v_sign = 0);

}  // namespace lpgd
