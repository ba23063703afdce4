#include "lpgd/lpfloat.hpp"

#include <charconv>
#include <cmath>

#include "lpgd/error.hpp"
#include "lpgd/rounding.hpp"

namespace lpgd {

double FloatFormat::u() const { return std::ldexp(1.0, -sig_bits); }
double FloatFormat::max_value() const { return (2.0 - std::ldexp(1.0, 1 - sig_bits)) * std::ldexp(1.0, emax()); }
double FloatFormat::min_normal() const { return std::ldexp(1.0, emin()); }
double FloatFormat::min_subnormal() const { return std::ldexp(1.0, emin() - sig_bits + 1); }
double FloatFormat::gap_at_exponent(int e) const { return std::ldexp(1.0, std::max(e, emin()) - sig_bits + 1); }
std::string FloatFormat::to_string() const {
  return "fp" + std::to_string(total_bits()) + "e" + std::to_string(exp_bits);
}

FloatFormat make_float_format(int sig_bits, int exp_bits) {
  if (sig_bits < 2 || exp_bits < 2 || exp_bits > 11 || sig_bits + exp_bits > 32)
    throw ConfigError("invalid float format sig_bits=" + std::to_string(sig_bits) +
                      " exp_bits=" + std::to_string(exp_bits) +
                      " (need sig >= 2, 2 <= exp <= 11, total <= 32)");
  return FloatFormat{sig_bits, exp_bits};
}

FloatFormat parse_float_format(std::string_view text) {
  if (text == "binary32") return make_float_format(24, 8);
  if (text == "binary16") return make_float_format(11, 5);
  if (text == "bfloat16") return make_float_format(8, 8);
  if (text == "binary64") throw ConfigError("binary64 is the reference number system, not an emulated format");
  auto fail = [&] { return ConfigError("bad float format '" + std::string(text) + "', expected fp<total>e<exp>"); };
  if (text.size() < 5 || text.substr(0, 2) != "fp") throw fail();
  auto e = text.find('e', 2);
  if (e == std::string_view::npos) throw fail();
  int total = 0;
  int exp_bits = 0;
  auto r1 = std::from_chars(text.data() + 2, text.data() + e, total);
  auto r2 = std::from_chars(text.data() + e + 1, text.data() + text.size(), exp_bits);
  if (r1.ec != std::errc() || r1.ptr != text.data() + e || r2.ec != std::errc() ||
      r2.ptr != text.data() + text.size())
    throw fail();
  return make_float_format(total - exp_bits, exp_bits);
}

ExactPair two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

ExactPair two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

FlCandidates fl_candidates(const ExactPair& x, FloatFormat fmt) {
  if (!std::isfinite(x.hi)) throw OverflowError("fl_candidates: non-finite value");
  if (x.hi == 0.0) return {0.0, 0.0, fmt.min_subnormal(), Dyadic(), true};
  double ahi = std::fabs(x.hi);
  if (ahi > fmt.max_value() || (ahi == fmt.max_value() && (x.lo != 0.0) && ((x.lo > 0) == (x.hi > 0))))
    throw OverflowError("value " + format_double(x.hi) + " exceeds the range of " + fmt.to_string());
  int e = std::ilogb(x.hi);
  int fe = 0;
  double m = std::frexp(ahi, &fe);
  bool pow2 = m == 0.5;
  if (pow2 && x.lo != 0.0 && ((x.lo > 0) != (x.hi > 0))) --e;  // |x| just below a binade boundary
  double gap = fmt.gap_at_exponent(e);
  double q = std::floor(x.hi / gap);
  double lower = q * gap;
  if (lower == x.hi && x.lo < 0.0) {
    lower -= gap;
    q -= 1.0;
  }
  int gap_exp = std::ilogb(gap);
  Dyadic frac = (Dyadic::from_double(x.hi) - Dyadic::from_double(lower) + Dyadic::from_double(x.lo)).ldexp(-gap_exp);
  bool even = std::fmod(std::fabs(q), 2.0) == 0.0;
  return {lower, lower + gap, gap, frac, even};
}

bool fl_representable(double x, FloatFormat fmt) {
  if (!std::isfinite(x) || std::fabs(x) > fmt.max_value()) return false;
  return fl_candidates({x, 0.0}, fmt).frac.is_zero();
}

Dyadic fl_prob_round_down(const ExactPair& x, FloatFormat fmt, const RoundingScheme& scheme, int v_sign) {
  FlCandidates c = fl_candidates(x, fmt);
  if (c.frac.is_zero()) return Dyadic(1, 0);
  return prob_down_kernel(scheme, c.frac, c.lower_even, bias_direction(scheme, x.sign(), v_sign));
}

FlResult fl_round(const ExactPair& x, FloatFormat fmt, const RoundingScheme& scheme, RandomStream& rng, int v_sign) {
  std::uint64_t draw = rng.next();
  FlCandidates c = fl_candidates(x, fmt);
  if (c.frac.is_zero()) return {c.lower, 0.0};
  Dyadic p = prob_down_kernel(scheme, c.frac, c.lower_even, bias_direction(scheme, x.sign(), v_sign));
  double r = below_probability(p, draw) ? c.lower : c.upper;
  if (std::fabs(r) > fmt.max_value()) throw OverflowError("rounded value exceeds the range of " + fmt.to_string());
  double err = (r - x.hi) - x.lo;
  return {r, std::fabs(err / x.approx())};
}

FlResult fl_round(double x, FloatFormat fmt, const RoundingScheme& scheme, RandomStream& rng, int v_sign) {
  return fl_round(ExactPair{x, 0.0}, fmt, scheme, rng, v_sign);
}

FlResult fl_sub_round(double a, double b, FloatFormat fmt, const RoundingScheme& scheme, RandomStream& rng,
                      int v_sign) {
  return fl_round(two_sum(a, -b), fmt, scheme, rng, v_sign);
}

FlResult fl_add_round(double a, double b, FloatFormat fmt, const RoundingScheme& scheme, RandomStream& rng,
                      int v_sign) {
  return fl_round(two_sum(a, b), fmt, scheme, rng, v_sign);
}

FlResult fl_mul_round(double a, double b, FloatFormat fmt, const RoundingScheme& scheme, RandomStream& rng,
                      int v_sign) {
  return fl_round(two_prod(a, b), fmt, scheme, rng, v_sign);
}

double fl_expected_round(const ExactPair& x, FloatFormat fmt, const RoundingScheme& scheme, int v_sign) {
  FlCandidates c = fl_candidates(x, fmt);
  if (c.frac.is_zero()) return c.lower;
  Dyadic p = prob_down_kernel(scheme, c.frac, c.lower_even, bias_direction(scheme, x.sign(), v_sign));
  return c.lower + c.gap * (1.0 - p.to_double());
}

}  // namespace lpgd
