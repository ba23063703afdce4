#include "lpgd/rounding.hpp"

#include <cmath>
#include <optional>

#include "lpgd/error.hpp"

namespace lpgd {

namespace {

const Dyadic kOne(1, 0);
const Dyadic kHalf(1, -1);

Dyadic clamp01(const Dyadic& p) {
  if (p.sign() < 0) return Dyadic();
  if (p > kOne) return kOne;
  return p;
}

}  // namespace

int bias_direction(const RoundingScheme& scheme, int x_sign, int v_sign) {
  switch (scheme.kind) {
    case SchemeKind::sr_eps:
      return x_sign;
    case SchemeKind::signed_sr_eps:
      return v_sign;
    default:
      return 0;
  }
}

Dyadic prob_down_kernel(const RoundingScheme& scheme, const Dyadic& frac, bool lower_even, int bias) {
  switch (scheme.kind) {
    case SchemeKind::rn: {
      auto c = frac <=> kHalf;
      if (c < 0) return kOne;
      if (c > 0) return Dyadic();
      return lower_even ? kOne : Dyadic();
    }
    case SchemeKind::sr:
      return kOne - frac;
    case SchemeKind::sr_eps:
    case SchemeKind::signed_sr_eps: {
      Dyadic p = kOne - frac;
      if (bias > 0) p -= scheme.eps_exact();
      if (bias < 0) p += scheme.eps_exact();
      return clamp01(p);
    }
  }
  return kOne;
}

Dyadic prob_round_down(const Dyadic& x, QFormat fmt, const RoundingScheme& scheme, int v_sign) {
  auto s = x.split_at(fmt.qf);
  if (s.frac.is_zero()) return kOne;
  return prob_down_kernel(scheme, s.frac, (s.floor & 1) == 0, bias_direction(scheme, x.sign(), v_sign));
}

Dyadic prob_round_down(double x, QFormat fmt, const RoundingScheme& scheme, int v_sign) {
  return prob_round_down(Dyadic::from_double(x), fmt, scheme, v_sign);
}

namespace {

// Integer form of the kernel for x = num 2^exp with |num| < 2^62 and a
// remainder of at most 62 bits. Decisions match the dyadic path bit for bit:
// down iff U < ceil(p 2^64) with p 2^64 an integer here.
std::optional<FixedVal> round_small(const Dyadic& x, QFormat fmt, const RoundingScheme& scheme, std::uint64_t draw,
                                    int v_sign) {
  const i128 n128 = x.num();
  const int shift = -x.exp() - fmt.qf;
  if (shift <= 0 && shift > -62 && n128 < (i128(1) << 62) && n128 > -(i128(1) << 62)) {
    const i128 m = n128 * (i128(1) << -shift);
    if (m < fmt.min_mantissa() || m > fmt.max_mantissa())
      throw OverflowError("round: " + x.to_string() + " outside the range of " + fmt.to_string());
    return FixedVal{static_cast<std::int64_t>(m), fmt};
  }
  if (shift < 1 || shift > 62 || n128 >= (i128(1) << 62) || n128 <= -(i128(1) << 62)) return std::nullopt;
  u128 eps64 = 0;
  const int bias = bias_direction(scheme, x.sign(), v_sign);
  if (bias != 0) {
    // eps 2^64 depends only on the scheme; cache the last one seen.
    thread_local double cached_eps = -1.0;
    thread_local double cached_e = 0.0;
    if (scheme.eps != cached_eps) {
      cached_eps = scheme.eps;
      cached_e = std::ldexp(scheme.eps, 64);
    }
    if (cached_e != std::floor(cached_e)) return std::nullopt;
    eps64 = static_cast<u128>(cached_e);
  }
  const auto n = static_cast<std::int64_t>(n128);
  const std::int64_t floor = n >> shift;
  const auto rem = static_cast<std::uint64_t>(n - (floor << shift));
  if (floor < fmt.min_mantissa() || floor > fmt.max_mantissa())
    throw OverflowError("round: " + x.to_string() + " outside the range of " + fmt.to_string());
  const u128 one = u128(1) << 64;
  u128 threshold = 0;  // ceil(p 2^64), clamped to [0, 2^64]
  if (scheme.kind == SchemeKind::rn) {
    const std::uint64_t half = std::uint64_t{1} << (shift - 1);
    threshold = (rem < half || (rem == half && (floor & 1) == 0)) ? one : 0;
  } else {
    u128 base = one - (u128(rem) << (64 - shift));
    if (bias > 0)
      threshold = base > eps64 ? base - eps64 : 0;
    else if (bias < 0)
      threshold = base + eps64 > one ? one : base + eps64;
    else
      threshold = base;
  }
  if (floor == fmt.max_mantissa() && threshold < one)
    throw OverflowError("round: upper candidate of " + x.to_string() + " exceeds " + fmt.to_string());
  const bool down = u128(draw) < threshold;
  return FixedVal{floor + (down ? 0 : 1), fmt};
}

}  // namespace

FixedVal round(const Dyadic& x, QFormat fmt, const RoundingScheme& scheme, RandomStream& rng, int v_sign) {
  std::uint64_t draw = rng.next();
  if (auto r = round_small(x, fmt, scheme, draw, v_sign)) return *r;
  auto s = x.split_at(fmt.qf);
  if (s.floor < fmt.min_mantissa() || s.floor > fmt.max_mantissa())
    throw OverflowError("round: " + x.to_string() + " outside the range of " + fmt.to_string());
  if (s.frac.is_zero()) return FixedVal{static_cast<std::int64_t>(s.floor), fmt};
  Dyadic p = prob_down_kernel(scheme, s.frac, (s.floor & 1) == 0, bias_direction(scheme, x.sign(), v_sign));
  if (s.floor == fmt.max_mantissa() && p < kOne)
    throw OverflowError("round: upper candidate of " + x.to_string() + " exceeds " + fmt.to_string());
  bool down = below_probability(p, draw);
  return FixedVal{static_cast<std::int64_t>(s.floor + (down ? 0 : 1)), fmt};
}

FixedVal round(double x, QFormat fmt, const RoundingScheme& scheme, RandomStream& rng, int v_sign) {
  return round(Dyadic::from_double(x), fmt, scheme, rng, v_sign);
}

Dyadic expected_round(const Dyadic& x, QFormat fmt, const RoundingScheme& scheme, int v_sign) {
  auto s = x.split_at(fmt.qf);
  if (s.frac.is_zero()) return x;
  Dyadic p = prob_down_kernel(scheme, s.frac, (s.floor & 1) == 0, bias_direction(scheme, x.sign(), v_sign));
  return Dyadic(s.floor, -fmt.qf) + (kOne - p).ldexp(-fmt.qf);
}

Dyadic expected_round(double x, QFormat fmt, const RoundingScheme& scheme, int v_sign) {
  return expected_round(Dyadic::from_double(x), fmt, scheme, v_sign);
}

}  // namespace lpgd
