#include "lpgd/dyadic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

#include "lpgd/error.hpp"

namespace lpgd {

namespace {

constexpr int kOperandBits = 125;
constexpr int kResultBits = 126;

u128 uabs(i128 v) { return v < 0 ? u128(0) - u128(v) : u128(v); }

int ctz128(u128 v) {
  auto lo = static_cast<std::uint64_t>(v);
  if (lo != 0) return std::countr_zero(lo);
  return 64 + std::countr_zero(static_cast<std::uint64_t>(v >> 64));
}

}  // namespace

int bit_width(u128 v) {
  auto hi = static_cast<std::uint64_t>(v >> 64);
  if (hi != 0) return 64 + static_cast<int>(std::bit_width(hi));
  return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(v)));
}

Dyadic::Dyadic(i128 num, int exp) : num_(num), exp_(exp) { normalize(); }

void Dyadic::normalize() {
  if (num_ == 0) {
    exp_ = 0;
    return;
  }
  int tz = ctz128(uabs(num_));
  num_ >>= tz;
  exp_ += tz;
  // Keep magnitudes inside the exact-arithmetic budget.
  int excess = bit_width(uabs(num_)) - kResultBits;
  if (excess > 0) {
    num_ >>= excess;
    exp_ += excess;
  }
}

Dyadic Dyadic::from_double(double v) {
  if (!std::isfinite(v)) throw Error("Dyadic::from_double: non-finite value");
  if (v == 0.0) return {};
  const auto bits = std::bit_cast<std::uint64_t>(v);
  const int biased = static_cast<int>((bits >> 52) & 0x7ff);
  std::int64_t mant = static_cast<std::int64_t>(bits & ((std::uint64_t{1} << 52) - 1));
  int e = -1074;
  if (biased != 0) {
    mant |= std::int64_t{1} << 52;
    e = biased - 1075;
  }
  return Dyadic(bits >> 63 ? -mant : mant, e);
}

double Dyadic::to_double() const {
  if (num_ == 0) return 0.0;
  return std::ldexp(static_cast<double>(num_), exp_);
}

std::string Dyadic::to_string() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", to_double());
  return buf;
}

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
  if (a.num_ == 0) return b;
  if (b.num_ == 0) return a;
  const Dyadic& hi = a.exp_ >= b.exp_ ? a : b;  // larger exponent
  const Dyadic& lo = a.exp_ >= b.exp_ ? b : a;
  int shift = hi.exp_ - lo.exp_;
  int room = std::max(0, kOperandBits - bit_width(uabs(hi.num_)));
  if (shift <= room) {
    return Dyadic((hi.num_ << shift) + lo.num_, lo.exp_);
  }
  // Span too wide: truncate the low operand onto the shifted grid.
  int drop = shift - room;
  i128 lo_num = drop >= 127 ? (lo.num_ < 0 ? -1 : 0) : (lo.num_ >> drop);
  return Dyadic((hi.num_ << room) + lo_num, hi.exp_ - room);
}

Dyadic operator*(const Dyadic& a, const Dyadic& b) {
  if (a.num_ == 0 || b.num_ == 0) return {};
  i128 x = a.num_;
  i128 y = b.num_;
  int e = a.exp_ + b.exp_;
  int excess = bit_width(uabs(x)) + bit_width(uabs(y)) - kResultBits;
  if (excess > 0) {
    int dx = std::min(excess, bit_width(uabs(x)) - 1);
    x >>= dx;
    e += dx;
    int dy = excess - dx;
    y >>= dy;
    e += dy;
  }
  return Dyadic(x * y, e);
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
  int sa = a.sign();
  int sb = b.sign();
  if (sa != sb) return sa <=> sb;
  if (sa == 0) return std::strong_ordering::equal;
  // Same sign: compare magnitudes by top-bit position first.
  int ta = a.exp_ + bit_width(uabs(a.num_));
  int tb = b.exp_ + bit_width(uabs(b.num_));
  std::strong_ordering mag = std::strong_ordering::equal;
  if (ta != tb) {
    mag = ta <=> tb;
  } else {
    u128 ma = uabs(a.num_);
    u128 mb = uabs(b.num_);
    if (a.exp_ > b.exp_) {
      ma <<= (a.exp_ - b.exp_);
    } else {
      mb <<= (b.exp_ - a.exp_);
    }
    mag = ma <=> mb;
  }
  if (sa > 0) return mag;
  return 0 <=> mag;
}

Split Dyadic::split_at(int qf) const {
  if (num_ == 0) return {0, Dyadic()};
  int e2 = exp_ + qf;
  if (e2 >= 0) {
    if (bit_width(uabs(num_)) + e2 > 120) throw OverflowError("value too large for fixed-point split");
    return {num_ << e2, Dyadic()};
  }
  int s = -e2;
  if (s >= 127) {
    i128 fl = num_ < 0 ? -1 : 0;
    return {fl, Dyadic(num_, -s) - Dyadic(fl, 0)};
  }
  i128 fl = num_ >> s;
  i128 rem = num_ - (fl << s);
  return {fl, Dyadic(rem, -s)};
}

bool below_probability(const Dyadic& p, std::uint64_t u64) {
  if (p.sign() <= 0) return false;
  if (p >= Dyadic(1, 0)) return true;
  // 0 < p < 1 so exp < 0.
  i128 n = p.num();
  int e = p.exp() + 64;
  u128 threshold = 0;
  if (e >= 0) {
    threshold = u128(n) << e;
  } else {
    int s = -e;
    if (s >= 127) {
      threshold = 1;
    } else {
      u128 mask = (u128(1) << s) - 1;
      threshold = (u128(n) >> s) + ((u128(n) & mask) != 0 ? 1 : 0);
    }
  }
  return u128(u64) < threshold;
}

}  // namespace lpgd
