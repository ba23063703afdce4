#pragma once

// Exact dyadic rationals num * 2^exp, used for every pre-rounding value.
// All products of two fixed-point mantissas are exact. Sums stay exact while
// the combined bit span fits in 125 bits; past that the operand with the
// smaller exponent loses its lowest bits (floor).

#include <compare>
#include <cstdint>
#include <string>

namespace lpgd {

using i128 = __int128;
using u128 = unsigned __int128;

class Dyadic {
 public:
  constexpr Dyadic() = default;
  Dyadic(i128 num, int exp);

  static Dyadic from_int(std::int64_t v) { return Dyadic(v, 0); }
  // Exact for every finite double. Throws on inf/nan.
  static Dyadic from_double(double v);

  i128 num() const { return num_; }
  int exp() const { return exp_; }

  bool is_zero() const { return num_ == 0; }
  int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }
  // True when the value is an integer multiple of 2^-qf.
  bool on_grid(int qf) const { return num_ == 0 || exp_ >= -qf; }

  double to_double() const;
  std::string to_string() const;

  Dyadic operator-() const { return Dyadic(-num_, exp_); }
  friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b);
  Dyadic& operator+=(const Dyadic& o) { return *this = *this + o; }
  Dyadic& operator-=(const Dyadic& o) { return *this = *this - o; }

  // Multiply by 2^k.
  Dyadic ldexp(int k) const { return num_ == 0 ? Dyadic() : Dyadic(num_, exp_ + k); }
  Dyadic abs() const { return num_ < 0 ? -*this : *this; }

  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.num_ == b.num_ && a.exp_ == b.exp_;
  }
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);

  // Split x * 2^qf into floor (integer) and fractional part in [0, 1).
  struct Split split_at(int qf) const;

 private:
  void normalize();
  i128 num_ = 0;
  int exp_ = 0;
};

struct Split {
  i128 floor;
  Dyadic frac;
};

int bit_width(u128 v);

// Bernoulli decision: true iff U < p * 2^64, U uniform on [0, 2^64).
// p is clamped to [0, 1].
bool below_probability(const Dyadic& p, std::uint64_t u64);

}  // namespace lpgd
