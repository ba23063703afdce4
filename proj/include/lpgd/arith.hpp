#pragma once

// Arithmetic policies for gradient recipes. A recipe is written once against
// the policy interface (mul, add, sub, neg, scale, cst, apply, to_double) and
// evaluated under fixed-point, low-precision float, or exact double
// arithmetic. Rounding "slots" are mul, scale, cst and apply; add/sub/neg
// are exact in fixed point and rounded in float.

#include <cstddef>
#include <vector>

#include "lpgd/lpfloat.hpp"
#include "lpgd/qnum.hpp"
#include "lpgd/random_stream.hpp"
#include "lpgd/rounding.hpp"
#include "lpgd/scheme.hpp"

namespace lpgd {

class FixedArith {
 public:
  using value = FixedVal;

  FixedArith(QFormat fmt, RoundingScheme scheme, RandomStream rng)
      : fmt_(fmt), scheme_(scheme), rng_(rng) {}

  QFormat format() const { return fmt_; }

  value mul(const value& a, const value& b) {
    return rounded(Dyadic(i128(a.mantissa) * b.mantissa, -(a.fmt.qf + b.fmt.qf)));
  }
  value add(const value& a, const value& b) const { return add_exact(a, b); }
  value sub(const value& a, const value& b) const { return sub_exact(a, b); }
  value neg(const value& a) const { return neg_exact(a); }
  // a * c with c taken at full double precision, one rounding.
  value scale(const value& a, double c) { return rounded(a.exact() * Dyadic::from_double(c)); }
  value cst(double c) { return rounded(Dyadic::from_double(c)); }
  template <class F>
  value apply(const value& a, F&& fn) {
    return rounded(Dyadic::from_double(fn(a.value())));
  }
  value zero() const { return FixedVal{0, fmt_}; }
  double to_double(const value& a) const { return a.value(); }

  // Keep the rounding error of every slot; used by control-variate oracles.
  void record_errors(bool on) { record_ = on; }
  const std::vector<double>& errors() const { return errors_; }
  std::size_t slots() const { return slots_; }

 private:
  value rounded(const Dyadic& x) {
    ++slots_;
    FixedVal r = round(x, fmt_, scheme_, rng_, x.sign());
    if (record_) errors_.push_back((r.exact() - x).to_double());
    return r;
  }

  QFormat fmt_;
  RoundingScheme scheme_;
  RandomStream rng_;
  bool record_ = false;
  std::vector<double> errors_;
  std::size_t slots_ = 0;
};

class FloatArith {
 public:
  using value = double;

  FloatArith(FloatFormat fmt, RoundingScheme scheme, RandomStream rng) : fmt_(fmt), scheme_(scheme), rng_(rng) {}

  FloatFormat format() const { return fmt_; }

  value mul(value a, value b) { return rounded(two_prod(a, b)); }
  value add(value a, value b) { return rounded(two_sum(a, b)); }
  value sub(value a, value b) { return rounded(two_sum(a, -b)); }
  value neg(value a) const { return -a; }
  value scale(value a, double c) { return rounded(two_prod(a, c)); }
  value cst(double c) { return rounded({c, 0.0}); }
  template <class F>
  value apply(value a, F&& fn) {
    return rounded({fn(a), 0.0});
  }
  value zero() const { return 0.0; }
  double to_double(value a) const { return a; }
  std::size_t slots() const { return slots_; }

 private:
  value rounded(const ExactPair& x) {
    ++slots_;
    return fl_round(x, fmt_, scheme_, rng_, x.sign()).value;
  }

  FloatFormat fmt_;
  RoundingScheme scheme_;
  RandomStream rng_;
  std::size_t slots_ = 0;
};

// Exact double arithmetic with optional additive perturbations injected at
// fixed-point rounding slots (same numbering as FixedArith).
class RefArith {
 public:
  using value = double;

  value mul(value a, value b) { return slot(a * b); }
  value add(value a, value b) const { return a + b; }
  value sub(value a, value b) const { return a - b; }
  value neg(value a) const { return -a; }
  value scale(value a, double c) { return slot(a * c); }
  value cst(double c) { return slot(c); }
  template <class F>
  value apply(value a, F&& fn) {
    return slot(fn(a));
  }
  value zero() const { return 0.0; }
  double to_double(value a) const { return a; }

  void perturb(std::size_t slot_index, double h) {
    target_ = slot_index;
    h_ = h;
  }
  std::size_t slots() const { return slots_; }

 private:
  value slot(value v) {
    std::size_t i = slots_++;
    return i == target_ ? v + h_ : v;
  }

  std::size_t slots_ = 0;
  std::size_t target_ = static_cast<std::size_t>(-1);
  double h_ = 0.0;
};

}  // namespace lpgd
