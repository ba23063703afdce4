#pragma once

// Signed fixed-point Q[qi].[qf] numbers. A value is mantissa * 2^-qf with the
// mantissa in [-2^(qi-1+qf), 2^(qi-1+qf) - 1]. Overflow always throws.

#include <cstdint>
#include <string>
#include <string_view>

#include "lpgd/dyadic.hpp"
#include "lpgd/random_stream.hpp"
#include "lpgd/scheme.hpp"

namespace lpgd {

struct QFormat {
  int qi = 1;
  int qf = 0;

  double u() const;
  Dyadic u_exact() const { return Dyadic(1, -qf); }
  std::int64_t max_mantissa() const { return (std::int64_t{1} << (qi - 1 + qf)) - 1; }
  std::int64_t min_mantissa() const { return -(std::int64_t{1} << (qi - 1 + qf)); }
  double max_value() const;
  double min_value() const;
  std::string to_string() const;

  friend bool operator==(const QFormat&, const QFormat&) = default;
};

// qi >= 1, qf >= 0, qi + qf <= 63.
QFormat make_format(int qi, int qf);
// Parses "Q<qi>.<qf>".
QFormat parse_qformat(std::string_view text);

struct FixedVal {
  std::int64_t mantissa = 0;
  QFormat fmt;

  double value() const;
  Dyadic exact() const { return Dyadic(mantissa, -fmt.qf); }

  friend bool operator==(const FixedVal&, const FixedVal&) = default;
};

bool representable(const Dyadic& x, QFormat fmt);
bool representable(double x, QFormat fmt);
// Exact conversion; throws PreconditionError if x is off the grid.
FixedVal to_fixed(const Dyadic& x, QFormat fmt);
FixedVal to_fixed(double x, QFormat fmt);

// Largest representable value <= x. Throws OverflowError outside the range.
FixedVal floor_fx(const Dyadic& x, QFormat fmt);

// Exact within one format; FormatMismatchError across formats.
FixedVal add_exact(const FixedVal& a, const FixedVal& b);
FixedVal sub_exact(const FixedVal& a, const FixedVal& b);
FixedVal neg_exact(const FixedVal& a);
// Re-expresses a value in another format exactly (throws if not possible).
FixedVal convert_exact(const FixedVal& a, QFormat fmt);

struct MulResult {
  FixedVal value;
  Dyadic sigma;  // value - a * b, exact
};

// a * b formed exactly at qf_a + qf_b fractional bits, then rounded once.
MulResult mul_round(const FixedVal& a, const FixedVal& b, QFormat out_fmt, const RoundingScheme& scheme,
                    RandomStream& rng, int v_sign = 0);

}  // namespace lpgd
