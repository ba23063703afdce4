#include "lpgd/qnum.hpp"

#include <charconv>
#include <cmath>

#include "lpgd/error.hpp"
#include "lpgd/rounding.hpp"

namespace lpgd {

double QFormat::u() const { return std::ldexp(1.0, -qf); }
double QFormat::max_value() const { return std::ldexp(static_cast<double>(max_mantissa()), -qf); }
double QFormat::min_value() const { return std::ldexp(static_cast<double>(min_mantissa()), -qf); }
std::string QFormat::to_string() const { return "Q" + std::to_string(qi) + "." + std::to_string(qf); }

QFormat make_format(int qi, int qf) {
  if (qi < 1 || qf < 0 || qi + qf > 63)
    throw ConfigError("invalid fixed-point format Q" + std::to_string(qi) + "." + std::to_string(qf) +
                      " (need qi >= 1, qf >= 0, qi + qf <= 63)");
  return QFormat{qi, qf};
}

QFormat parse_qformat(std::string_view text) {
  auto fail = [&] { return ConfigError("bad fixed-point format '" + std::string(text) + "', expected Q<qi>.<qf>"); };
  if (text.size() < 4 || text[0] != 'Q') throw fail();
  auto dot = text.find('.');
  if (dot == std::string_view::npos) throw fail();
  int qi = 0;
  int qf = 0;
  auto r1 = std::from_chars(text.data() + 1, text.data() + dot, qi);
  auto r2 = std::from_chars(text.data() + dot + 1, text.data() + text.size(), qf);
  if (r1.ec != std::errc() || r1.ptr != text.data() + dot || r2.ec != std::errc() ||
      r2.ptr != text.data() + text.size())
    throw fail();
  return make_format(qi, qf);
}

double FixedVal::value() const { return std::ldexp(static_cast<double>(mantissa), -fmt.qf); }

namespace {

FixedVal checked(i128 mant, QFormat fmt, const char* what) {
  if (mant > fmt.max_mantissa() || mant < fmt.min_mantissa())
    throw OverflowError(std::string(what) + ": result outside the range of " + fmt.to_string());
  return FixedVal{static_cast<std::int64_t>(mant), fmt};
}

void same_format(const FixedVal& a, const FixedVal& b, const char* what) {
  if (!(a.fmt == b.fmt))
    throw FormatMismatchError(std::string(what) + ": format mismatch " + a.fmt.to_string() + " vs " +
                              b.fmt.to_string());
}

}  // namespace

bool representable(const Dyadic& x, QFormat fmt) {
  if (!x.on_grid(fmt.qf)) return false;
  auto s = x.split_at(fmt.qf);
  return s.floor >= fmt.min_mantissa() && s.floor <= fmt.max_mantissa();
}

bool representable(double x, QFormat fmt) { return std::isfinite(x) && representable(Dyadic::from_double(x), fmt); }

FixedVal to_fixed(const Dyadic& x, QFormat fmt) {
  if (!x.on_grid(fmt.qf))
    throw PreconditionError(x.to_string() + " is not representable in " + fmt.to_string());
  return checked(x.split_at(fmt.qf).floor, fmt, "to_fixed");
}

FixedVal to_fixed(double x, QFormat fmt) {
  if (!std::isfinite(x)) throw PreconditionError("non-finite value for " + fmt.to_string());
  return to_fixed(Dyadic::from_double(x), fmt);
}

FixedVal floor_fx(const Dyadic& x, QFormat fmt) { return checked(x.split_at(fmt.qf).floor, fmt, "floor_fx"); }

FixedVal add_exact(const FixedVal& a, const FixedVal& b) {
  same_format(a, b, "add_exact");
  return checked(i128(a.mantissa) + b.mantissa, a.fmt, "add_exact");
}

FixedVal sub_exact(const FixedVal& a, const FixedVal& b) {
  same_format(a, b, "sub_exact");
  return checked(i128(a.mantissa) - b.mantissa, a.fmt, "sub_exact");
}

FixedVal neg_exact(const FixedVal& a) { return checked(-i128(a.mantissa), a.fmt, "neg_exact"); }

FixedVal convert_exact(const FixedVal& a, QFormat fmt) { return to_fixed(a.exact(), fmt); }

MulResult mul_round(const FixedVal& a, const FixedVal& b, QFormat out_fmt, const RoundingScheme& scheme,
                    RandomStream& rng, int v_sign) {
  Dyadic prod(i128(a.mantissa) * b.mantissa, -(a.fmt.qf + b.fmt.qf));
  FixedVal r = round(prod, out_fmt, scheme, rng, v_sign);
  return {r, r.exact() - prod};
}

}  // namespace lpgd
