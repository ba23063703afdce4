#pragma once

#include <string>
#include <string_view>

#include "lpgd/dyadic.hpp"

namespace lpgd {

enum class SchemeKind { rn, sr, sr_eps, signed_sr_eps };

// Spelled "rn" | "sr" | "sr_eps:<eps>" | "signed_sr_eps:<eps>", eps in (0, 1).
struct RoundingScheme {
  SchemeKind kind = SchemeKind::rn;
  double eps = 0.0;

  static RoundingScheme rn() { return {SchemeKind::rn, 0.0}; }
  static RoundingScheme sr() { return {SchemeKind::sr, 0.0}; }
  static RoundingScheme sr_eps(double eps);
  static RoundingScheme signed_sr_eps(double eps);

  bool stochastic() const { return kind != SchemeKind::rn; }
  bool biased() const { return kind == SchemeKind::sr_eps || kind == SchemeKind::signed_sr_eps; }
  Dyadic eps_exact() const { return Dyadic::from_double(eps); }
  std::string to_string() const;

  friend bool operator==(const RoundingScheme&, const RoundingScheme&) = default;
};

RoundingScheme parse_scheme(std::string_view text);

// Shortest decimal that round-trips the double.
std::string format_double(double v);

}  // namespace lpgd
