#include "lpgd/scheme.hpp"

#include <charconv>
#include <cmath>

#include "lpgd/error.hpp"

namespace lpgd {

namespace {

double checked_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must lie in (0, 1), got " + format_double(eps));
  return eps;
}

}  // namespace

RoundingScheme RoundingScheme::sr_eps(double eps) { return {SchemeKind::sr_eps, checked_eps(eps)}; }
RoundingScheme RoundingScheme::signed_sr_eps(double eps) { return {SchemeKind::signed_sr_eps, checked_eps(eps)}; }

std::string RoundingScheme::to_string() const {
  switch (kind) {
    case SchemeKind::rn:
      return "rn";
    case SchemeKind::sr:
      return "sr";
    case SchemeKind::sr_eps:
      return "sr_eps:" + format_double(eps);
    case SchemeKind::signed_sr_eps:
      return "signed_sr_eps:" + format_double(eps);
  }
  return "?";
}

RoundingScheme parse_scheme(std::string_view text) {
  if (text == "rn") return RoundingScheme::rn();
  if (text == "sr") return RoundingScheme::sr();
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("unknown rounding scheme '" + std::string(text) + "'");
  std::string_view head = text.substr(0, colon);
  std::string_view tail = text.substr(colon + 1);
  double eps = 0.0;
  auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), eps);
  if (ec != std::errc() || ptr != tail.data() + tail.size() || tail.empty())
    throw ConfigError("bad eps in scheme '" + std::string(text) + "'");
  if (head == "sr_eps") return RoundingScheme::sr_eps(eps);
  if (head == "signed_sr_eps") return RoundingScheme::signed_sr_eps(eps);
  throw ConfigError("unknown rounding scheme '" + std::string(text) + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace lpgd
