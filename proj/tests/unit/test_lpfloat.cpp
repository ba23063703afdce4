// Emulated low-precision floating point.

#include <doctest.h>

#include <cmath>

#include "lpgd/error.hpp"
#include "lpgd/lpfloat.hpp"
#include "lpgd/random_stream.hpp"

using namespace lpgd;

namespace {

const FloatFormat F8 = make_float_format(3, 5);  // fp8e5

}  // namespace

TEST_SUITE("lpfloat") {

TEST_CASE("format parameters") {
  CHECK(parse_float_format("fp8e5") == F8);
  CHECK(F8.total_bits() == 8);
  CHECK(F8.u() == 0.125);
  CHECK(F8.emin() == -14);
  CHECK(F8.min_normal() == std::ldexp(1.0, -14));
  CHECK(F8.min_subnormal() == std::ldexp(1.0, -16));
  CHECK(F8.max_value() == 1.75 * std::ldexp(1.0, 15));
  CHECK(parse_float_format("binary32") == make_float_format(24, 8));
  CHECK(parse_float_format("fp16e5") == make_float_format(11, 5));
  CHECK(F8.to_string() == "fp8e5");
  CHECK_THROWS_AS(parse_float_format("fp8"), ConfigError);
  CHECK_THROWS_AS(parse_float_format("binary64"), ConfigError);
}

TEST_CASE("error-free transforms") {
  RandomStream rng(3);
  for (int i = 0; i < 2000; ++i) {
    double a = (rng.uniform() - 0.5) * 1e3, b = (rng.uniform() - 0.5) * 1e-5;
    ExactPair s = two_sum(a, b);
    CHECK(Dyadic::from_double(s.hi) + Dyadic::from_double(s.lo) == Dyadic::from_double(a) + Dyadic::from_double(b));
    ExactPair p = two_prod(a, b);
    CHECK(Dyadic::from_double(p.hi) + Dyadic::from_double(p.lo) == Dyadic::from_double(a) * Dyadic::from_double(b));
  }
}

TEST_CASE("representable inputs and the identity subtraction") {
  RandomStream rng(5);
  for (double x : {1.0, 1.25, -1.75, 0.0, std::ldexp(1.0, -16), 57344.0}) {
    for (auto s : {RoundingScheme::rn(), RoundingScheme::sr(), RoundingScheme::sr_eps(0.5)}) {
      CHECK(fl_round(x, F8, s, rng, 1).value == x);
      CHECK(fl_sub_round(x, 0.0, F8, s, rng, 1).value == x);
    }
  }
}

TEST_CASE("RN stagnates below half a gap") {
  RandomStream rng(1);
  double x = 1.0, tg = F8.u() / 8;
  CHECK(fl_sub_round(x, tg, F8, RoundingScheme::rn(), rng).value == x);
  CHECK(fl_sub_round(x, -tg, F8, RoundingScheme::rn(), rng).value == x);
  double n = 0;
  for (int i = 0; i < 20000; ++i) n += 1.0 - fl_sub_round(x, tg, F8, RoundingScheme::sr(), rng).value;
  // d is 0 or the 0.125 gap below 1, so E[d] = tg.
  CHECK(std::fabs(n / 20000 - tg) < 4 * 0.125 * std::sqrt(0.125 * 0.875 / 20000));
}

TEST_CASE("candidates straddle x one gap apart") {
  RandomStream rng(7);
  for (int i = 0; i < 20000; ++i) {
    double x = std::ldexp(rng.uniform() * 2 - 1, static_cast<int>(rng.next() % 36) - 22);
    FlCandidates c = fl_candidates({x, 0.0}, F8);
    CHECK(c.lower <= x);
    CHECK(x <= c.upper);
    CHECK(c.upper - c.lower == c.gap);
    int e;
    std::frexp(c.lower != 0 ? c.lower : c.upper, &e);
    // Gap is the ulp at the lower candidate's exponent, or at the upper's on
    // a power-of-two boundary.
    bool ok = c.gap == F8.gap_at_exponent(e - 1) || c.gap == F8.gap_at_exponent(e - 2) ||
              c.gap == F8.min_subnormal();
    CHECK(ok);
    CHECK(fl_representable(c.lower, F8));
    CHECK(fl_representable(c.upper, F8));
  }
}

TEST_CASE("relative error stays below 2 u") {
  RandomStream rng(11);
  for (int i = 0; i < 20000; ++i) {
    double x = std::ldexp(1.0 + rng.uniform(), static_cast<int>(rng.next() % 20) - 10);
    FlResult r = fl_round(x, F8, RoundingScheme::sr(), rng);
    CHECK(r.delta < 2 * F8.u());
    FlResult q = fl_round(x, F8, RoundingScheme::rn(), rng);
    CHECK(q.delta <= F8.u());
  }
}

TEST_CASE("overflow is an error") {
  RandomStream rng(1);
  CHECK_THROWS_AS(fl_round(1e6, F8, RoundingScheme::rn(), rng), OverflowError);
  CHECK_THROWS_AS(fl_add_round(57344.0, 57344.0, F8, RoundingScheme::rn(), rng), OverflowError);
}

TEST_CASE("SR expectation in float") {
  double x = 1.1;
  ExactPair p{x, 0.0};
  CHECK(fl_expected_round(p, F8, RoundingScheme::sr()) == doctest::Approx(x).epsilon(1e-14));
  double biased = fl_expected_round(p, F8, RoundingScheme::sr_eps(0.25));
  CHECK(biased == doctest::Approx(x + 0.25 * 0.25).epsilon(1e-14));
}

}  // TEST_SUITE
