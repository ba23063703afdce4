// Independent oracles: exact distributions and Monte Carlo checks.

#include <doctest.h>

#include <cmath>

#include "lpgd/oracle.hpp"

using namespace lpgd;

namespace {

const QFormat Q11 = make_format(1, 1);

Rational R(const char* s) { return parse_rational(s); }

Rational total(const Distribution& d) {
  Rational s = 0;
  for (const auto& [v, p] : d) s += p;
  return s;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("rational parsing") {
  CHECK(R("0.24") == Rational(6, 25));
  CHECK(R("-1.5e-3") == Rational(-3, 2000));
  CHECK(R("3/8") == Rational(3, 8));
  CHECK_THROWS(R("abc"));
}

TEST_CASE("exhaustive two-round distributions") {
  Distribution d = exhaustive_two_round_distribution(R("0.24"), R("0.26"), Q11, RoundingScheme::sr());
  REQUIRE(d.size() == 3);
  CHECK(d.at(R("0.5")) == R("0.2304"));
  CHECK(d.at(0) == R("0.4992"));
  CHECK(d.at(R("-0.5")) == R("0.2704"));
  CHECK(total(d) == 1);

  Distribution same = exhaustive_two_round_distribution(R("0.5"), R("0.5"), Q11, RoundingScheme::sr());
  CHECK(same.size() == 1);
  CHECK(same.at(0) == 1);

  Distribution rn = exhaustive_two_round_distribution(R("0.26"), R("0.24"), Q11, RoundingScheme::rn());
  CHECK(rn.size() == 1);
  CHECK(rn.at(R("0.5")) == 1);

  for (auto s : {RoundingScheme::sr_eps(0.2), RoundingScheme::sr_eps(0.6), RoundingScheme::signed_sr_eps(0.4)})
    CHECK(total(exhaustive_two_round_distribution(R("-0.13"), R("0.37"), Q11, s)) == 1);
}

TEST_CASE("oracle rounding agrees with the engine kernel") {
  RandomStream rng(3);
  const QFormat f = make_format(8, 8);
  for (int i = 0; i < 500; ++i) {
    double x = (rng.uniform() - 0.5) * 200;
    for (auto s : {RoundingScheme::sr(), RoundingScheme::sr_eps(0.4), RoundingScheme::rn()}) {
      RationalRounding rr = rational_rounding(parse_rational(format_double(x)), f, s);
      // The shortest decimal may differ from the double; compare in double.
      CHECK(static_cast<double>(rr.p_down) == doctest::Approx(prob_round_down(x, f, s).to_double()).epsilon(1e-9));
    }
  }
}

TEST_CASE("expectation checks") {
  CHECK(check_expectation(0.24, Q11, RoundingScheme::sr(), 20000, 1).pass);
  McEstimate a = check_expectation(0.26, Q11, RoundingScheme::sr_eps(0.4), 20000, 2);
  CHECK(a.pass);
  CHECK(a.expected == doctest::Approx(0.46).epsilon(1e-12));
  McEstimate b = check_expectation(-0.26, Q11, RoundingScheme::sr_eps(0.4), 20000, 3);
  CHECK(b.pass);
  CHECK(b.expected == doctest::Approx(-0.46).epsilon(1e-12));
  CHECK_THROWS(check_expectation(0.24, Q11, RoundingScheme::sr(), 100, 1));
}

TEST_CASE("case II second moments") {
  const QFormat f = make_format(8, 8);
  const double u = f.u(), t = 1.0 / 16;
  McEstimate half = check_case2_second_moment(u / 2 / t, t, f, RoundingScheme::sr(), 20000, 1);
  CHECK(half.pass);
  CHECK(half.expected == u * u / 2);
  McEstimate zero = check_case2_second_moment(0.0, t, f, RoundingScheme::sr(), 20000, 2);
  CHECK(zero.pass);
  CHECK(zero.expected == 0.0);
  McEstimate biased = check_case2_second_moment(0.3 * u / t, t, f, RoundingScheme::sr_eps(0.2), 20000, 3);
  CHECK(biased.pass);
  CHECK(biased.expected == doctest::Approx(0.5 * u * u).epsilon(1e-12));
}

TEST_CASE("bias scaling: affine gradients are inconclusive") {
  auto q = make_quadratic({1, 1}, {0, 0});
  std::vector<double> x{0.3, 0.7};
  std::vector<int> qf{6, 8, 10};
  BiasScaling b = check_bias_scaling(*q, x, RoundingScheme::sr(), qf, 4, 2000, 1);
  CHECK(b.verdict == Verdict::inconclusive);
}

TEST_CASE("bias scaling on the curvature probe") {
  auto p = make_curvature_probe();
  std::vector<double> x{0.3, 0.7};
  std::vector<int> qf{6, 8, 10};
  BiasScaling b = check_bias_scaling(*p, x, RoundingScheme::sr(), qf, 4, 10000, 1);
  CHECK(b.verdict == Verdict::pass);
  CHECK(b.slope >= kMinBiasSlope);
}

TEST_CASE("float stagnation branches") {
  const FloatFormat f8 = make_float_format(3, 5);
  StagnationCheck sr = check_stagnation_regime_float(1.0, 1.0, f8.u() / 8, f8, RoundingScheme::sr(), 20000, 1);
  CHECK(sr.rn_stagnates);
  CHECK(sr.pass);
  for (double g : {1.0, -1.0}) {
    StagnationCheck s =
        check_stagnation_regime_float(1.0, g, 1.0 / 64, f8, RoundingScheme::signed_sr_eps(0.4), 20000, 2);
    CHECK(s.branch == (g > 0 ? 1 : -1));
    CHECK(s.delta > 0.0);
    CHECK(s.delta < 2 * f8.u());
    CHECK(s.pass);
  }
}

TEST_CASE("interior grid avoids representable points") {
  for (QFormat f : {Q11, make_format(8, 8), make_format(15, 8)}) {
    auto g = interior_grid(f, 50);
    CHECK(g.size() == 50);
    for (double x : g) {
      CHECK_FALSE(representable(x, f));
      CHECK(x > f.min_value());
      CHECK(x < f.max_value());
    }
  }
}

TEST_CASE("kernel grid cell") {
  for (const auto& line : kernel_grid_cell(make_format(8, 8), 0.4, 10000, 5)) {
    INFO(line.name << ": " << line.detail);
    CHECK(line.pass);
  }
}

}  // TEST_SUITE
