#pragma once

// Independent verification: exhaustive rational distributions, Monte Carlo
// expectation checks, and scaling-law fits. The exhaustive enumerator
// recomputes rounding probabilities with arbitrary-precision rationals and
// shares no code with the engine.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpgd/lpfloat.hpp"
#include "lpgd/objectives.hpp"
#include "lpgd/qnum.hpp"
#include "lpgd/scheme.hpp"

namespace lpgd {

using Rational = boost::multiprecision::cpp_rational;

// Accepts "0.24", "-1.5e-3", "3/8".
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& r);

struct RationalRounding {
  Rational lower;
  Rational upper;
  Rational p_down;
};
RationalRounding rational_rounding(const Rational& x, QFormat fmt, const RoundingScheme& scheme, int v_sign = 0);

using Distribution = std::map<Rational, Rational>;
// Law of round(x1) - round(x2) with independent draws.
Distribution exhaustive_two_round_distribution(const Rational& x1, const Rational& x2, QFormat fmt,
                                               const RoundingScheme& scheme);

inline constexpr std::size_t kMinAcceptanceSamples = 10'000;
inline constexpr double kStandardErrors = 4.0;

struct McEstimate {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
  double half_width = 0.0;  // 4 std / sqrt(n)
  double expected = 0.0;
  bool pass = false;
  // |mean - expected| in standard errors (0 when std == 0 and equal).
  double deviation_se() const;
};

McEstimate summarize_samples(std::span<const double> xs, double expected);

// Engine round() against an independent rational closed form.
McEstimate check_expectation(double x, QFormat fmt, const RoundingScheme& scheme, std::size_t n, std::uint64_t seed);

// E[d^2] for d = round(t g~) in the Case II regime versus u|tg| (+ u^2 h).
McEstimate check_case2_second_moment(double g_tilde, double t, QFormat fmt, const RoundingScheme& scheme,
                                     std::size_t n, std::uint64_t seed);

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

struct BiasScaling {
  std::vector<double> u;
  std::vector<double> bias_norm;
  std::vector<double> se;
  double slope = 0.0;
  Verdict verdict = Verdict::inconclusive;
};

inline constexpr double kMinBiasSlope = 1.7;

// ||E[g~(round(x)) - grad f(x)]|| for each resolution 2^-qf in Q<qi>.<qf>.
// The input point is rounded with the scheme first. Under SR the first-order
// error terms are removed with a control variate (their coefficients are
// deterministic, so the estimator stays unbiased).
BiasScaling check_bias_scaling(const Objective& obj, std::span<const double> x, const RoundingScheme& scheme,
                               std::span<const int> qf_list, int qi, std::size_t runs, std::uint64_t seed);

struct StagnationCheck {
  int branch = 0;  // sign(x g)
  double tg = 0.0;
  double delta = 0.0;  // relative error of the d != 0 outcome
  double predicted = 0.0;
  McEstimate mc;
  bool rn_stagnates = false;
  bool pass = false;
};

// d = x - fl(x - t g) in the regime |t g / x| < u_fl.
StagnationCheck check_stagnation_regime_float(double x, double g, double t, FloatFormat fmt,
                                              const RoundingScheme& scheme, std::size_t n, std::uint64_t seed);

// f = x1^3/3 + x1^2 x2 / 2, whose first gradient entry is x1^2 + x1 x2.
ObjectivePtr make_curvature_probe();

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

// count nonrepresentable points strictly between min_value and max_value.
std::vector<double> interior_grid(QFormat fmt, std::size_t count);

// Unbiasedness, SR_eps bias, rho <= 2 t eps, and the sign of E[g^T sigma2]
// for one (format, eps) cell.
std::vector<CheckLine> kernel_grid_cell(QFormat fmt, double eps, std::size_t n, std::uint64_t seed);

// Full verification suite used by the CLI; quick trims sample counts.
std::vector<CheckLine> verify_suite(bool quick);

}  // namespace lpgd
