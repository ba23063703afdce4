#pragma once

// Instrumented gradient descent x_{k+1} = x_k - d_k with
// d = t * g_exact + t * sigma1 + sigma2, every term traced exactly.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lpgd/dyadic.hpp"
#include "lpgd/lpfloat.hpp"
#include "lpgd/objectives.hpp"
#include "lpgd/qnum.hpp"
#include "lpgd/scheme.hpp"

namespace lpgd {

enum class NumberSystem { fixed, lowfloat, reference };
std::string to_string(NumberSystem ns);
NumberSystem parse_number_system(std::string_view text);

enum class CaseLabel { I = 1, II = 2, III = 3 };
std::string to_string(CaseLabel c);

struct GDConfig {
  ObjectivePtr objective;
  std::vector<double> x0;
  double t = 0.0;
  QFormat working_fmt{8, 8};
  QFormat mul_fmt{8, 8};
  FloatFormat float_fmt{24, 8};
  RoundingScheme sigma1_scheme = RoundingScheme::sr();
  RoundingScheme sigma2_scheme = RoundingScheme::sr();
  int iterations = 100;
  NumberSystem number_system = NumberSystem::fixed;
  bool keep_traces = true;

  // Throws ConfigError / PreconditionError with a diagnostic.
  void validate() const;
  // Resolution that decides Case membership: the multiply format's u
  // (fixed) or u_fl (lowfloat); 0 for reference.
  double case_u() const;
  // Resolution of the working arithmetic (sigma1 scale).
  double working_u() const;
};

struct IterationTrace {
  int k = 0;
  std::vector<double> x_before;
  double f_value = 0.0;
  std::vector<double> g_exact;
  std::vector<double> g_tilde;
  std::vector<double> sigma1;
  std::vector<double> d;
  std::vector<double> sigma2;
  std::vector<double> r;  // NaN where g_exact_i == 0
  CaseLabel case_label = CaseLabel::I;
  std::vector<std::size_t> C1;
  std::vector<std::size_t> C2;
  std::vector<bool> nonopposite;
  std::vector<bool> bounded_error;  // |g_exact_i| >= |sigma1_i|
  std::optional<double> gamma;
  std::optional<double> theta;
  double max_abs_sigma1_over_u = 0.0;

  // Exact parts for the decomposition identity.
  Dyadic t_exact;
  std::vector<Dyadic> g_exact_x;
  std::vector<Dyadic> sigma1_x;
  std::vector<Dyadic> sigma2_x;
  std::vector<Dyadic> d_x;

  std::size_t nonopposite_violations() const;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<IterationTrace> traces;  // empty when keep_traces is false
  std::vector<double> final_x;
  std::vector<double> f_curve;  // iterations + 1 entries
  std::vector<CaseLabel> cases;  // one per step
  std::optional<double> chi;
  std::array<int, 3> case_counts{0, 0, 0};
  double max_abs_sigma1_over_u = 0.0;
  bool stagnated = false;
  int stagnation_step = -1;  // first step of the 50-step window
};

struct CaseSplit {
  CaseLabel label = CaseLabel::II;
  std::vector<std::size_t> C1;
  std::vector<std::size_t> C2;
};

// i in C1 iff |t * g_tilde_i| >= u, tested exactly.
CaseSplit classify_case(std::span<const double> g_tilde, double t, double u);

struct NonoppositeReport {
  std::vector<bool> nonopposite;    // sign(g~_i) * sign(g_i) >= 0
  std::vector<bool> bounded_error;  // |g_i| >= |g~_i - g_i|
};
NonoppositeReport check_nonopposite(std::span<const double> g_exact, std::span<const double> g_tilde);

// Rounded gradient in the working format; sigma1 exact against the double
// reference gradient.
struct RoundedGradient {
  std::vector<FixedVal> g_tilde;
  std::vector<Dyadic> sigma1;
};
RoundedGradient eval_grad_rounded(const Objective& obj, std::span<const FixedVal> x, QFormat fmt,
                                  const RoundingScheme& scheme, RandomStream rng);

// Whole-run state; x is held as doubles (exact for every supported format).
struct GDState {
  int k = 0;
  std::vector<double> x;
};

// One iteration; streams are addressed by (seed stream, k).
IterationTrace gd_step(GDState& state, const GDConfig& cfg, const RandomStream& run_stream);

RunResult run(const GDConfig& cfg, std::uint64_t seed);

inline constexpr int kStagnationWindow = 50;
inline constexpr double kStagnationGradFactor = 10.0;

}  // namespace lpgd
