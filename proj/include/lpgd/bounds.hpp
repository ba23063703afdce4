#pragma once

// Per-iteration rate factors and cumulative bound envelopes on E[f - f*],
// plus a grid estimator of the PL and smoothness constants.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lpgd/gdengine.hpp"

namespace lpgd {

// min_i (1 + r_i). Throws PreconditionError when every g_exact_i is zero.
double gamma_of(const IterationTrace& tr);
// min over nonzero g_i of (2|g_i| - L u) / |g_i|; nullopt when g == 0.
std::optional<double> theta_of(std::span<const double> g, double L, double u);

// Ensemble of traces at one iteration, one per run. Needs >= 30 runs.
using EnsembleStep = std::span<const IterationTrace* const>;
inline constexpr std::size_t kMinEnsemble = 30;

// min_i n E[sigma2_i g_i] / E[||g||^2] over coordinates where t g~_i was
// rounded in some run, using E[sigma2_i | g~] in place of the draw; nullopt
// when E[||g||^2] == 0 or nothing was rounded.
std::optional<double> rho_of(EnsembleStep ens, const RoundingScheme& scheme, QFormat mul_fmt);
// sum_{i in C2} t (theta - 1) E[g_i^2] / E[||g||^2].
double alpha_of(EnsembleStep ens, std::span<const std::size_t> C2, double theta, double t);

struct BetaH {
  std::optional<double> beta;  // min_i h_i over coordinates with draws
  std::vector<double> h;       // NaN where no draw of a coordinate was rounded
  std::vector<double> p_unclamped;
  std::vector<double> p_clamped;
};
// h_i = eps P(unclamped) + E[omega; clamped], from the t * g~_i draws.
BetaH beta_and_h_of(EnsembleStep ens, const RoundingScheme& scheme, QFormat mul_fmt);

struct BoundParams {
  double t = 0.0;
  double L = 0.0;
  double mu = 0.0;
  std::optional<double> eps;  // set when sigma2 uses SR_eps
};

struct BoundSeries {
  std::vector<std::optional<double>> gamma;
  std::vector<std::optional<double>> theta;
  std::vector<double> alpha;
  std::vector<std::optional<double>> rho;
  std::vector<std::optional<double>> beta;
  std::vector<CaseLabel> cases;  // modal case per step
  double tau1 = 0.0;
  double tau2 = 0.0;
};

// Ensemble factors from runs that kept their traces.
BoundSeries bound_series(std::span<const RunResult> runs, const GDConfig& cfg);

// Per-step factor for one case.
double bound_factor(CaseLabel c, const BoundSeries& s, std::size_t j, const BoundParams& p);
// envelope[0] = f0_gap, envelope[k+1] = envelope[k] * factor_k. Throws
// PreconditionError when a stepsize precondition for a case in the sequence
// fails.
std::vector<double> bound_envelope(std::span<const CaseLabel> cases, const BoundSeries& s, const BoundParams& p,
                                   double f0_gap);
// f0_gap * (1 - t mu)^k, the Case I SR envelope.
std::vector<double> case1_sr_envelope(std::size_t steps, const BoundParams& p, double f0_gap);
// f0_gap * prod_j (1 - t mu gamma_j).
std::vector<double> case1_gamma_envelope(std::span<const double> gammas, const BoundParams& p, double f0_gap);

struct PlEstimate {
  double L_hat = 0.0;
  double mu_hat = 0.0;
  std::size_t points = 0;
  std::string method;  // "tensor" or "planes"
};

// Axis-neighbour difference quotients give L_hat; mu_hat is the minimum of
// ||grad f||^2 / (2 (f - f*)) over grid points with f - f* >= 1e-10. Full
// tensor grids are used up to kMaxTensorPoints; beyond that, every 2-D
// coordinate plane through the box centre.
inline constexpr std::size_t kMaxTensorPoints = 2'000'000;
PlEstimate estimate_pl_constants(const Objective& obj, std::span<const std::pair<double, double>> box,
                                 std::size_t grid);

}  // namespace lpgd
