#include "lpgd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lpgd/error.hpp"
#include "lpgd/rounding.hpp"

namespace lpgd {

double gamma_of(const IterationTrace& tr) {
  if (!tr.gamma) throw PreconditionError("gamma_of: exact gradient is zero in every coordinate");
  return *tr.gamma;
}

std::optional<double> theta_of(std::span<const double> g, double L, double u) {
  std::optional<double> best;
  for (double gi : g) {
    if (gi == 0.0) continue;
    double a = std::fabs(gi);
    double v = (2 * a - L * u) / a;
    best = best ? std::min(*best, v) : v;
  }
  return best;
}

namespace {

void require_ensemble(EnsembleStep ens, const char* who) {
  if (ens.size() < kMinEnsemble)
    throw PreconditionError(std::string(who) + ": ensemble of " + std::to_string(ens.size()) + " runs, need >= " +
                            std::to_string(kMinEnsemble));
}

double mean_sq_norm(EnsembleStep ens) {
  double s = 0;
  for (const auto* tr : ens)
    for (double g : tr->g_exact) s += g * g;
  return s / static_cast<double>(ens.size());
}

double mean_norm(EnsembleStep ens) {
  double s = 0;
  for (const auto* tr : ens) {
    double q = 0;
    for (double g : tr->g_exact) q += g * g;
    s += std::sqrt(q);
  }
  return s / static_cast<double>(ens.size());
}

}  // namespace

std::optional<double> rho_of(EnsembleStep ens, const RoundingScheme& scheme, QFormat mul_fmt) {
  require_ensemble(ens, "rho_of");
  double eg2 = mean_sq_norm(ens);
  if (eg2 == 0.0) return std::nullopt;
  const std::size_t n = ens.front()->g_exact.size();
  std::optional<double> best;
  for (std::size_t i = 0; i < n; ++i) {
    // sigma2_i is replaced by its exact conditional mean given the run's
    // state; the estimate stays unbiased and loses the rounding noise.
    double s = 0;
    bool rounded = false;
    for (const auto* tr : ens) {
      Dyadic x = tr->t_exact * Dyadic::from_double(tr->g_tilde[i]);
      if (x.on_grid(mul_fmt.qf)) continue;
      rounded = true;
      int v = tr->g_tilde[i] > 0 ? 1 : -1;
      s += (expected_round(x, mul_fmt, scheme, v) - x).to_double() * tr->g_exact[i];
    }
    if (!rounded) continue;  // no rounding event: the coordinate carries no sigma2
    double v = static_cast<double>(n) * (s / static_cast<double>(ens.size())) / eg2;
    best = best ? std::min(*best, v) : v;
  }
  return best;
}

double alpha_of(EnsembleStep ens, std::span<const std::size_t> C2, double theta, double t) {
  if (ens.empty()) throw PreconditionError("alpha_of: empty ensemble");
  double eg2 = mean_sq_norm(ens);
  if (eg2 == 0.0) return 0.0;
  double s = 0;
  for (std::size_t i : C2) {
    double e = 0;
    for (const auto* tr : ens) e += tr->g_exact[i] * tr->g_exact[i];
    s += e / static_cast<double>(ens.size());
  }
  return t * (theta - 1.0) * s / eg2;
}

BetaH beta_and_h_of(EnsembleStep ens, const RoundingScheme& scheme, QFormat mul_fmt) {
  if (ens.empty()) throw PreconditionError("beta_and_h_of: empty ensemble");
  const std::size_t n = ens.front()->g_tilde.size();
  const Dyadic one(1, 0);
  const double eps = scheme.biased() ? scheme.eps : 0.0;
  BetaH out;
  out.h.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.p_unclamped.assign(n, 0.0);
  out.p_clamped.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double hsum = 0;
    std::size_t draws = 0;
    std::size_t unclamped = 0;
    std::size_t clamped = 0;
    std::size_t exact = 0;
    for (const auto* tr : ens) {
      if (tr->g_tilde[i] == 0.0) continue;
      Dyadic x = tr->t_exact * Dyadic::from_double(tr->g_tilde[i]);
      ++draws;
      auto sp = x.split_at(mul_fmt.qf);
      if (sp.frac.is_zero()) {
        ++clamped;  // exact: omega = 0
        ++exact;
        continue;
      }
      int v = tr->g_tilde[i] > 0 ? 1 : -1;
      Dyadic p = prob_round_down(x, mul_fmt, scheme, v);
      if (p.is_zero()) {
        ++clamped;
        hsum += (one - sp.frac).to_double();  // always rounds up
      } else if (p == one) {
        ++clamped;
        hsum += sp.frac.to_double();  // always rounds down
      } else {
        ++unclamped;
        hsum += eps;
      }
    }
    if (draws == exact) continue;  // nothing was rounded
    out.h[i] = hsum / static_cast<double>(draws);
    out.p_unclamped[i] = static_cast<double>(unclamped) / static_cast<double>(draws);
    out.p_clamped[i] = static_cast<double>(clamped) / static_cast<double>(draws);
    out.beta = out.beta ? std::min(*out.beta, out.h[i]) : out.h[i];
  }
  return out;
}

BoundSeries bound_series(std::span<const RunResult> runs, const GDConfig& cfg) {
  BoundSeries s;
  if (runs.empty()) return s;
  std::size_t steps = runs.front().traces.size();
  for (const auto& r : runs) steps = std::min(steps, r.traces.size());
  const double u = cfg.case_u();
  std::optional<double> tau1;
  std::optional<double> tau2;
  std::vector<const IterationTrace*> ens;
  for (std::size_t j = 0; j < steps; ++j) {
    ens.clear();
    std::array<int, 3> counts{0, 0, 0};
    for (const auto& r : runs) {
      ens.push_back(&r.traces[j]);
      counts[static_cast<int>(r.traces[j].case_label) - 1] += 1;
    }
    auto mode = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    s.cases.push_back(static_cast<CaseLabel>(mode + 1));

    std::optional<double> g;
    std::optional<double> th;
    for (const auto* tr : ens) {
      if (tr->gamma) g = g ? std::min(*g, *tr->gamma) : *tr->gamma;
      if (tr->theta) th = th ? std::min(*th, *tr->theta) : *tr->theta;
    }
    s.gamma.push_back(g);
    s.theta.push_back(th);

    const std::size_t n = ens.front()->g_exact.size();
    std::vector<std::size_t> c2;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t in = 0;
      for (const auto* tr : ens) in += std::count(tr->C2.begin(), tr->C2.end(), i);
      if (2 * in > ens.size()) c2.push_back(i);
    }
    s.alpha.push_back(th ? alpha_of(ens, c2, *th, cfg.t) : 0.0);

    if (ens.size() >= kMinEnsemble && cfg.number_system == NumberSystem::fixed) {
      auto rho = rho_of(ens, cfg.sigma2_scheme, cfg.mul_fmt);
      s.rho.push_back(rho);
      // The rho <= 2 t eps bound and tau1 concern Case I steps only.
      if (rho && counts[0] == static_cast<int>(ens.size())) tau1 = tau1 ? std::min(*tau1, *rho) : *rho;
      auto bh = beta_and_h_of(ens, cfg.sigma2_scheme, cfg.mul_fmt);
      s.beta.push_back(bh.beta);
      double eg2 = mean_sq_norm(ens);
      // tau2 enters the Case II / III factors only.
      if (bh.beta && eg2 > 0 && s.cases.back() != CaseLabel::I) {
        double v = *bh.beta * u * mean_norm(ens) / eg2;
        tau2 = tau2 ? std::min(*tau2, v) : v;
      }
    } else {
      s.rho.push_back(std::nullopt);
      s.beta.push_back(std::nullopt);
    }
  }
  s.tau1 = tau1.value_or(0.0);
  s.tau2 = tau2.value_or(0.0);
  return s;
}

double bound_factor(CaseLabel c, const BoundSeries& s, std::size_t j, const BoundParams& p) {
  const bool biased = p.eps.has_value();
  const double theta_v = j < s.theta.size() && s.theta[j] ? *s.theta[j] : -1.0;
  const std::optional<double> theta = theta_v >= 0 ? std::optional<double>(theta_v) : std::nullopt;
  double alpha = j < s.alpha.size() ? s.alpha[j] : 0.0;
  double f = 1.0;
  switch (c) {
    case CaseLabel::I:
      f = 1.0 - (p.t + (biased ? s.tau1 : 0.0)) * p.mu;
      break;
    case CaseLabel::II:
      // No contraction is claimed without a nonnegative theta.
      if (theta && *theta >= 0) f = 1.0 - (p.t + (biased ? s.tau2 : 0.0)) * p.mu * *theta;
      break;
    case CaseLabel::III: {
      double extra = (biased && theta && *theta >= 0) ? *theta * s.tau2 : 0.0;
      f = 1.0 - p.mu * (p.t + alpha + extra);
      break;
    }
  }
  return std::max(f, 0.0);
}

namespace {

void check_params(const BoundParams& p) {
  if (!(p.t > 0 && p.L > 0 && p.mu > 0)) throw PreconditionError("bound envelope: t, L, mu must be positive");
  if (p.mu > p.L / 2) throw PreconditionError("bound envelope: need mu <= L / 2");
}

void check_case_preconditions(std::span<const CaseLabel> cases, const BoundParams& p) {
  bool has13 = false;
  bool has2 = false;
  for (CaseLabel c : cases) {
    has13 = has13 || c != CaseLabel::II;
    has2 = has2 || c == CaseLabel::II;
  }
  if (has13 && !(p.t < 1.0 / (4.0 * p.L)))
    throw PreconditionError("bound envelope: Case I/III steps need t < 1/(4L); t = " + format_double(p.t) +
                            ", 1/(4L) = " + format_double(1.0 / (4.0 * p.L)));
  if (has2) {
    double lim = p.eps ? 1.0 / ((1.0 + 2.0 * *p.eps) * p.L) : 1.0 / p.L;
    if (!(p.t <= lim))
      throw PreconditionError("bound envelope: Case II steps need t <= " + format_double(lim) + "; t = " +
                              format_double(p.t));
  }
}

}  // namespace

std::vector<double> bound_envelope(std::span<const CaseLabel> cases, const BoundSeries& s, const BoundParams& p,
                                   double f0_gap) {
  check_params(p);
  check_case_preconditions(cases, p);
  std::vector<double> env{f0_gap};
  env.reserve(cases.size() + 1);
  for (std::size_t j = 0; j < cases.size(); ++j) env.push_back(env.back() * bound_factor(cases[j], s, j, p));
  return env;
}

std::vector<double> case1_sr_envelope(std::size_t steps, const BoundParams& p, double f0_gap) {
  std::vector<CaseLabel> cases(steps, CaseLabel::I);
  BoundParams q = p;
  q.eps.reset();
  return bound_envelope(cases, BoundSeries{}, q, f0_gap);
}

std::vector<double> case1_gamma_envelope(std::span<const double> gammas, const BoundParams& p, double f0_gap) {
  check_params(p);
  std::vector<CaseLabel> cases(gammas.size(), CaseLabel::I);
  check_case_preconditions(cases, p);
  std::vector<double> env{f0_gap};
  for (double g : gammas) env.push_back(env.back() * std::max(0.0, 1.0 - p.t * p.mu * g));
  return env;
}

namespace {

struct PlAccumulator {
  const Objective& obj;
  double fstar;
  double L_hat = 0.0;
  double mu_hat = std::numeric_limits<double>::infinity();
  std::size_t points = 0;

  void point(std::span<const double> x, const std::vector<double>& g) {
    ++points;
    double gap = obj.value(x) - fstar;
    if (gap < 1e-10) return;
    double g2 = 0;
    for (double v : g) g2 += v * v;
    mu_hat = std::min(mu_hat, g2 / (2 * gap));
  }
  void pair(const std::vector<double>& ga, const std::vector<double>& gb, double h) {
    double s = 0;
    for (std::size_t i = 0; i < ga.size(); ++i) s += (ga[i] - gb[i]) * (ga[i] - gb[i]);
    L_hat = std::max(L_hat, std::sqrt(s) / h);
  }
};

}  // namespace

PlEstimate estimate_pl_constants(const Objective& obj, std::span<const std::pair<double, double>> box,
                                 std::size_t grid) {
  const std::size_t n = obj.dim();
  if (box.size() != n) throw PreconditionError("estimate_pl_constants: box has wrong dimension");
  if (grid < 101) throw PreconditionError("estimate_pl_constants: need grid >= 101 points per axis");
  auto fs = obj.f_star();
  if (!fs) throw PreconditionError("estimate_pl_constants: objective does not declare f*");
  std::vector<double> step(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(box[i].second > box[i].first)) throw PreconditionError("estimate_pl_constants: empty box axis");
    step[i] = (box[i].second - box[i].first) / static_cast<double>(grid - 1);
  }
  auto coord = [&](std::size_t axis, std::size_t idx) { return box[axis].first + step[axis] * static_cast<double>(idx); };

  PlAccumulator acc{obj, *fs};
  double total = std::pow(static_cast<double>(grid), static_cast<double>(n));
  PlEstimate out;
  if (total <= static_cast<double>(kMaxTensorPoints)) {
    out.method = "tensor";
    const auto count = static_cast<std::size_t>(total);
    std::vector<std::vector<double>> grads(count);
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> x(n);
    for (std::size_t lin = 0; lin < count; ++lin) {
      std::size_t rem = lin;
      for (std::size_t a = 0; a < n; ++a) {
        idx[a] = rem % grid;
        rem /= grid;
        x[a] = coord(a, idx[a]);
      }
      grads[lin] = obj.grad(x);
      acc.point(x, grads[lin]);
    }
    for (std::size_t lin = 0; lin < count; ++lin) {
      std::size_t rem = lin;
      std::size_t stride = 1;
      for (std::size_t a = 0; a < n; ++a) {
        std::size_t ia = rem % grid;
        rem /= grid;
        if (ia + 1 < grid) acc.pair(grads[lin], grads[lin + stride], step[a]);
        stride *= grid;
      }
    }
  } else {
    out.method = "planes";
    std::vector<double> centre(n);
    for (std::size_t a = 0; a < n; ++a) centre[a] = 0.5 * (box[a].first + box[a].second);
    std::vector<double> x(n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        std::vector<std::vector<double>> grads(grid * grid);
        for (std::size_t i = 0; i < grid; ++i)
          for (std::size_t j = 0; j < grid; ++j) {
            x = centre;
            x[a] = coord(a, i);
            x[b] = coord(b, j);
            grads[i * grid + j] = obj.grad(x);
            acc.point(x, grads[i * grid + j]);
          }
        for (std::size_t i = 0; i < grid; ++i)
          for (std::size_t j = 0; j < grid; ++j) {
            if (i + 1 < grid) acc.pair(grads[i * grid + j], grads[(i + 1) * grid + j], step[a]);
            if (j + 1 < grid) acc.pair(grads[i * grid + j], grads[i * grid + j + 1], step[b]);
          }
      }
    }
  }
  out.L_hat = acc.L_hat;
  out.mu_hat = acc.mu_hat;
  out.points = acc.points;
  return out;
}

}  // namespace lpgd
