#include "lpgd/gdengine.hpp"

#include <cmath>
#include <limits>

#include "lpgd/bounds.hpp"
#include "lpgd/error.hpp"
#include "lpgd/rounding.hpp"

namespace lpgd {

std::string to_string(NumberSystem ns) {
  switch (ns) {
    case NumberSystem::fixed:
      return "fixed";
    case NumberSystem::lowfloat:
      return "lowfloat";
    case NumberSystem::reference:
      return "reference";
  }
  return "?";
}

NumberSystem parse_number_system(std::string_view text) {
  if (text == "fixed") return NumberSystem::fixed;
  if (text == "lowfloat") return NumberSystem::lowfloat;
  if (text == "reference") return NumberSystem::reference;
  throw ConfigError("unknown number_system '" + std::string(text) + "' (fixed | lowfloat | reference)");
}

std::string to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::I:
      return "I";
    case CaseLabel::II:
      return "II";
    case CaseLabel::III:
      return "III";
  }
  return "?";
}

void GDConfig::validate() const {
  if (!objective) throw ConfigError("GDConfig: objective missing");
  if (x0.size() != objective->dim())
    throw ConfigError("GDConfig: x0 has dimension " + std::to_string(x0.size()) + ", objective needs " +
                      std::to_string(objective->dim()));
  if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("GDConfig: t must be positive");
  if (iterations < 0) throw ConfigError("GDConfig: iterations must be >= 0");
  for (double v : x0)
    if (!std::isfinite(v)) throw ConfigError("GDConfig: x0 must be finite");
  switch (number_system) {
    case NumberSystem::fixed:
      make_format(working_fmt.qi, working_fmt.qf);
      make_format(mul_fmt.qi, mul_fmt.qf);
      if (mul_fmt.qf > working_fmt.qf)
        throw ConfigError("GDConfig: multiply format " + mul_fmt.to_string() + " is finer than working format " +
                          working_fmt.to_string() + "; the exact rejoin needs mul qf <= working qf");
      if (!representable(t, working_fmt))
        throw ConfigError("GDConfig: t = " + format_double(t) + " is not representable in " + working_fmt.to_string());
      for (double v : x0)
        if (!representable(v, working_fmt))
          throw ConfigError("GDConfig: x0 entry " + format_double(v) + " is not representable in " +
                            working_fmt.to_string());
      break;
    case NumberSystem::lowfloat:
      make_float_format(float_fmt.sig_bits, float_fmt.exp_bits);
      if (!fl_representable(t, float_fmt))
        throw ConfigError("GDConfig: t = " + format_double(t) + " is not representable in " + float_fmt.to_string());
      for (double v : x0)
        if (!fl_representable(v, float_fmt))
          throw ConfigError("GDConfig: x0 entry " + format_double(v) + " is not representable in " +
                            float_fmt.to_string());
      break;
    case NumberSystem::reference:
      break;
  }
}

double GDConfig::case_u() const {
  switch (number_system) {
    case NumberSystem::fixed:
      return mul_fmt.u();
    case NumberSystem::lowfloat:
      return float_fmt.u();
    case NumberSystem::reference:
      return 0.0;
  }
  return 0.0;
}

double GDConfig::working_u() const {
  switch (number_system) {
    case NumberSystem::fixed:
      return working_fmt.u();
    case NumberSystem::lowfloat:
      return float_fmt.u();
    case NumberSystem::reference:
      return std::numeric_limits<double>::epsilon() / 2;
  }
  return 0.0;
}

std::size_t IterationTrace::nonopposite_violations() const {
  std::size_t n = 0;
  for (bool b : nonopposite) n += b ? 0 : 1;
  return n;
}

CaseSplit classify_case(std::span<const double> g_tilde, double t, double u) {
  if (!(t > 0.0) || !(u > 0.0)) throw PreconditionError("classify_case: t and u must be positive");
  CaseSplit s;
  Dyadic tx = Dyadic::from_double(t);
  Dyadic ux = Dyadic::from_double(u);
  for (std::size_t i = 0; i < g_tilde.size(); ++i) {
    if ((tx * Dyadic::from_double(g_tilde[i])).abs() >= ux)
      s.C1.push_back(i);
    else
      s.C2.push_back(i);
  }
  if (s.C2.empty())
    s.label = CaseLabel::I;
  else if (s.C1.empty())
    s.label = CaseLabel::II;
  else
    s.label = CaseLabel::III;
  return s;
}

namespace {

int sgn(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

}  // namespace

NonoppositeReport check_nonopposite(std::span<const double> g_exact, std::span<const double> g_tilde) {
  if (g_exact.size() != g_tilde.size()) throw PreconditionError("check_nonopposite: length mismatch");
  NonoppositeReport rep;
  for (std::size_t i = 0; i < g_exact.size(); ++i) {
    rep.nonopposite.push_back(sgn(g_tilde[i]) * sgn(g_exact[i]) >= 0);
    Dyadic s1 = Dyadic::from_double(g_tilde[i]) - Dyadic::from_double(g_exact[i]);
    rep.bounded_error.push_back(Dyadic::from_double(g_exact[i]).abs() >= s1.abs());
  }
  return rep;
}

RoundedGradient eval_grad_rounded(const Objective& obj, std::span<const FixedVal> x, QFormat fmt,
                                  const RoundingScheme& scheme, RandomStream rng) {
  std::vector<double> xd;
  xd.reserve(x.size());
  for (const auto& v : x) {
    if (!(v.fmt == fmt)) throw FormatMismatchError("eval_grad_rounded: x is not in " + fmt.to_string());
    xd.push_back(v.value());
  }
  FixedArith ar(fmt, scheme, rng);
  RoundedGradient out;
  out.g_tilde = obj.grad_rounded(ar, x);
  std::vector<double> ge = obj.grad(xd);
  for (std::size_t i = 0; i < ge.size(); ++i)
    out.sigma1.push_back(out.g_tilde[i].exact() - Dyadic::from_double(ge[i]));
  return out;
}

namespace {

void finish_trace(IterationTrace& tr, const GDConfig& cfg) {
  const std::size_t n = tr.x_before.size();
  tr.r.assign(n, std::numeric_limits<double>::quiet_NaN());
  std::optional<double> gamma;
  double max_s1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tr.sigma1.push_back(tr.sigma1_x[i].to_double());
    tr.sigma2.push_back(tr.sigma2_x[i].to_double());
    tr.d.push_back(tr.d_x[i].to_double());
    max_s1 = std::max(max_s1, std::fabs(tr.sigma1.back()));
    if (tr.g_exact[i] != 0.0) {
      Dyadic tg = tr.t_exact * tr.g_exact_x[i];
      // r_i = (t sigma1_i + sigma2_i) / (t g_i) = (d_i - t g_i) / (t g_i)
      tr.r[i] = (tr.d_x[i] - tg).to_double() / tg.to_double();
      double gi = 1.0 + tr.r[i];
      gamma = gamma ? std::min(*gamma, gi) : gi;
    }
  }
  tr.gamma = gamma;
  tr.max_abs_sigma1_over_u = max_s1 / cfg.working_u();
  auto rep = check_nonopposite(tr.g_exact, tr.g_tilde);
  tr.nonopposite = std::move(rep.nonopposite);
  tr.bounded_error = std::move(rep.bounded_error);
  if (auto L = cfg.objective->L(); L && cfg.number_system != NumberSystem::reference)
    tr.theta = theta_of(tr.g_tilde, *L, cfg.case_u());
}

void step_fixed(GDState& st, const GDConfig& cfg, const RandomStream& ks, IterationTrace& tr) {
  const QFormat wf = cfg.working_fmt;
  std::vector<FixedVal> x;
  x.reserve(st.x.size());
  for (double v : st.x) x.push_back(to_fixed(v, wf));
  RoundedGradient rg = eval_grad_rounded(*cfg.objective, x, wf, cfg.sigma1_scheme, ks.fork(OpTag::gradient));
  FixedVal t = to_fixed(cfg.t, wf);
  tr.t_exact = t.exact();
  RandomStream step_rng = ks.fork(OpTag::step);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const FixedVal& g = rg.g_tilde[i];
    tr.g_tilde.push_back(g.value());
    tr.sigma1_x.push_back(rg.sigma1[i]);
    MulResult m = mul_round(t, g, cfg.mul_fmt, cfg.sigma2_scheme, step_rng, g.exact().sign());
    tr.sigma2_x.push_back(m.sigma);
    tr.d_x.push_back(m.value.exact());
    // Exact rejoin into the working format.
    FixedVal d_w = convert_exact(m.value, wf);
    x[i] = sub_exact(x[i], d_w);
  }
  for (std::size_t i = 0; i < x.size(); ++i) st.x[i] = x[i].value();
  auto cs = classify_case(tr.g_tilde, cfg.t, cfg.case_u());
  tr.case_label = cs.label;
  tr.C1 = std::move(cs.C1);
  tr.C2 = std::move(cs.C2);
}

void step_lowfloat(GDState& st, const GDConfig& cfg, const RandomStream& ks, IterationTrace& tr) {
  const FloatFormat ff = cfg.float_fmt;
  FloatArith ar(ff, cfg.sigma1_scheme, ks.fork(OpTag::gradient));
  std::vector<double> g = cfg.objective->grad_rounded(ar, st.x);
  tr.t_exact = Dyadic::from_double(cfg.t);
  RandomStream step_rng = ks.fork(OpTag::step);
  RandomStream upd_rng = ks.fork(OpTag::update);
  tr.g_tilde = g;
  for (std::size_t i = 0; i < st.x.size(); ++i) {
    tr.sigma1_x.push_back(Dyadic::from_double(g[i]) - tr.g_exact_x[i]);
    double tg = fl_mul_round(cfg.t, g[i], ff, cfg.sigma2_scheme, step_rng, sgn(g[i])).value;
    // signed-SR_eps bias on the update points along -t g (descent).
    double xn = fl_sub_round(st.x[i], tg, ff, cfg.sigma2_scheme, upd_rng, -sgn(tg)).value;
    ExactPair dp = two_sum(st.x[i], -xn);
    Dyadic d = Dyadic::from_double(dp.hi) + Dyadic::from_double(dp.lo);
    tr.d_x.push_back(d);
    tr.sigma2_x.push_back(d - tr.t_exact * Dyadic::from_double(g[i]));
    st.x[i] = xn;
  }
  // Stagnation regime per coordinate: |t g~_i| < u_fl |x_i|.
  CaseSplit cs;
  for (std::size_t i = 0; i < g.size(); ++i) {
    bool c2 = std::fabs(cfg.t * g[i]) < ff.u() * std::fabs(tr.x_before[i]);
    (c2 ? cs.C2 : cs.C1).push_back(i);
  }
  cs.label = cs.C2.empty() ? CaseLabel::I : (cs.C1.empty() ? CaseLabel::II : CaseLabel::III);
  tr.case_label = cs.label;
  tr.C1 = std::move(cs.C1);
  tr.C2 = std::move(cs.C2);
}

void step_reference(GDState& st, const GDConfig& cfg, IterationTrace& tr) {
  tr.t_exact = Dyadic::from_double(cfg.t);
  tr.g_tilde = tr.g_exact;
  for (std::size_t i = 0; i < st.x.size(); ++i) {
    double xn = st.x[i] - cfg.t * tr.g_exact[i];
    ExactPair dp = two_sum(st.x[i], -xn);
    Dyadic d = Dyadic::from_double(dp.hi) + Dyadic::from_double(dp.lo);
    tr.sigma1_x.push_back(Dyadic());
    tr.d_x.push_back(d);
    tr.sigma2_x.push_back(d - tr.t_exact * tr.g_exact_x[i]);
    st.x[i] = xn;
  }
  tr.case_label = CaseLabel::I;
  for (std::size_t i = 0; i < st.x.size(); ++i) tr.C1.push_back(i);
}

const std::vector<double>* nearest(const std::vector<std::vector<double>>& mins, std::span<const double> x) {
  const std::vector<double>* best = nullptr;
  double bd = std::numeric_limits<double>::infinity();
  for (const auto& m : mins) {
    if (m.size() != x.size()) continue;
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - m[i]) * (x[i] - m[i]);
    if (s < bd) {
      bd = s;
      best = &m;
    }
  }
  return best;
}

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

IterationTrace gd_step(GDState& state, const GDConfig& cfg, const RandomStream& run_stream) {
  IterationTrace tr;
  tr.k = state.k;
  tr.x_before = state.x;
  tr.f_value = cfg.objective->value(state.x);
  tr.g_exact = cfg.objective->grad(state.x);
  for (double g : tr.g_exact) tr.g_exact_x.push_back(Dyadic::from_double(g));
  RandomStream ks = run_stream.fork(static_cast<std::uint64_t>(state.k));
  switch (cfg.number_system) {
    case NumberSystem::fixed:
      step_fixed(state, cfg, ks, tr);
      break;
    case NumberSystem::lowfloat:
      step_lowfloat(state, cfg, ks, tr);
      break;
    case NumberSystem::reference:
      step_reference(state, cfg, tr);
      break;
  }
  finish_trace(tr, cfg);
  ++state.k;
  return tr;
}

RunResult run(const GDConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  RunResult res;
  res.seed = seed;
  RandomStream rs(seed);
  GDState st{0, cfg.x0};
  const std::size_t n = cfg.x0.size();
  const double stag_u = cfg.case_u();
  int zero_run = 0;
  std::vector<std::vector<double>> path;
  res.f_curve.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
  for (int k = 0; k < cfg.iterations; ++k) {
    path.push_back(st.x);
    IterationTrace tr = gd_step(st, cfg, rs);
    res.f_curve.push_back(tr.f_value);
    res.cases.push_back(tr.case_label);
    res.case_counts[static_cast<int>(tr.case_label) - 1] += 1;
    res.max_abs_sigma1_over_u = std::max(res.max_abs_sigma1_over_u, tr.max_abs_sigma1_over_u);
    if (cfg.number_system == NumberSystem::fixed) {
      bool all_zero = true;
      for (const auto& d : tr.d_x) all_zero = all_zero && d.is_zero();
      double gn = 0;
      for (double g : tr.g_exact) gn += g * g;
      gn = std::sqrt(gn);
      if (all_zero && gn > kStagnationGradFactor * std::sqrt(static_cast<double>(n)) * stag_u) {
        if (++zero_run == kStagnationWindow && !res.stagnated) {
          res.stagnated = true;
          res.stagnation_step = k - kStagnationWindow + 1;
        }
      } else {
        zero_run = 0;
      }
    }
    if (cfg.keep_traces) res.traces.push_back(std::move(tr));
  }
  path.push_back(st.x);
  res.f_curve.push_back(cfg.objective->value(st.x));
  res.final_x = st.x;
  const auto minimizers = cfg.objective->minimizers();
  if (const auto* xs = nearest(minimizers, st.x)) {
    double chi = 0;
    for (const auto& p : path) chi = std::max(chi, dist(p, *xs));
    res.chi = chi;
  }
  return res;
}

}  // namespace lpgd
