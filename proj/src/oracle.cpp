#include "lpgd/oracle.hpp"

#include <cmath>
#include <limits>

#include "lpgd/error.hpp"
#include "lpgd/rounding.hpp"

namespace lpgd {

namespace mp = boost::multiprecision;
using BigInt = mp::cpp_int;

Rational parse_rational(std::string_view text) {
  auto fail = [&] { return PreconditionError("cannot parse rational '" + std::string(text) + "'"); };
  if (text.empty()) throw fail();
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational a = parse_rational(text.substr(0, slash));
    Rational b = parse_rational(text.substr(slash + 1));
    if (b == 0) throw fail();
    return a / b;
  }
  std::size_t i = 0;
  bool neg = false;
  if (text[i] == '+' || text[i] == '-') neg = text[i++] == '-';
  BigInt digits = 0;
  int scale = 0;
  bool any = false;
  bool dot = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c >= '0' && c <= '9') {
      digits = digits * 10 + (c - '0');
      if (dot) ++scale;
      any = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  if (!any) throw fail();
  int exp10 = 0;
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') throw fail();
    std::string rest(text.substr(i + 1));
    std::size_t used = 0;
    try {
      exp10 = std::stoi(rest, &used);
    } catch (const std::exception&) {
      throw fail();
    }
    if (used != rest.size()) throw fail();
  }
  exp10 -= scale;
  Rational r(digits);
  BigInt p = mp::pow(BigInt(10), std::abs(exp10));
  r = exp10 >= 0 ? r * Rational(p) : r / Rational(p);
  return neg ? -r : r;
}

std::string to_string(const Rational& r) { return r.str(); }

namespace {

Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw PreconditionError("non-finite value");
  if (x == 0.0) return Rational(0);
  int e = 0;
  double m = std::frexp(x, &e);
  auto mant = static_cast<long long>(std::ldexp(m, 53));
  Rational r{BigInt(mant)};
  int p = e - 53;
  BigInt two = mp::pow(BigInt(2), std::abs(p));
  return p >= 0 ? r * Rational(two) : r / Rational(two);
}

BigInt floor_div(const BigInt& n, const BigInt& d) {
  BigInt q = n / d;  // truncates
  if ((n % d != 0) && ((n < 0) != (d < 0))) q -= 1;
  return q;
}

Rational pow2(int k) {
  BigInt p = mp::pow(BigInt(2), std::abs(k));
  return k >= 0 ? Rational(p) : Rational(1) / Rational(p);
}

// eps as the decimal the user wrote, e.g. 0.4 -> 2/5.
Rational eps_rational(const RoundingScheme& s) { return parse_rational(format_double(s.eps)); }

int sign_of(const Rational& r) { return r > 0 ? 1 : (r < 0 ? -1 : 0); }

}  // namespace

RationalRounding rational_rounding(const Rational& x, QFormat fmt, const RoundingScheme& scheme, int v_sign) {
  Rational u = pow2(-fmt.qf);
  Rational s = x / u;
  BigInt fl = floor_div(mp::numerator(s), mp::denominator(s));
  Rational r = s - Rational(fl);
  Rational lower = Rational(fl) * u;
  if (r == 0) return {x, x, Rational(1)};
  Rational p;
  switch (scheme.kind) {
    case SchemeKind::rn:
      if (r < Rational(1, 2))
        p = 1;
      else if (r > Rational(1, 2))
        p = 0;
      else
        p = (fl % 2 == 0) ? 1 : 0;
      break;
    case SchemeKind::sr:
      p = 1 - r;
      break;
    case SchemeKind::sr_eps:
    case SchemeKind::signed_sr_eps: {
      int dir = scheme.kind == SchemeKind::sr_eps ? sign_of(x) : v_sign;
      p = 1 - r - dir * eps_rational(scheme);
      if (p < 0) p = 0;
      if (p > 1) p = 1;
      break;
    }
  }
  return {lower, lower + u, p};
}

Distribution exhaustive_two_round_distribution(const Rational& x1, const Rational& x2, QFormat fmt,
                                               const RoundingScheme& scheme) {
  RationalRounding a = rational_rounding(x1, fmt, scheme);
  RationalRounding b = rational_rounding(x2, fmt, scheme);
  std::pair<Rational, Rational> oa[2] = {{a.lower, a.p_down}, {a.upper, 1 - a.p_down}};
  std::pair<Rational, Rational> ob[2] = {{b.lower, b.p_down}, {b.upper, 1 - b.p_down}};
  Distribution dist;
  for (const auto& [va, pa] : oa)
    for (const auto& [vb, pb] : ob) {
      Rational p = pa * pb;
      if (p == 0) continue;
      dist[va - vb] += p;
    }
  return dist;
}

double McEstimate::deviation_se() const {
  double se = n > 0 ? std / std::sqrt(static_cast<double>(n)) : 0.0;
  double dev = std::fabs(mean - expected);
  if (se == 0.0) return dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return dev / se;
}

McEstimate summarize_samples(std::span<const double> xs, double expected) {
  McEstimate m;
  m.n = xs.size();
  m.expected = expected;
  if (xs.empty()) return m;
  // Two-pass mean/variance.
  long double s = 0;
  for (double v : xs) s += v;
  long double mean = s / static_cast<long double>(xs.size());
  long double q = 0;
  for (double v : xs) q += (v - mean) * (v - mean);
  m.mean = static_cast<double>(mean);
  m.std = xs.size() > 1 ? static_cast<double>(std::sqrt(q / static_cast<long double>(xs.size() - 1))) : 0.0;
  m.half_width = kStandardErrors * m.std / std::sqrt(static_cast<double>(m.n));
  double tol = 1e-12 * std::max(1.0, std::fabs(expected));
  m.pass = std::fabs(m.mean - expected) <= m.half_width + tol;
  return m;
}

McEstimate check_expectation(double x, QFormat fmt, const RoundingScheme& scheme, std::size_t n, std::uint64_t seed) {
  if (n < kMinAcceptanceSamples) throw PreconditionError("check_expectation: need n >= 10^4 samples");
  RandomStream rng = RandomStream(seed).fork(OpTag::sample);
  std::vector<double> xs(n);
  for (auto& v : xs) v = round(x, fmt, scheme, rng).value();
  RationalRounding rr = rational_rounding(exact_rational(x), fmt, scheme);
  Rational e = rr.lower + (rr.upper - rr.lower) * (1 - rr.p_down);
  return summarize_samples(xs, e.convert_to<double>());
}

McEstimate check_case2_second_moment(double g_tilde, double t, QFormat fmt, const RoundingScheme& scheme,
                                     std::size_t n, std::uint64_t seed) {
  if (n < kMinAcceptanceSamples) throw PreconditionError("check_case2_second_moment: need n >= 10^4 samples");
  Rational x = exact_rational(t) * exact_rational(g_tilde);
  Rational u = pow2(-fmt.qf);
  Rational ax = x < 0 ? Rational(-x) : x;
  if (ax >= u) throw PreconditionError("check_case2_second_moment: |t g~| must be below u");
  Dyadic xd = Dyadic::from_double(t) * Dyadic::from_double(g_tilde);
  RandomStream rng = RandomStream(seed).fork(OpTag::sample);
  std::vector<double> xs(n);
  for (auto& v : xs) {
    double d = round(xd, fmt, scheme, rng, xd.sign()).value();
    v = d * d;
  }
  Rational expected = u * ax;
  if (scheme.biased() && x != 0) {
    RationalRounding rr = rational_rounding(x, fmt, scheme, sign_of(x));
    bool unclamped = rr.p_down > 0 && rr.p_down < 1;
    Rational h = unclamped ? eps_rational(scheme) : (u - ax) / u;
    expected += u * u * h;
  }
  return summarize_samples(xs, expected.convert_to<double>());
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

BiasScaling check_bias_scaling(const Objective& obj, std::span<const double> x, const RoundingScheme& scheme,
                               std::span<const int> qf_list, int qi, std::size_t runs, std::uint64_t seed) {
  if (qf_list.size() < 3) throw PreconditionError("check_bias_scaling: need >= 3 resolutions");
  if (x.size() != obj.dim()) throw PreconditionError("check_bias_scaling: point has wrong dimension");
  const bool cv = scheme.kind == SchemeKind::sr;
  const std::vector<double> g0 = obj.grad(x);
  const std::size_t m = g0.size();
  const std::size_t n = x.size();

  // Deterministic first-order coefficients at the exact point.
  std::vector<std::vector<double>> jac(n, std::vector<double>(m, 0.0));
  std::vector<std::vector<double>> slot_coef;
  if (cv) {
    for (std::size_t i = 0; i < n; ++i) {
      double h = 1e-6 * std::max(1.0, std::fabs(x[i]));
      std::vector<double> xp(x.begin(), x.end());
      std::vector<double> xm(x.begin(), x.end());
      xp[i] += h;
      xm[i] -= h;
      auto gp = obj.grad(xp);
      auto gm = obj.grad(xm);
      for (std::size_t c = 0; c < m; ++c) jac[i][c] = (gp[c] - gm[c]) / (xp[i] - xm[i]);
    }
    RefArith probe;
    obj.grad_rounded(probe, x);
    for (std::size_t s = 0; s < probe.slots(); ++s) {
      const double h = 1e-6;
      RefArith up;
      up.perturb(s, h);
      RefArith dn;
      dn.perturb(s, -h);
      auto gp = obj.grad_rounded(up, x);
      auto gm = obj.grad_rounded(dn, x);
      std::vector<double> col(m);
      for (std::size_t c = 0; c < m; ++c) col[c] = (gp[c] - gm[c]) / (2 * h);
      slot_coef.push_back(std::move(col));
    }
  }

  BiasScaling out;
  RandomStream root(seed);
  for (int qf : qf_list) {
    QFormat fmt = make_format(qi, qf);
    std::vector<std::vector<double>> samples(m, std::vector<double>(runs));
    RandomStream rs = root.fork(static_cast<std::uint64_t>(qf));
    for (std::size_t r = 0; r < runs; ++r) {
      RandomStream run_rng = rs.fork(r);
      RandomStream in_rng = run_rng.fork(OpTag::input);
      std::vector<FixedVal> xt;
      std::vector<double> e_in;
      for (double xi : x) {
        FixedVal v = round(xi, fmt, scheme, in_rng);
        xt.push_back(v);
        e_in.push_back(v.value() - xi);
      }
      FixedArith ar(fmt, scheme, run_rng.fork(OpTag::gradient));
      ar.record_errors(cv);
      auto gt = obj.grad_rounded(ar, xt);
      if (cv && ar.errors().size() != slot_coef.size())
        throw Error("check_bias_scaling: recipe slot count differs between arithmetics");
      for (std::size_t c = 0; c < m; ++c) {
        double y = gt[c].value() - g0[c];
        if (cv) {
          for (std::size_t i = 0; i < n; ++i) y -= jac[i][c] * e_in[i];
          for (std::size_t s = 0; s < slot_coef.size(); ++s) y -= slot_coef[s][c] * ar.errors()[s];
        }
        samples[c][r] = y;
      }
    }
    double norm2 = 0;
    double se2 = 0;
    for (std::size_t c = 0; c < m; ++c) {
      McEstimate e = summarize_samples(samples[c], 0.0);
      norm2 += e.mean * e.mean;
      double se = e.std / std::sqrt(static_cast<double>(runs));
      se2 += se * se;
    }
    out.u.push_back(fmt.u());
    out.bias_norm.push_back(std::sqrt(norm2));
    out.se.push_back(std::sqrt(se2));
  }
  bool signal = true;
  for (std::size_t j = 0; j < out.u.size(); ++j)
    signal = signal && out.bias_norm[j] > kStandardErrors * out.se[j] && out.bias_norm[j] > 0;
  if (!signal) {
    out.verdict = Verdict::inconclusive;
    return out;
  }
  // Least-squares slope of log(bias) on log(u).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(out.u.size());
  for (std::size_t j = 0; j < out.u.size(); ++j) {
    double lx = std::log(out.u[j]);
    double ly = std::log(out.bias_norm[j]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  out.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  out.verdict = out.slope >= kMinBiasSlope ? Verdict::pass : Verdict::fail;
  return out;
}

StagnationCheck check_stagnation_regime_float(double x, double g, double t, FloatFormat fmt,
                                              const RoundingScheme& scheme, std::size_t n, std::uint64_t seed) {
  if (n < kMinAcceptanceSamples) throw PreconditionError("check_stagnation_regime_float: need n >= 10^4 samples");
  if (scheme.kind == SchemeKind::sr_eps)
    throw PreconditionError("check_stagnation_regime_float: use signed_sr_eps for the biased branch");
  ExactPair tgp = two_prod(t, g);
  if (tgp.lo != 0.0) throw PreconditionError("check_stagnation_regime_float: t g must be exact in double");
  const double tg = tgp.hi;
  if (x == 0.0 || !(std::fabs(tg / x) < fmt.u()))
    throw PreconditionError("check_stagnation_regime_float: need |t g / x| < u_fl");
  StagnationCheck out;
  out.tg = tg;
  out.branch = (x > 0) == (g > 0) ? 1 : -1;

  // Neighbour on the far side of x, from the format parameters.
  int e = 0;
  double m = std::frexp(std::fabs(x), &e);
  int ex = e - 1;  // |x| in [2^ex, 2^(ex+1))
  auto gap = [&](int b) { return std::ldexp(1.0, std::max(b, fmt.emin()) - fmt.sig_bits + 1); };
  const double y = x - tg;
  const double sx = x > 0 ? 1.0 : -1.0;
  double away = 0.0;
  if (std::fabs(y) > std::fabs(x)) {
    away = x + sx * gap(ex);
  } else {
    bool pow2 = m == 0.5 && ex > fmt.emin();
    away = x - sx * (pow2 ? gap(ex - 1) : gap(ex));
  }
  out.delta = std::fabs(away - y) / std::fabs(y);
  const double sg = g > 0 ? 1.0 : -1.0;
  switch (scheme.kind) {
    case SchemeKind::rn:
      out.predicted = 0.0;
      break;
    case SchemeKind::sr:
      out.predicted = tg;
      break;
    default: {
      const double eps = scheme.eps;
      const double d = out.delta;
      double lin = out.branch < 0 ? (1 + eps + eps * d) : (1 + eps - eps * d);
      out.predicted = lin * tg + sg * std::fabs(x) * eps * d;
      break;
    }
  }
  RandomStream rng = RandomStream(seed).fork(OpTag::sample);
  RandomStream rn_rng = rng.fork(1);
  out.rn_stagnates = fl_sub_round(x, tg, fmt, RoundingScheme::rn(), rn_rng).value == x;
  const int v = tg > 0 ? -1 : 1;
  std::vector<double> ds(n);
  for (auto& d : ds) d = x - fl_sub_round(x, tg, fmt, scheme, rng, v).value;
  out.mc = summarize_samples(ds, out.predicted);
  out.pass = out.mc.pass && out.rn_stagnates;
  return out;
}

namespace {

class CurvatureProbe final : public RecipeObjective<CurvatureProbe> {
 public:
  std::string name() const override { return "curvature_probe"; }
  std::size_t dim() const override { return 2; }
  double value(std::span<const double> x) const override {
    return x[0] * x[0] * x[0] / 3 + x[0] * x[0] * x[1] / 2;
  }
  std::vector<double> grad(std::span<const double> x) const override {
    return {x[0] * x[0] + x[0] * x[1], x[0] * x[0] / 2};
  }
  template <class A>
  std::vector<typename A::value> recipe(A& ar, std::span<const typename A::value> x) const {
    auto sq = ar.mul(x[0], x[0]);
    return {ar.add(sq, ar.mul(x[0], x[1])), ar.scale(sq, 0.5)};
  }
};

}  // namespace

ObjectivePtr make_curvature_probe() { return std::make_shared<CurvatureProbe>(); }

std::vector<double> interior_grid(QFormat fmt, std::size_t count) {
  const double lo = fmt.min_value();
  const double hi = fmt.max_value();
  std::vector<double> xs;
  xs.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    // Irrational offset keeps points off the grid; nudge any that land on it.
    double x = lo + (static_cast<double>(j) + 0.6180339887498949) * (hi - lo) / static_cast<double>(count);
    if (representable(x, fmt)) x += (x + fmt.u() / 3 < hi) ? fmt.u() / 3 : -fmt.u() / 3;
    xs.push_back(x);
  }
  return xs;
}

std::vector<CheckLine> kernel_grid_cell(QFormat fmt, double eps, std::size_t n, std::uint64_t seed) {
  std::vector<CheckLine> lines;
  const std::string tag = fmt.to_string() + " eps=" + format_double(eps);
  const RoundingScheme sr = RoundingScheme::sr();
  const RoundingScheme se = RoundingScheme::sr_eps(eps);
  // Stepsize: a power of two representable in fmt, at most 2^-4.
  const int s = std::min(4, fmt.qf);
  const double t = std::ldexp(1.0, -s);
  RandomStream pick = RandomStream(seed).fork(OpTag::data);
  const std::size_t m = 4;

  // Random representable gradients with nonrepresentable products when s > 0.
  auto draw_grad = [&](bool case1) {
    std::vector<double> g(m);
    const std::int64_t lo = case1 ? (std::int64_t{1} << s) : 1;
    std::int64_t hi = std::min<std::int64_t>(fmt.max_mantissa(), std::int64_t{1} << std::min(fmt.qi - 1 + fmt.qf, s + 6));
    if (hi < lo) hi = lo;
    for (auto& gi : g) {
      std::int64_t mag = lo + static_cast<std::int64_t>(pick.next() % static_cast<std::uint64_t>(hi - lo + 1));
      if ((mag & 1) == 0 && mag + 1 <= hi) mag += 1;
      bool neg = (pick.next() & 1) != 0 && -mag >= fmt.min_mantissa();
      gi = std::ldexp(static_cast<double>(neg ? -mag : mag), -fmt.qf);
    }
    return g;
  };

  struct Stats {
    double rho_hat = 0;
    double rho_se = 0;
    double ascent = 0;
    double ascent_se = 0;
  };
  auto sample = [&](const std::vector<double>& g, const RoundingScheme& sch, std::uint64_t stream) {
    RandomStream rng = RandomStream(seed).fork(stream);
    std::vector<std::vector<double>> s2(m, std::vector<double>(n));
    std::vector<double> dot(n);
    for (std::size_t r = 0; r < n; ++r) {
      double acc = 0;
      for (std::size_t i = 0; i < m; ++i) {
        Dyadic x = Dyadic::from_double(t) * Dyadic::from_double(g[i]);
        double sigma = (round(x, fmt, sch, rng, x.sign()).exact() - x).to_double();
        s2[i][r] = sigma;
        acc += g[i] * sigma;
      }
      dot[r] = acc;
    }
    double g2 = 0;
    for (double v : g) g2 += v * v;
    Stats st;
    st.rho_hat = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      McEstimate e = summarize_samples(s2[i], 0.0);
      double v = static_cast<double>(m) * g[i] * e.mean / g2;
      if (v < st.rho_hat) {
        st.rho_hat = v;
        st.rho_se = static_cast<double>(m) * std::fabs(g[i]) * e.std / std::sqrt(static_cast<double>(n)) / g2;
      }
    }
    McEstimate d = summarize_samples(dot, 0.0);
    st.ascent = d.mean;
    st.ascent_se = d.std / std::sqrt(static_cast<double>(n));
    return st;
  };

  std::vector<double> g1 = draw_grad(true);
  std::vector<double> g2 = draw_grad(false);
  Stats rho_se = sample(g1, se, 11);
  {
    bool ok = rho_se.rho_hat <= 2 * t * eps + kStandardErrors * rho_se.rho_se;
    lines.push_back({"rho<=2t*eps " + tag, ok,
                     "rho=" + format_double(rho_se.rho_hat) + " bound=" + format_double(2 * t * eps)});
  }
  Stats a_sr = sample(g2, sr, 12);
  Stats a_se = sample(g2, se, 13);
  {
    bool ok = std::fabs(a_sr.ascent) <= kStandardErrors * a_sr.ascent_se + 1e-300;
    lines.push_back({"E[g.sigma2]=0 (SR) " + tag, ok,
                     "mean=" + format_double(a_sr.ascent) + " se=" + format_double(a_sr.ascent_se)});
  }
  {
    bool ok = a_se.ascent > kStandardErrors * a_se.ascent_se;
    lines.push_back({"E[g.sigma2]>0 (SR_eps) " + tag, ok,
                     "mean=" + format_double(a_se.ascent) + " se=" + format_double(a_se.ascent_se)});
  }
  // 50-point grid of nonrepresentable inputs strictly inside the range.
  {
    std::size_t bad_sr = 0, bad_se = 0, bad_closed = 0;
    double worst = 0;
    const Rational er = parse_rational(format_double(eps));
    const std::vector<double> grid = interior_grid(fmt, 50);
    const RandomStream seeds(seed);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double x = grid[j];
      // Every check draws from its own stream.
      McEstimate a = check_expectation(x, fmt, sr, n, seeds.fork(2 * j + 1).key());
      McEstimate b = check_expectation(x, fmt, se, n, seeds.fork(2 * j + 2).key());
      bad_sr += a.pass ? 0 : 1;
      bad_se += b.pass ? 0 : 1;
      worst = std::max({worst, a.deviation_se(), b.deviation_se()});
      if (std::fabs(a.expected - x) > 1e-15 * std::max(1.0, std::fabs(x))) ++bad_closed;
      // Unclamped points carry bias exactly eps u sign(x).
      Rational xr = exact_rational(x);
      RationalRounding rr = rational_rounding(xr, fmt, se);
      if (rr.p_down > 0 && rr.p_down < 1) {
        Rational bias = rr.lower + (rr.upper - rr.lower) * (1 - rr.p_down) - xr;
        if (bias != er * pow2(-fmt.qf) * sign_of(xr)) ++bad_closed;
      }
    }
    lines.push_back({"E[SR(x)]=x on grid " + tag, bad_sr == 0 && bad_closed == 0,
                     "failures=" + std::to_string(bad_sr) + " worst_se=" + format_double(worst)});
    lines.push_back({"E[SR_eps(x)]-x=eps*u*sign(x) on grid " + tag, bad_se == 0 && bad_closed == 0,
                     "failures=" + std::to_string(bad_se) + " closed_form_mismatch=" + std::to_string(bad_closed)});
  }
  return lines;
}

std::vector<CheckLine> verify_suite(bool quick) {
  std::vector<CheckLine> lines;
  const std::size_t n = quick ? 10'000 : 100'000;
  const QFormat q11 = make_format(1, 1);
  {
    auto d = exhaustive_two_round_distribution(parse_rational("0.24"), parse_rational("0.26"), q11,
                                               RoundingScheme::sr());
    bool ok = d.size() == 3 && d[Rational(1, 2)] == parse_rational("0.2304") && d[Rational(0)] == parse_rational("0.4992") &&
              d[Rational(-1, 2)] == parse_rational("0.2704");
    lines.push_back({"exhaustive SR(0.24)-SR(0.26) in Q1.1", ok,
                     "P(0.5)=" + to_string(d[Rational(1, 2)]) + " P(0)=" + to_string(d[Rational(0)]) +
                         " P(-0.5)=" + to_string(d[Rational(-1, 2)])});
  }
  struct E {
    double x;
    RoundingScheme s;
  };
  for (const E& e : {E{0.24, RoundingScheme::sr()}, E{0.26, RoundingScheme::sr_eps(0.4)},
                     E{-0.26, RoundingScheme::sr_eps(0.4)}}) {
    McEstimate m = check_expectation(e.x, q11, e.s, n, 101);
    lines.push_back({"E[round(" + format_double(e.x) + ")] " + e.s.to_string(), m.pass,
                     "mean=" + format_double(m.mean) + " expected=" + format_double(m.expected)});
  }
  const QFormat q88 = make_format(8, 8);
  for (const auto& [tg_over_u, sch] :
       std::vector<std::pair<double, RoundingScheme>>{{0.5, RoundingScheme::sr()},
                                                      {0.3, RoundingScheme::sr_eps(0.2)},
                                                      {0.9, RoundingScheme::sr_eps(0.4)}}) {
    // t = 2^-4, g~ chosen so that t g~ = tg_over_u * u on the grid of Q8.8
    double tg = tg_over_u * q88.u();
    double g = std::ldexp(std::nearbyint(std::ldexp(tg * 16.0, 8)), -8);
    McEstimate m = check_case2_second_moment(g, 0.0625, q88, sch, n, 102);
    lines.push_back({"Case II E[d^2] " + sch.to_string() + " tg=" + format_double(0.0625 * g / q88.u()) + "u",
                     m.pass, "mean=" + format_double(m.mean) + " expected=" + format_double(m.expected)});
  }
  {
    const int qfs[] = {6, 8, 10};
    auto probe = make_curvature_probe();
    const double x[] = {0.3, 0.7};
    BiasScaling b = check_bias_scaling(*probe, x, RoundingScheme::sr(), qfs, 4, quick ? 10'000 : 10'000, 103);
    lines.push_back({"bias slope curvature probe", b.verdict == Verdict::pass, "slope=" + format_double(b.slope)});
    auto rb = make_rosenbrock();
    BiasScaling c = check_bias_scaling(*rb, x, RoundingScheme::sr(), qfs, 12, 10'000, 104);
    lines.push_back({"bias slope rosenbrock", c.verdict == Verdict::pass, "slope=" + format_double(c.slope)});
  }
  {
    FloatFormat f8 = make_float_format(3, 5);
    struct S {
      double x, g;
      RoundingScheme s;
    };
    for (const S& s : {S{1.0, 1.0, RoundingScheme::sr()}, S{1.0, -1.0, RoundingScheme::sr()},
                       S{1.5, 1.0, RoundingScheme::signed_sr_eps(0.4)},
                       S{1.5, -1.0, RoundingScheme::signed_sr_eps(0.4)},
                       S{-1.5, 1.0, RoundingScheme::signed_sr_eps(0.2)}}) {
      StagnationCheck c = check_stagnation_regime_float(s.x, s.g, 1.0 / 64, f8, s.s, n, 105);
      lines.push_back({"float stagnation " + s.s.to_string() + " x=" + format_double(s.x) + " g=" + format_double(s.g),
                       c.pass, "mean=" + format_double(c.mc.mean) + " predicted=" + format_double(c.predicted)});
    }
  }
  for (QFormat f : {q11, q88, make_format(15, 8)})
    for (double eps : {0.2, 0.4, 0.6})
      for (auto& l : kernel_grid_cell(f, eps, quick ? 10'000 : 50'000, 106)) lines.push_back(std::move(l));
  return lines;
}

}  // namespace lpgd
