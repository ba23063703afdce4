// Acceptance suite: one PASS/FAIL line per criterion. Usage: lpgd_acceptance
// [criterion ...]; no arguments runs all ten. Exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "lpgd/bounds.hpp"
#include "lpgd/error.hpp"
#include "lpgd/harness.hpp"
#include "lpgd/oracle.hpp"

using namespace lpgd;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets, pinned.
constexpr std::size_t kKernelSamples = 100'000;
constexpr std::size_t kBiasRuns = 10'000;
constexpr double kEnvelopeSlack = 1.10;
constexpr int kOrderingFrom = 50;
constexpr double kHimmelblauX4Radius = 0.1;
constexpr int kRosenbrockBudget = 200;
constexpr int kRosenbrockBaselineAt = 400;
constexpr double kRosenbrockBand = 0.30;
constexpr int kRosenbrockEarly = 64;
constexpr double kRosenbrockEarlyMax = 0.5;
constexpr double kSrGrowthMin = 5.0;
constexpr double kSrEpsSpreadMax = 2.0;
constexpr double kPlRelTol = 0.01;
constexpr double kRosenbrockMuLo = 0.15;
constexpr double kRosenbrockMuHi = 0.5;

const fs::path kConfigs = fs::path(LPGD_SOURCE_DIR) / "configs";

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

const VariantResult& variant(const ExperimentResult& e, const std::string& label) {
  for (const auto& v : e.variants)
    if (v.variant.label == label) return v;
  throw Error("no variant " + label);
}

// Kernel grid cells are shared by criteria 2 and 3.
const std::vector<CheckLine>& kernel_cells() {
  static const std::vector<CheckLine> lines = [] {
    std::vector<CheckLine> out;
    std::uint64_t seed = 2001;
    for (QFormat f : {make_format(1, 1), make_format(8, 8), make_format(15, 8)})
      for (double eps : {0.2, 0.4, 0.6})
        for (auto& l : kernel_grid_cell(f, eps, kKernelSamples, seed++)) out.push_back(std::move(l));
    return out;
  }();
  return lines;
}

Outcome select_cells(std::initializer_list<const char*> prefixes, std::size_t expected) {
  std::size_t n = 0, bad = 0;
  std::string first;
  for (const auto& l : kernel_cells())
    for (const char* p : prefixes)
      if (l.name.rfind(p, 0) == 0) {
        ++n;
        if (!l.pass) {
          ++bad;
          if (first.empty()) first = l.name + " (" + l.detail + ")";
        }
      }
  Outcome o;
  o.pass = n == expected && bad == 0;
  o.detail = std::to_string(n) + " checks, " + std::to_string(bad) + " failed" + (first.empty() ? "" : "; " + first);
  return o;
}

Outcome exhaustive() {
  auto d = exhaustive_two_round_distribution(parse_rational("0.24"), parse_rational("0.26"), make_format(1, 1),
                                             RoundingScheme::sr());
  Rational total = 0;
  for (const auto& [v, p] : d) total += p;
  Outcome o;
  o.pass = d.size() == 3 && d[Rational(1, 2)] == parse_rational("0.2304") && d[Rational(0)] == parse_rational("0.4992") &&
           d[Rational(-1, 2)] == parse_rational("0.2704") && total == 1;
  o.detail = "P(+0.5)=" + to_string(d[Rational(1, 2)]) + " P(0)=" + to_string(d[Rational(0)]) +
             " P(-0.5)=" + to_string(d[Rational(-1, 2)]);
  return o;
}

Outcome kernel_laws() { return select_cells({"E[SR(x)]=x on grid", "E[SR_eps(x)]-x="}, 18); }

// gamma in [0,4], r in [-1,3] on Case I steps with |sigma1_i| <= |g_i|.
void check_h_ranges(const std::vector<RunResult>& runs, std::size_t& steps, std::size_t& bad) {
  for (const auto& r : runs)
    for (const auto& tr : r.traces) {
      if (tr.case_label != CaseLabel::I) continue;
      bool pre = true;
      for (std::size_t i = 0; i < tr.g_exact.size(); ++i) pre = pre && tr.g_exact[i] != 0.0 && tr.bounded_error[i];
      if (!pre) continue;
      ++steps;
      for (double ri : tr.r) bad += (ri >= -1.0 && ri <= 3.0) ? 0 : 1;
      if (tr.gamma) bad += (*tr.gamma >= 0.0 && *tr.gamma <= 4.0) ? 0 : 1;
    }
}

Outcome kernel_suite() {
  Outcome cells = select_cells({"rho<=2t*eps", "E[g.sigma2]=0 (SR)", "E[g.sigma2]>0 (SR_eps)"}, 27);
  std::size_t bad = 0;
  std::string why;
  // Case II second moments in Q8.8 with t = 1/16.
  const QFormat q88 = make_format(8, 8);
  std::size_t d2 = 0;
  for (double frac : {0.125, 0.3125, 0.5, 0.6875, 0.9375})
    for (auto s : {RoundingScheme::sr(), RoundingScheme::sr_eps(0.2), RoundingScheme::sr_eps(0.6)}) {
      double g = frac * q88.u() * 16;
      McEstimate m = check_case2_second_moment(g, 1.0 / 16, q88, s, kKernelSamples, 3000 + d2++);
      if (!m.pass) {
        ++bad;
        why = "E[d^2] " + s.to_string() + " tg=" + fmt(frac) + "u";
      }
    }
  // Engine ensembles: rho <= 2 t eps on every all-Case-I step.
  ExperimentSpec env = load_config(kConfigs / "quadratic_envelope.yaml");
  env.seeds = 30;
  env.base.iterations = 200;
  env.baseline = BaselineKind::none;
  ExperimentResult e = run_experiment(env, workers());
  const VariantResult& se = variant(e, "sr/sr_eps:0.4");
  std::vector<RunResult> traced;
  for (std::uint64_t s = env.seed_base; s < env.seed_base + 30; ++s) {
    GDConfig c = se.cfg;
    c.keep_traces = true;
    traced.push_back(run(c, s));
  }
  BoundSeries bs = bound_series(traced, se.cfg);
  std::size_t rho_steps = 0;
  const double bound = 2 * env.base.t * 0.4;
  for (std::size_t k = 0; k < bs.rho.size(); ++k) {
    bool all1 = true;
    for (const auto& r : traced) all1 = all1 && r.cases[k] == CaseLabel::I;
    if (!all1 || !bs.rho[k]) continue;
    ++rho_steps;
    if (*bs.rho[k] > bound) {
      ++bad;
      why = "rho_" + std::to_string(k) + "=" + fmt(*bs.rho[k]);
    }
  }
  // gamma and r ranges on quadratic and Rosenbrock traces.
  std::size_t h_steps = 0, h_bad = 0;
  check_h_ranges(traced, h_steps, h_bad);
  ExperimentSpec rb = load_config(kConfigs / "rosenbrock_origin.yaml");
  for (const auto& v : rb.variants) {
    GDConfig c = rb.base;
    c.sigma1_scheme = v.sigma1;
    c.sigma2_scheme = v.sigma2;
    std::vector<RunResult> rs;
    for (std::uint64_t s = 1; s <= 10; ++s) rs.push_back(run(c, s));
    check_h_ranges(rs, h_steps, h_bad);
  }
  if (h_bad) why = std::to_string(h_bad) + " gamma/r range violations";
  bad += h_bad;
  Outcome o;
  o.pass = cells.pass && bad == 0 && rho_steps > 0 && h_steps > 0;
  o.detail = "kernel cells: " + cells.detail + "; E[d^2] cases " + std::to_string(d2) + "; engine rho steps " +
             std::to_string(rho_steps) + "; gamma/r steps " + std::to_string(h_steps) +
             (why.empty() ? "" : "; " + why);
  return o;
}

Outcome bias_scaling() {
  auto rb = make_rosenbrock();
  const double x[] = {0.3, 0.7};
  const int qfs[] = {6, 8, 10};
  BiasScaling b = check_bias_scaling(*rb, x, RoundingScheme::sr(), qfs, 12, kBiasRuns, 4001);
  Outcome o;
  o.pass = b.verdict == Verdict::pass && b.slope >= kMinBiasSlope;
  o.detail = "slope=" + fmt(b.slope) + " (min " + fmt(kMinBiasSlope) + "), |bias|=";
  for (std::size_t i = 0; i < b.bias_norm.size(); ++i) o.detail += (i ? "," : "") + fmt(b.bias_norm[i]);
  return o;
}

Outcome envelope() {
  ExperimentSpec spec = load_config(kConfigs / "quadratic_envelope.yaml");
  spec.baseline = BaselineKind::none;
  ExperimentResult e = run_experiment(spec, workers());
  const Summary& sr = variant(e, "sr/sr").summary;
  const Summary& se = variant(e, "sr/sr_eps:0.4").summary;
  BoundParams p{spec.base.t, *spec.base.objective->L(), *spec.base.objective->mu(), std::nullopt};
  const bool t_ok = spec.base.t < 1.0 / (4 * p.L);
  auto env = case1_sr_envelope(sr.mean_gap.size() - 1, p, sr.mean_gap.front());
  double worst = 0;
  for (std::size_t k = 0; k < env.size(); ++k) worst = std::max(worst, sr.mean_gap[k] / env[k]);
  std::size_t order_bad = 0;
  for (std::size_t k = kOrderingFrom; k < se.mean_gap.size(); ++k) order_bad += se.mean_gap[k] <= sr.mean_gap[k] ? 0 : 1;
  Outcome o;
  o.pass = t_ok && spec.seeds == 100 && sr.runs == 100 && se.runs == 100 && worst <= kEnvelopeSlack && order_bad == 0;
  o.detail = "t=" + fmt(spec.base.t) + " max mean/envelope=" + fmt(worst) + " (<= " + fmt(kEnvelopeSlack) +
             "), SR_eps above SR at " + std::to_string(order_bad) + " steps k>=" + std::to_string(kOrderingFrom);
  return o;
}

double grad_norm(const Objective& f, const std::vector<double>& x) {
  double s = 0;
  for (double g : f.grad(x)) s += g * g;
  return std::sqrt(s);
}

Outcome himmelblau() {
  ExperimentSpec spec = load_config(kConfigs / "himmelblau_grid_min.yaml");
  spec.baseline = BaselineKind::none;
  ExperimentResult e = run_experiment(spec, workers());
  const auto& f = *spec.base.objective;
  const double u = spec.base.working_fmt.u();
  const VariantResult& sr = variant(e, "sr");
  std::size_t exact = 0;
  for (const auto& r : sr.runs) exact += r.final_x == std::vector<double>{3.0, 2.0} ? 1 : 0;
  const VariantResult& rn = variant(e, "rn");
  std::size_t stuck = 0;
  double rn_grad = 0;
  for (const auto& r : rn.runs) {
    rn_grad = grad_norm(f, r.final_x);
    stuck += (r.stagnated && rn_grad > 10 * u) ? 1 : 0;
  }
  // Starts in the basin of the nonrepresentable minimizer x4.
  const std::vector<double> x4 = himmelblau_minimizers()[3];
  std::size_t near = 0, hit = 0, x4_runs = 0;
  double worst = 0;
  for (const std::vector<double>& x0 : {std::vector<double>{3.5, -1.5}, {4.0, -2.0}, {3.0, -1.0}}) {
    ExperimentSpec s4 = load_config(kConfigs / "himmelblau_x4.yaml");
    s4.base.x0 = x0;
    s4.baseline = BaselineKind::none;
    s4.variants = {{"sr", RoundingScheme::sr(), RoundingScheme::sr()}};
    s4.trace_runs = 0;
    ExperimentResult r4 = run_experiment(s4, workers());
    for (const auto& r : r4.variants[0].runs) {
      ++x4_runs;
      double d = std::hypot(r.final_x[0] - x4[0], r.final_x[1] - x4[1]);
      worst = std::max(worst, d);
      near += d <= kHimmelblauX4Radius ? 1 : 0;
      for (double fk : r.f_curve) hit += fk == 0.0 ? 1 : 0;
    }
  }
  Outcome o;
  o.pass = sr.runs.size() == 30 && exact == 30 && rn.runs.size() == 30 && stuck == 30 && x4_runs == 90 &&
           near == 90 && hit == 0;
  o.detail = "SR exact at (3,2): " + std::to_string(exact) + "/30; RN stagnated with |grad| > 10u: " +
             std::to_string(stuck) + "/30 (|grad|=" + fmt(rn_grad) + "); x4 starts within " +
             fmt(kHimmelblauX4Radius) + ": " + std::to_string(near) + "/" + std::to_string(x4_runs) +
             " (max dist " + fmt(worst) + "), iterates with f = 0: " + std::to_string(hit);
  return o;
}

Outcome rosenbrock() {
  ExperimentSpec spec = load_config(kConfigs / "rosenbrock_origin.yaml");
  spec.baseline = BaselineKind::reference;
  ExperimentResult e = run_experiment(spec, workers());
  const auto& sr = variant(e, "sr").summary.mean_f;
  const auto& s2 = variant(e, "sr_eps:0.2").summary.mean_f;
  const auto& s4 = variant(e, "sr_eps:0.4").summary.mean_f;
  const std::size_t b = kRosenbrockBudget;
  const bool order = s4[b] < s2[b] && s2[b] < sr[b];
  const double base = e.baseline_f[kRosenbrockBaselineAt];
  const double rel = sr[kRosenbrockBaselineAt] / base - 1.0;
  const bool band = std::fabs(rel) <= kRosenbrockBand;
  const bool early = s4[kRosenbrockEarly] <= kRosenbrockEarlyMax;
  Outcome o;
  o.pass = spec.seeds == 30 && order && band && early;
  o.detail = "f@" + std::to_string(b) + ": SR_eps(0.4)=" + fmt(s4[b]) + " SR_eps(0.2)=" + fmt(s2[b]) +
             " SR=" + fmt(sr[b]) + "; SR vs double at " + std::to_string(kRosenbrockBaselineAt) + ": " +
             fmt(100 * rel) + "%; SR_eps(0.4)@" + std::to_string(kRosenbrockEarly) + "=" + fmt(s4[kRosenbrockEarly]);
  return o;
}

Outcome stepsize_sweep() {
  ExperimentSpec spec = load_config(kConfigs / "blr_step_sweep.yaml");
  spec.baseline = BaselineKind::none;
  const std::vector<double> ts{0.1, 0.01, std::ldexp(1.0, -8)};
  auto pts = run_sweep(spec, "t", ts, workers());
  const int budget = spec.base.iterations;
  std::vector<double> rn_final;
  std::vector<double> sr_its, se_its;
  std::size_t failed = 0;
  bool sr_censored = false;
  for (const auto& p : pts) {
    for (const auto& v : p.result.variants) failed += v.failures.size();
    rn_final.push_back(variant(p.result, "rn").summary.mean_f.back());
    auto it = variant(p.result, "sr").summary.iterations_to_threshold;
    // An unreached threshold is censored at the budget: the true count is larger.
    sr_its.push_back(it ? *it : budget);
    sr_censored = sr_censored || !it;
    auto ie = variant(p.result, "sr_eps:0.6").summary.iterations_to_threshold;
    se_its.push_back(ie ? *ie : std::nan(""));
  }
  const bool rn_up = rn_final[0] <= rn_final[1] && rn_final[1] <= rn_final[2] && rn_final[0] < rn_final[2];
  const double growth = sr_its.back() / sr_its.front();
  const bool se_all = std::none_of(se_its.begin(), se_its.end(), [](double v) { return std::isnan(v); });
  const double spread = se_all ? *std::max_element(se_its.begin(), se_its.end()) /
                                     *std::min_element(se_its.begin(), se_its.end())
                               : std::nan("");
  Outcome o;
  o.pass = failed == 0 && rn_up && growth >= kSrGrowthMin && se_all && spread <= kSrEpsSpreadMax;
  std::string t_eff;
  for (const auto& p : pts) t_eff += (t_eff.empty() ? "" : ",") + fmt(p.result.t_effective);
  o.detail = "t=" + t_eff + "; RN final " + fmt(rn_final[0]) + "," + fmt(rn_final[1]) + "," + fmt(rn_final[2]) +
             "; SR its " + fmt(sr_its[0]) + "," + fmt(sr_its[1]) + "," + fmt(sr_its[2]) + (sr_censored ? "+" : "") +
             " growth " + (sr_censored ? ">=" : "") + fmt(growth) + "x; SR_eps(0.6) its " + fmt(se_its[0]) + "," +
             fmt(se_its[1]) + "," + fmt(se_its[2]) + " spread " + fmt(spread) + "x";
  return o;
}

Outcome float_stagnation() {
  const FloatFormat f8 = make_float_format(3, 5);
  struct S {
    double x, g;
    RoundingScheme s;
  };
  std::size_t bad = 0, n = 0;
  std::map<int, int> branches;
  std::string why;
  std::uint64_t seed = 9001;
  for (const S& s : {S{1.0, 1.0, RoundingScheme::sr()}, S{1.0, -1.0, RoundingScheme::sr()},
                     S{-1.25, 1.0, RoundingScheme::sr()}, S{1.5, 1.0, RoundingScheme::signed_sr_eps(0.4)},
                     S{1.5, -1.0, RoundingScheme::signed_sr_eps(0.4)}, S{-1.5, 1.0, RoundingScheme::signed_sr_eps(0.2)},
                     S{-1.25, -1.0, RoundingScheme::signed_sr_eps(0.6)}}) {
    StagnationCheck c = check_stagnation_regime_float(s.x, s.g, 1.0 / 64, f8, s.s, kKernelSamples, seed++);
    ++n;
    if (s.s.biased()) branches[c.branch] += 1;
    if (!c.pass) {
      ++bad;
      why = s.s.to_string() + " x=" + fmt(s.x) + " g=" + fmt(s.g) + " mean=" + fmt(c.mc.mean) + " predicted=" +
            fmt(c.predicted);
    }
  }
  Outcome o;
  o.pass = bad == 0 && branches[1] > 0 && branches[-1] > 0;
  o.detail = "fp8e5 (3 significant bits): " + std::to_string(n) + " cases, " + std::to_string(bad) + " failed" +
             (why.empty() ? "" : "; " + why);
  return o;
}

Outcome pl_estimator() {
  auto q = make_mixed_scale_quadratic();
  std::vector<std::pair<double, double>> box{{-0.9, 1.1}, {0, 2}, {9, 11}, {99, 101}, {999, 1001}};
  PlEstimate eq = estimate_pl_constants(*q, box, 101);
  auto rb = make_rosenbrock();
  std::vector<std::pair<double, double>> sq{{0, 2}, {0, 2}};
  PlEstimate er = estimate_pl_constants(*rb, sq, 401);
  const bool q_ok = std::fabs(eq.L_hat / 100.0 - 1) <= kPlRelTol && std::fabs(eq.mu_hat / 1e-3 - 1) <= kPlRelTol;
  const bool r_ok = er.mu_hat >= kRosenbrockMuLo && er.mu_hat <= kRosenbrockMuHi;
  Outcome o;
  o.pass = q_ok && r_ok;
  o.detail = "quadratic L_hat=" + fmt(eq.L_hat) + " mu_hat=" + fmt(eq.mu_hat) + " (" + eq.method +
             "); rosenbrock mu_hat=" + fmt(er.mu_hat) + " in [" + fmt(kRosenbrockMuLo) + "," + fmt(kRosenbrockMuHi) +
             "], L_hat=" + fmt(er.L_hat) + " vs declared " + fmt(*rb->L());
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "exhaustive two-round distribution", 1, exhaustive},
      {2, "rounding-kernel laws on the format x eps grid", 30, kernel_laws},
      {3, "kernel moment suite", 120, kernel_suite},
      {4, "O(u^2) bias scaling of the Rosenbrock recipe", 120, bias_scaling},
      {5, "bound envelope on the quadratic", 120, envelope},
      {6, "Himmelblau exactness and stagnation", 60, himmelblau},
      {7, "Rosenbrock ordering", 180, rosenbrock},
      {8, "BLR stepsize sensitivity", 300, stepsize_sweep},
      {9, "float stagnation oracle", 60, float_stagnation},
      {10, "PL estimator", 120, pl_estimator},
  };
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && std::find(pick.begin(), pick.end(), c.id) == pick.end()) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    std::printf("%s criterion %d: %s | %s | %.1fs (budget %.0fs)%s\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : " over budget");
    std::fflush(stdout);
    failed += pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
