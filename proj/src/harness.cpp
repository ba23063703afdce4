#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "lpgd/error.hpp"
#include "lpgd/harness.hpp"

namespace lpgd {

Summary summarize(std::span<const RunResult> runs, std::optional<double> f_star, std::optional<double> threshold) {
  if (runs.empty()) throw PreconditionError("summarize: empty ensemble");
  const std::size_t rows = runs.front().f_curve.size();
  for (const auto& r : runs)
    if (r.f_curve.size() != rows) throw PreconditionError("summarize: runs differ in length");
  Summary s;
  s.runs = runs.size();
  const double n = static_cast<double>(runs.size());
  auto moments = [&](double shift, std::vector<double>& mean, std::vector<double>& sd) {
    mean.assign(rows, 0.0);
    sd.assign(rows, 0.0);
    for (std::size_t k = 0; k < rows; ++k) {
      double m = 0;
      for (const auto& r : runs) m += r.f_curve[k] - shift;
      m /= n;
      double q = 0;
      for (const auto& r : runs) q += (r.f_curve[k] - shift - m) * (r.f_curve[k] - shift - m);
      mean[k] = m;
      sd[k] = runs.size() > 1 ? std::sqrt(q / (n - 1)) : 0.0;
    }
  };
  moments(0.0, s.mean_f, s.std_f);
  if (f_star) moments(*f_star, s.mean_gap, s.std_gap);
  s.case_frac.assign(rows > 0 ? rows - 1 : 0, {0.0, 0.0, 0.0});
  for (std::size_t k = 0; k + 1 < rows; ++k) {
    std::array<std::size_t, 3> c{0, 0, 0};
    for (const auto& r : runs) ++c[static_cast<int>(r.cases[k]) - 1];
    for (int j = 0; j < 3; ++j) s.case_frac[k][j] = static_cast<double>(c[j]) / n;
  }
  std::size_t stag = 0;
  for (const auto& r : runs) stag += r.stagnated ? 1 : 0;
  s.stagnation_rate = static_cast<double>(stag) / n;
  if (threshold)
    for (std::size_t k = 0; k < rows; ++k)
      if (s.mean_f[k] <= *threshold) {
        s.iterations_to_threshold = static_cast<int>(k);
        break;
      }
  return s;
}

namespace {

GDConfig variant_config(const ExperimentSpec& spec, const Variant& v, bool keep_traces) {
  GDConfig cfg = spec.base;
  cfg.sigma1_scheme = v.sigma1;
  cfg.sigma2_scheme = v.sigma2;
  cfg.keep_traces = keep_traces;
  return cfg;
}

bool wants_envelope(const ExperimentSpec& spec) {
  const auto& obj = *spec.base.objective;
  return spec.bounds && spec.base.number_system == NumberSystem::fixed && spec.seeds >= static_cast<int>(kMinEnsemble) &&
         (spec.L || obj.L()) && (spec.mu || obj.mu()) && obj.f_star();
}

void attach_envelope(const ExperimentSpec& spec, VariantResult& vr) {
  const auto& obj = *spec.base.objective;
  if (!spec.bounds) return;
  if (spec.base.number_system != NumberSystem::fixed) {
    vr.summary.note = "envelope: fixed-point runs only";
    return;
  }
  if (!(spec.L || obj.L()) || !(spec.mu || obj.mu()) || !obj.f_star()) {
    vr.summary.note = "envelope: L, mu or f* unknown";
    return;
  }
  if (vr.runs.size() < kMinEnsemble) {
    vr.summary.note = "envelope: needs >= 30 successful runs";
    return;
  }
  BoundParams p;
  p.t = vr.cfg.t;
  p.L = spec.L ? *spec.L : *obj.L();
  p.mu = spec.mu ? *spec.mu : *obj.mu();
  if (vr.variant.sigma2.biased()) p.eps = vr.variant.sigma2.eps;
  try {
    BoundSeries series = bound_series(vr.runs, vr.cfg);
    double gap0 = obj.value(vr.cfg.x0) - *obj.f_star();
    vr.summary.envelope = bound_envelope(series.cases, series, p, gap0);
  } catch (const PreconditionError& e) {
    vr.summary.note = e.what();
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned parallelism) {
  spec.validate();
  ExperimentResult out;
  out.spec = spec;
  out.t_effective = spec.base.t;
  const bool envelope = wants_envelope(spec);
  struct Job {
    std::size_t variant;
    std::uint64_t seed;
  };
  std::vector<GDConfig> cfgs;
  for (const auto& v : spec.variants) cfgs.push_back(variant_config(spec, v, envelope || spec.trace_runs > 0));
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < spec.variants.size(); ++v)
    for (int s = 0; s < spec.seeds; ++s) jobs.push_back({v, spec.seed_base + static_cast<std::uint64_t>(s)});

  std::vector<std::optional<RunResult>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      try {
        RunResult r = run(cfgs[jobs[j].variant], jobs[j].seed);
        // Traces beyond the exported seeds are only needed for the envelope.
        if (!envelope && jobs[j].seed - spec.seed_base >= static_cast<std::uint64_t>(spec.trace_runs))
          r.traces.clear();
        results[j] = std::move(r);
      } catch (const OverflowError& e) {
        errors[j] = std::string("overflow: ") + e.what();
      } catch (const Error& e) {
        errors[j] = e.what();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(jobs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const auto f_star = spec.base.objective->f_star();
  for (std::size_t v = 0; v < spec.variants.size(); ++v) {
    VariantResult vr;
    vr.variant = spec.variants[v];
    vr.cfg = cfgs[v];
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].variant != v) continue;
      if (results[j])
        vr.runs.push_back(std::move(*results[j]));
      else
        vr.failures.push_back({jobs[j].seed, errors[j]});
    }
    if (!vr.runs.empty()) {
      vr.summary = summarize(vr.runs, f_star, spec.loss_threshold);
      attach_envelope(spec, vr);
    }
    vr.summary.label = vr.variant.label;
    vr.summary.failed = vr.failures.size();
    if (!vr.failures.empty()) {
      std::string n = std::to_string(vr.failures.size()) + " run(s) failed: " + vr.failures.front().message;
      vr.summary.note = vr.summary.note.empty() ? n : vr.summary.note + "; " + n;
    }
    for (auto& r : vr.runs)
      if (r.seed - spec.seed_base >= static_cast<std::uint64_t>(spec.trace_runs)) r.traces.clear();
    out.variants.push_back(std::move(vr));
  }

  if (spec.baseline != BaselineKind::none) {
    GDConfig b = spec.base;
    b.keep_traces = false;
    b.sigma1_scheme = RoundingScheme::rn();
    b.sigma2_scheme = RoundingScheme::rn();
    if (spec.baseline == BaselineKind::reference) {
      b.number_system = NumberSystem::reference;
    } else {
      b.number_system = NumberSystem::lowfloat;
      b.float_fmt = parse_float_format("binary32");
      b.t = quantize_stepsize(spec.t_requested, b);
    }
    out.baseline_f = run(b, spec.seed_base).f_curve;
  }
  return out;
}

std::vector<SweepPoint> run_sweep(const ExperimentSpec& spec, const std::string& param,
                                  std::span<const double> values, unsigned parallelism) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  std::vector<SweepPoint> out;
  for (double v : values) {
    ExperimentSpec s = spec;
    if (param == "t") {
      if (!(v > 0)) throw ConfigError("sweep: t must be positive");
      s.t_requested = v;
      s.base.t = s.quantize_t ? quantize_stepsize(v, s.base) : v;
    } else if (param == "iterations") {
      s.base.iterations = static_cast<int>(v);
      if (v != std::floor(v) || v < 0) throw ConfigError("sweep: iterations must be a nonnegative integer");
    } else if (param == "seeds") {
      s.seeds = static_cast<int>(v);
      if (v != std::floor(v) || v < 1) throw ConfigError("sweep: seeds must be a positive integer");
    } else {
      throw ConfigError("sweep: unknown parameter '" + param + "' (t | iterations | seeds)");
    }
    out.push_back({v, run_experiment(s, parallelism)});
  }
  return out;
}

}  // namespace lpgd
