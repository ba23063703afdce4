// Python module lpgd._core: rounding kernel, config runner, PL estimator and
// the oracle suite. Library errors map to Python exception subclasses.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lpgd/bounds.hpp"
#include "lpgd/error.hpp"
#include "lpgd/harness.hpp"
#include "lpgd/oracle.hpp"

namespace py = pybind11;
using namespace lpgd;

namespace {

ObjectivePtr objective_by_name(const std::string& name) {
  if (name == "quadratic") return make_mixed_scale_quadratic();
  if (name == "rosenbrock") return make_rosenbrock();
  if (name == "himmelblau") return make_himmelblau();
  throw ConfigError("objective must be quadratic | rosenbrock | himmelblau");
}

py::dict summary_dict(const Summary& s) {
  py::dict d;
  d["label"] = s.label;
  d["runs"] = s.runs;
  d["failed"] = s.failed;
  d["mean_f"] = s.mean_f;
  d["std_f"] = s.std_f;
  d["mean_gap"] = s.mean_gap;
  d["std_gap"] = s.std_gap;
  d["case_frac"] = s.case_frac;
  d["stagnation_rate"] = s.stagnation_rate;
  d["iterations_to_threshold"] = s.iterations_to_threshold;
  d["envelope"] = s.envelope;
  d["note"] = s.note;
  return d;
}

py::dict run_spec(ExperimentSpec spec, std::optional<int> seeds, std::optional<int> iterations, unsigned jobs) {
  if (seeds) spec.seeds = *seeds;
  if (iterations) spec.base.iterations = *iterations;
  ExperimentResult e;
  {
    py::gil_scoped_release release;
    e = run_experiment(spec, jobs);
  }
  py::dict out;
  out["name"] = e.spec.name;
  out["t"] = e.t_effective;
  out["t_requested"] = e.spec.t_requested;
  py::list variants;
  for (const auto& v : e.variants) variants.append(summary_dict(v.summary));
  out["variants"] = variants;
  out["baseline_f"] = e.baseline_f;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Low-precision gradient descent core";

  auto base = py::register_exception<Error>(m, "LpgdError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<OverflowError>(m, "OverflowError", base.ptr());
  py::register_exception<FormatMismatchError>(m, "FormatMismatchError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  m.def(
      "format_info",
      [](const std::string& fmt) {
        QFormat f = parse_qformat(fmt);
        py::dict d;
        d["qi"] = f.qi;
        d["qf"] = f.qf;
        d["u"] = f.u();
        d["min"] = f.min_value();
        d["max"] = f.max_value();
        return d;
      },
      py::arg("fmt"), "Unit, range and bit split of a Q<qi>.<qf> format.");

  m.def(
      "round",
      [](double x, const std::string& fmt, const std::string& scheme, std::size_t n, std::uint64_t seed,
         int v_sign) {
        QFormat f = parse_qformat(fmt);
        RoundingScheme s = parse_scheme(scheme);
        RandomStream rng(seed);
        std::vector<double> out(n);
        for (auto& y : out) y = round(x, f, s, rng, v_sign).value();
        return out;
      },
      py::arg("x"), py::arg("fmt"), py::arg("scheme"), py::arg("n") = 1, py::arg("seed") = 1, py::arg("v_sign") = 0,
      "n independent roundings of x, one stream draw each.");

  m.def(
      "prob_round_down",
      [](double x, const std::string& fmt, const std::string& scheme, int v_sign) {
        return prob_round_down(x, parse_qformat(fmt), parse_scheme(scheme), v_sign).to_double();
      },
      py::arg("x"), py::arg("fmt"), py::arg("scheme"), py::arg("v_sign") = 0);

  m.def(
      "expected_round",
      [](double x, const std::string& fmt, const std::string& scheme, int v_sign) {
        return expected_round(x, parse_qformat(fmt), parse_scheme(scheme), v_sign).to_double();
      },
      py::arg("x"), py::arg("fmt"), py::arg("scheme"), py::arg("v_sign") = 0);

  m.def(
      "run_config",
      [](const std::string& path, std::optional<int> seeds, std::optional<int> iterations, unsigned jobs) {
        return run_spec(load_config(path), seeds, iterations, jobs);
      },
      py::arg("path"), py::arg("seeds") = py::none(), py::arg("iterations") = py::none(), py::arg("jobs") = 1,
      "Runs a YAML config file and returns the per-variant summaries.");

  m.def(
      "run_config_text",
      [](const std::string& text, const std::string& base_dir, std::optional<int> seeds,
         std::optional<int> iterations, unsigned jobs) {
        return run_spec(parse_config(text, "<string>", base_dir), seeds, iterations, jobs);
      },
      py::arg("text"), py::arg("base_dir") = ".", py::arg("seeds") = py::none(), py::arg("iterations") = py::none(),
      py::arg("jobs") = 1);

  m.def("config_schema", &config_schema);

  m.def(
      "estimate_pl",
      [](const std::string& objective, std::vector<std::pair<double, double>> box, std::size_t grid) {
        ObjectivePtr obj = objective_by_name(objective);
        if (box.size() == 1 && obj->dim() > 1) box.assign(obj->dim(), box.front());
        PlEstimate e = estimate_pl_constants(*obj, box, grid);
        py::dict d;
        d["L_hat"] = e.L_hat;
        d["mu_hat"] = e.mu_hat;
        d["points"] = e.points;
        d["method"] = e.method;
        return d;
      },
      py::arg("objective"), py::arg("box"), py::arg("grid"));

  m.def(
      "verify",
      [](bool quick) {
        std::vector<CheckLine> lines;
        {
          py::gil_scoped_release release;
          lines = verify_suite(quick);
        }
        py::list out;
        for (const auto& l : lines) out.append(py::make_tuple(l.name, l.pass, l.detail));
        return out;
      },
      py::arg("quick") = true, "Oracle suite as (name, passed, detail) tuples.");
}
