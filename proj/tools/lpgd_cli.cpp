// Command-line front end: run, sweep, verify, pl-estimate, schema.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <thread>

#include "lpgd/bounds.hpp"
#include "lpgd/error.hpp"
#include "lpgd/harness.hpp"
#include "lpgd/oracle.hpp"

namespace {

using namespace lpgd;

void print_overview(const ExperimentResult& e) {
  std::printf("%s: t = %s (requested %s), %d seeds, %s\n", e.spec.name.c_str(), format_double(e.t_effective).c_str(),
              format_double(e.spec.t_requested).c_str(), e.spec.seeds, to_string(e.spec.base.number_system).c_str());
  std::printf("  %-22s %14s %10s %8s %s\n", "variant", "final mean f", "to thresh", "stagnate", "note");
  for (const auto& v : e.variants) {
    const Summary& s = v.summary;
    std::string thr = s.iterations_to_threshold ? std::to_string(*s.iterations_to_threshold) : "-";
    std::printf("  %-22s %14.6g %10s %8.2f %s\n", v.variant.label.c_str(),
                s.mean_f.empty() ? NAN : s.mean_f.back(), thr.c_str(), s.stagnation_rate, s.note.c_str());
  }
  if (!e.baseline_f.empty())
    std::printf("  %-22s %14.6g\n", ("baseline " + to_string(e.spec.baseline)).c_str(), e.baseline_f.back());
}

std::vector<std::pair<double, double>> parse_box(const std::string& text, std::size_t dim) {
  std::vector<std::pair<double, double>> box;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t colon = part.find(':');
    if (colon == std::string::npos) throw ConfigError("box entries must be lo:hi, got '" + part + "'");
    box.emplace_back(parse_number(part.substr(0, colon)), parse_number(part.substr(colon + 1)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (box.size() == 1 && dim > 1) box.assign(dim, box.front());
  if (box.size() != dim)
    throw ConfigError("box has " + std::to_string(box.size()) + " intervals, objective needs " + std::to_string(dim));
  return box;
}

ObjectivePtr objective_by_name(const std::string& name) {
  if (name == "quadratic") return make_mixed_scale_quadratic();
  if (name == "rosenbrock") return make_rosenbrock();
  if (name == "himmelblau") return make_himmelblau();
  throw ConfigError("pl-estimate: objective must be quadratic | rosenbrock | himmelblau");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-precision gradient descent experiments"};
  app.require_subcommand(1);
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

  auto* run_cmd = app.add_subcommand("run", "Run one experiment config");
  std::string config;
  std::string out_dir;
  run_cmd->add_option("config", config, "YAML experiment config")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory (default: the config's output_dir)");
  run_cmd->add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a config over several values of one parameter");
  std::string param;
  sweep_cmd->add_option("config", config, "YAML experiment config")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--param", param, "name=v1,v2,... with name in t | iterations | seeds")->required();
  sweep_cmd->add_option("--out", out_dir, "Output directory (default: <output_dir>/sweep_<name>)");
  sweep_cmd->add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* verify_cmd = app.add_subcommand("verify", "Run the oracle suite and print a pass/fail table");
  bool quick = false;
  verify_cmd->add_flag("--quick", quick, "Use the minimum sample counts");

  auto* pl_cmd = app.add_subcommand("pl-estimate", "Grid estimate of the smoothness and PL constants");
  std::string obj_name;
  std::string box_text;
  std::size_t grid = 401;
  pl_cmd->add_option("objective", obj_name, "quadratic | rosenbrock | himmelblau")->required();
  pl_cmd->add_option("box", box_text, "lo:hi per coordinate, comma separated (one interval is broadcast)")->required();
  pl_cmd->add_option("grid", grid, "Points per axis (>= 101)")->required();

  app.add_subcommand("schema", "Print the config keys");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("run")) {
      ExperimentSpec spec = load_config(config);
      ExperimentResult e = run_experiment(spec, jobs);
      std::filesystem::path dir = out_dir.empty() ? spec.output_dir : std::filesystem::path(out_dir);
      write_outputs(e, dir);
      print_overview(e);
      std::printf("wrote %s\n", dir.string().c_str());
    } else if (app.got_subcommand("sweep")) {
      ExperimentSpec spec = load_config(config);
      auto eq = param.find('=');
      if (eq == std::string::npos) throw ConfigError("--param needs name=v1,v2,...");
      std::string name = param.substr(0, eq);
      std::vector<double> values;
      std::string rest = param.substr(eq + 1);
      for (std::size_t start = 0; start <= rest.size();) {
        std::size_t comma = rest.find(',', start);
        values.push_back(parse_number(rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      auto points = run_sweep(spec, name, values, jobs);
      std::filesystem::path dir = out_dir.empty() ? spec.output_dir / ("sweep_" + name) : std::filesystem::path(out_dir);
      write_sweep_outputs(name, points, dir);
      for (const auto& p : points) print_overview(p.result);
      std::printf("wrote %s\n", dir.string().c_str());
    } else if (app.got_subcommand("verify")) {
      auto lines = verify_suite(quick);
      std::size_t failed = 0;
      for (const auto& l : lines) {
        std::printf("%-4s  %-52s %s\n", l.pass ? "PASS" : "FAIL", l.name.c_str(), l.detail.c_str());
        failed += l.pass ? 0 : 1;
      }
      std::printf("%zu checks, %zu failed\n", lines.size(), failed);
      return failed == 0 ? 0 : 1;
    } else if (app.got_subcommand("pl-estimate")) {
      ObjectivePtr obj = objective_by_name(obj_name);
      auto box = parse_box(box_text, obj->dim());
      PlEstimate est = estimate_pl_constants(*obj, box, grid);
      std::printf("objective %s, %zu points (%s)\n", obj->name().c_str(), est.points, est.method.c_str());
      std::printf("L_hat  = %s%s\n", format_double(est.L_hat).c_str(),
                  obj->L() ? ("  (declared " + format_double(*obj->L()) + ")").c_str() : "");
      std::printf("mu_hat = %s%s\n", format_double(est.mu_hat).c_str(),
                  obj->mu() ? ("  (declared " + format_double(*obj->mu()) + ")").c_str() : "");
    } else {
      std::cout << config_schema();
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
