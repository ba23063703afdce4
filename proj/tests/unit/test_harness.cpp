// Config loading, dataset ingestion, ensemble statistics and outputs.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lpgd/error.hpp"
#include "lpgd/harness.hpp"

using namespace lpgd;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(LPGD_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("lpgd_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void put_be32(std::ofstream& o, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  o.write(b, 4);
}

// Images of 2x2 pixels; image i has all pixels equal to 10 * i.
void write_idx(const fs::path& dir, const std::vector<int>& labels, std::uint32_t img_magic = 0x803,
               std::size_t drop_bytes = 0) {
  {
    std::ofstream o(dir / "img", std::ios::binary);
    put_be32(o, img_magic);
    put_be32(o, static_cast<std::uint32_t>(labels.size()));
    put_be32(o, 2);
    put_be32(o, 2);
    std::string px;
    for (std::size_t i = 0; i < labels.size(); ++i) px.append(4, static_cast<char>(10 * i));
    px.resize(px.size() - drop_bytes);
    o.write(px.data(), static_cast<std::streamsize>(px.size()));
  }
  std::ofstream o(dir / "lbl", std::ios::binary);
  put_be32(o, 0x801);
  put_be32(o, static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) o.put(static_cast<char>(l));
}

std::string replace_line(std::string text, const std::string& from, const std::string& to) {
  return text.replace(text.find(from), from.size(), to);
}

const char* kSmall = R"(name: small
objective: quadratic
diag: [2, 1, 0.5]
xstar: [0.5, -0.25, 1]
x0: [3, 2, -3]
t: 1/16
working_format: Q15.8
schemes: [rn, sr, "sr_eps:0.4"]
iterations: 40
seeds: 6
)";

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("number parsing") {
  CHECK(parse_number("0.25") == 0.25);
  CHECK(parse_number("1/1024") == std::ldexp(1.0, -10));
  CHECK(parse_number("2^-10") == std::ldexp(1.0, -10));
  CHECK(parse_number("-3e-2") == -0.03);
  CHECK_THROWS_AS(parse_number("1/0"), ConfigError);
  CHECK_THROWS_AS(parse_number("x"), ConfigError);
}

TEST_CASE("bundled configs") {
  ExperimentSpec r = load_config(kConfigs / "rosenbrock_origin.yaml");
  CHECK(r.base.t == std::ldexp(1.0, -10));
  CHECK(r.base.working_fmt == make_format(6, 10));
  CHECK(r.base.mul_fmt == make_format(10, 6));
  ExperimentSpec h = load_config(kConfigs / "himmelblau_grid_min.yaml");
  CHECK(h.t_requested == 0.012);
  CHECK(h.base.t == 0.01171875);
  CHECK(h.base.working_fmt == make_format(8, 8));
  ExperimentSpec b = load_config(kConfigs / "blr_step_sweep.yaml");
  CHECK(b.seeds == kDefaultBlrSeeds);
  CHECK(b.base.working_fmt == make_format(15, 8));
  CHECK(b.base.mul_fmt == make_format(15, 6));
}

TEST_CASE("bundled fixed-point configs use the tabulated formats") {
  const std::vector<QFormat> table{make_format(26, 6), make_format(6, 10), make_format(10, 6),
                                   make_format(8, 8),  make_format(15, 8), make_format(15, 6)};
  auto listed = [&](QFormat f) { return std::find(table.begin(), table.end(), f) != table.end(); };
  int fixed = 0;
  for (const auto& e : fs::directory_iterator(kConfigs)) {
    if (e.path().extension() != ".yaml") continue;
    ExperimentSpec s = load_config(e.path());
    INFO(e.path().filename().string());
    if (s.base.number_system != NumberSystem::fixed) continue;
    ++fixed;
    CHECK(listed(s.base.working_fmt));
    CHECK(listed(s.base.mul_fmt));
  }
  CHECK(fixed >= 6);
}

TEST_CASE("config diagnostics") {
  CHECK_THROWS_WITH_AS(parse_config("name: x\nt: 0.25\n", "a.yaml"), doctest::Contains("objective"), ConfigError);
  std::string unknown = std::string(kSmall) + "stepsize: 0.1\n";
  CHECK_THROWS_WITH_AS(parse_config(unknown, "b.yaml"), doctest::Contains("b.yaml:11:"), ConfigError);
  CHECK_THROWS_AS(parse_config(replace_line(kSmall, "seeds: 6", "seeds: 0"), "c.yaml"), ConfigError);
  std::string off_grid = R"(name: g
objective: rosenbrock
x0: [0, 0]
t: 0.1
working_format: Q6.10
schemes: [sr]
)";
  CHECK_THROWS_WITH_AS(parse_config(off_grid), doctest::Contains("quantize_t"), ConfigError);
  CHECK_THROWS_AS(parse_config("name: d\nobjective: rosenbrock\nschemes: [sr, sr]\nt: 2^-10\n"), ConfigError);
  CHECK_FALSE(config_schema().empty());
}

TEST_CASE("IDX ingestion") {
  fs::path d = scratch("idx");
  write_idx(d, {3, 8, 1, 3, 8});
  Dataset ds = load_idx(d / "img", d / "lbl", 3, 8);
  CHECK(ds.rows == 4);
  CHECK(ds.cols == 4);
  CHECK(ds.labels == std::vector<int>{0, 1, 0, 1});
  CHECK(ds.at(1, 0) == 10.0 / 255);
  CHECK(ds.at(3, 3) == 40.0 / 255);
  CHECK_THROWS_AS(load_idx(d / "img", d / "lbl", 3, 3), ConfigError);
  CHECK_THROWS(load_idx(d / "img", d / "lbl", 3, 7));
  write_idx(d, {3, 8}, 0x804);
  CHECK_THROWS_WITH(load_idx(d / "img", d / "lbl", 3, 8), doctest::Contains("magic"));
  write_idx(d, {3, 8}, 0x803, 3);
  CHECK_THROWS_WITH(load_idx(d / "img", d / "lbl", 3, 8), doctest::Contains("length"));
  CHECK_THROWS(load_idx(d / "missing", d / "lbl", 3, 8));
}

TEST_CASE("summaries") {
  ExperimentSpec s = parse_config(kSmall);
  s.baseline = BaselineKind::none;
  ExperimentResult e = run_experiment(s, 1);
  REQUIRE(e.variants.size() == 3);
  const Summary& rn = e.variants[0].summary;
  for (double v : rn.std_f) CHECK(v == 0.0);  // RN runs are deterministic
  for (const auto& v : e.variants)
    for (const auto& c : v.summary.case_frac) CHECK(c[0] + c[1] + c[2] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e.variants[1].summary.mean_f.size() == 41);

  std::vector<RunResult> one{e.variants[1].runs.front()};
  Summary single = summarize(one, 0.0, std::nullopt);
  CHECK(single.mean_f == one.front().f_curve);

  s.seeds = 1;
  s.base.iterations = 0;
  ExperimentResult z = run_experiment(s, 1);
  CHECK(z.variants[0].summary.mean_f.size() == 1);
  CHECK(z.variants[0].summary.case_frac.empty());
}

TEST_CASE("summary CSV round-trips") {
  ExperimentSpec s = parse_config(kSmall);
  s.seeds = 30;
  ExperimentResult e = run_experiment(s, 2);
  for (const auto& v : e.variants) {
    std::stringstream ss;
    write_summary_csv(ss, v.summary);
    Summary back = read_summary_csv(ss, v.summary.label);
    CHECK(back.mean_f == v.summary.mean_f);
    CHECK(back.std_f == v.summary.std_f);
    CHECK(back.mean_gap == v.summary.mean_gap);
    CHECK(back.std_gap == v.summary.std_gap);
    CHECK(back.case_frac == v.summary.case_frac);
    CHECK(back.envelope == v.summary.envelope);
  }
  CHECK_FALSE(e.variants[1].summary.envelope.empty());
}

TEST_CASE("outputs are byte-identical across repeats and parallelism") {
  ExperimentSpec s = parse_config(kSmall);
  fs::path a = scratch("out_a"), b = scratch("out_b");
  write_outputs(run_experiment(s, 1), a);
  write_outputs(run_experiment(s, 4), b);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
  }
  CHECK(files >= 8);
  CHECK(fs::exists(a / "overview.csv"));
  CHECK(fs::exists(a / "objective.svg"));
  CHECK(slurp(a / "summary_sr.csv").rfind("k,mean_f,std_f,mean_gap,std_gap,", 0) == 0);
}

TEST_CASE("overflowing runs are recorded as failures") {
  std::string text = R"(name: boom
objective: quadratic
diag: [2]
xstar: [0]
x0: [100]
t: 1
working_format: Q8.8
schemes: [rn]
iterations: 20
seeds: 3
bounds: false
)";
  ExperimentSpec s = parse_config(text);
  s.baseline = BaselineKind::none;
  ExperimentResult e = run_experiment(s, 1);
  CHECK(e.variants[0].failures.size() == 3);
  CHECK(e.variants[0].summary.failed == 3);
  CHECK(e.variants[0].summary.note.find("overflow") != std::string::npos);
}

TEST_CASE("sweeps") {
  ExperimentSpec s = parse_config(kSmall);
  s.seeds = 2;
  std::vector<double> its{5, 10};
  auto pts = run_sweep(s, "iterations", its);
  REQUIRE(pts.size() == 2);
  CHECK(pts[1].result.variants[0].summary.mean_f.size() == 11);
  std::stringstream ss;
  write_sweep_csv(ss, "iterations", pts);
  CHECK(ss.str().rfind("param,value,t,label,", 0) == 0);
  CHECK_THROWS_AS(run_sweep(s, "eps", its), ConfigError);
}

TEST_CASE("svg chart and labels") {
  std::vector<ChartSeries> series{{"a", {1, 0.5, 0.25}}, {"b", {2, 0, 1}}};
  std::string svg = svg_line_chart("t", series, true);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(file_label("sr_eps:0.4") == file_label("sr_eps:0.4"));
  CHECK(file_label("sr_eps:0.4").find(':') == std::string::npos);
}

}  // TEST_SUITE
