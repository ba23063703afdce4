#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lpgd/error.hpp"
#include "lpgd/harness.hpp"
#include "lpgd/rounding.hpp"

namespace lpgd {

namespace {

double parse_plain(std::string_view s, std::string_view whole) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (!s.empty() && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || b == e) throw ConfigError("cannot parse number '" + std::string(whole) + "'");
  return v;
}

}  // namespace

double parse_number(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    double den = parse_number(text.substr(slash + 1));
    if (den == 0.0) throw ConfigError("zero denominator in '" + std::string(text) + "'");
    return parse_number(text.substr(0, slash)) / den;
  }
  if (auto caret = text.find('^'); caret != std::string_view::npos)
    return std::pow(parse_plain(text.substr(0, caret), text), parse_plain(text.substr(caret + 1), text));
  double v = parse_plain(text, text);
  if (!std::isfinite(v)) throw ConfigError("non-finite number '" + std::string(text) + "'");
  return v;
}

double quantize_stepsize(double t, const GDConfig& cfg) {
  RandomStream unused(0);
  switch (cfg.number_system) {
    case NumberSystem::fixed:
      return round(t, cfg.working_fmt, RoundingScheme::rn(), unused).value();
    case NumberSystem::lowfloat:
      return fl_round(t, cfg.float_fmt, RoundingScheme::rn(), unused).value;
    case NumberSystem::reference:
      return t;
  }
  return t;
}

std::string to_string(BaselineKind b) {
  switch (b) {
    case BaselineKind::none:
      return "none";
    case BaselineKind::reference:
      return "reference";
    case BaselineKind::binary32:
      return "binary32";
  }
  return "?";
}

void ExperimentSpec::validate() const {
  if (seeds < 1) throw ConfigError("seeds must be >= 1");
  if (variants.empty()) throw ConfigError("schemes must list at least one variant");
  if (trace_runs < 0) throw ConfigError("trace_runs must be >= 0");
  std::set<std::string> labels;
  for (const auto& v : variants)
    if (!labels.insert(v.label).second) throw ConfigError("duplicate variant label '" + v.label + "'");
  base.validate();
}

namespace {

const std::set<std::string>& allowed_keys() {
  static const std::set<std::string> keys = {
      "name",      "objective",     "diag",         "xstar",          "dataset",     "digits",
      "reg",       "synthetic",     "x0",           "t",              "quantize_t",  "working_format",
      "multiply_format", "float_format", "number_system", "schemes", "sigma1_scheme", "iterations",
      "seeds",     "seed_base",     "baseline",     "L",              "mu",          "bounds",
      "loss_threshold", "trace_runs", "output_dir"};
  return keys;
}

class Reader {
 public:
  Reader(std::string origin, std::filesystem::path base_dir) : origin_(std::move(origin)), base_(std::move(base_dir)) {}

  ConfigError error(const YAML::Node& n, const std::string& what) const {
    return ConfigError(origin_ + ":" + std::to_string(n.Mark().line + 1) + ": " + what);
  }
  ConfigError error(const std::string& what) const { return ConfigError(origin_ + ": " + what); }

  std::string str(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) throw error(n, key + " must be a scalar");
    return n.as<std::string>();
  }
  double num(const YAML::Node& n, const std::string& key) const {
    try {
      return parse_number(str(n, key));
    } catch (const ConfigError& e) {
      throw error(n, key + ": " + e.what());
    }
  }
  long long integer(const YAML::Node& n, const std::string& key) const {
    double v = num(n, key);
    if (v != std::floor(v) || std::fabs(v) > 9e15) throw error(n, key + " must be an integer");
    return static_cast<long long>(v);
  }
  bool boolean(const YAML::Node& n, const std::string& key) const {
    std::string s = str(n, key);
    if (s == "true" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "no" || s == "off") return false;
    throw error(n, key + " must be true or false");
  }
  std::vector<double> list(const YAML::Node& n, const std::string& key) const {
    if (!n.IsSequence()) throw error(n, key + " must be a list");
    std::vector<double> out;
    for (const auto& e : n) out.push_back(num(e, key));
    return out;
  }
  template <class F>
  auto wrap(const YAML::Node& n, const std::string& key, F&& f) const {
    try {
      return f();
    } catch (const Error& e) {
      throw error(n, key + ": " + e.what());
    }
  }
  std::filesystem::path path(const std::string& p) const {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : base_ / q;
  }

 private:
  std::string origin_;
  std::filesystem::path base_;
};

std::shared_ptr<const Dataset> blr_dataset(const Reader& rd, const YAML::Node& root, ExperimentSpec& spec) {
  const YAML::Node ds = root["dataset"];
  std::string src = ds ? rd.str(ds, "dataset") : "synthetic:1";
  spec.dataset_source = src;
  if (src.rfind("synthetic:", 0) == 0) {
    SyntheticSpec ss;
    if (const YAML::Node syn = root["synthetic"]) {
      if (!syn.IsMap()) throw rd.error(syn, "synthetic must be a mapping");
      for (const auto& kv : syn) {
        std::string k = kv.first.as<std::string>();
        const YAML::Node& v = kv.second;
        if (k == "features")
          ss.features = static_cast<std::size_t>(rd.integer(v, k));
        else if (k == "samples")
          ss.samples = static_cast<std::size_t>(rd.integer(v, k));
        else if (k == "mean0")
          ss.mean0 = rd.num(v, k);
        else if (k == "mean1")
          ss.mean1 = rd.num(v, k);
        else if (k == "stddev")
          ss.stddev = rd.num(v, k);
        else if (k == "grid_bits")
          ss.grid_bits = static_cast<int>(rd.integer(v, k));
        else if (k == "intercept")
          ss.intercept = rd.boolean(v, k);
        else
          throw rd.error(kv.first, "unknown key 'synthetic." + k + "'");
      }
    }
    std::uint64_t seed = 0;
    std::string tail = src.substr(10);
    auto [p, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), seed);
    if (ec != std::errc() || p != tail.data() + tail.size() || tail.empty())
      throw rd.error(ds, "dataset seed must be an unsigned integer");
    return rd.wrap(ds, "dataset", [&] { return std::make_shared<const Dataset>(synthetic_blr_dataset(seed, ss)); });
  }
  if (src.rfind("idx:", 0) == 0) {
    std::string rest = src.substr(4);
    auto comma = rest.find(',');
    if (comma == std::string::npos) throw rd.error(ds, "idx dataset needs 'idx:<images>,<labels>'");
    int a = 3, b = 8;
    if (const YAML::Node dg = root["digits"]) {
      auto v = rd.list(dg, "digits");
      if (v.size() != 2) throw rd.error(dg, "digits must list two labels");
      a = static_cast<int>(v[0]);
      b = static_cast<int>(v[1]);
    }
    return rd.wrap(ds, "dataset", [&] {
      return std::make_shared<const Dataset>(
          load_idx(rd.path(rest.substr(0, comma)), rd.path(rest.substr(comma + 1)), a, b));
    });
  }
  throw rd.error(ds, "dataset must be 'synthetic:<seed>' or 'idx:<images>,<labels>'");
}

Variant variant_from(const Reader& rd, const YAML::Node& n, const std::optional<RoundingScheme>& sigma1) {
  Variant v;
  if (n.IsScalar()) {
    std::string s = n.as<std::string>();
    v.sigma2 = rd.wrap(n, "schemes", [&] { return parse_scheme(s); });
    v.sigma1 = sigma1.value_or(v.sigma2);
    v.label = sigma1 ? v.sigma1.to_string() + "/" + s : s;
    return v;
  }
  if (!n.IsMap()) throw rd.error(n, "schemes entries must be a scheme string or a mapping");
  std::optional<RoundingScheme> s1 = sigma1;
  std::optional<RoundingScheme> s2;
  for (const auto& kv : n) {
    std::string k = kv.first.as<std::string>();
    if (k == "label")
      v.label = rd.str(kv.second, k);
    else if (k == "sigma1")
      s1 = rd.wrap(kv.second, k, [&] { return parse_scheme(rd.str(kv.second, k)); });
    else if (k == "sigma2")
      s2 = rd.wrap(kv.second, k, [&] { return parse_scheme(rd.str(kv.second, k)); });
    else
      throw rd.error(kv.first, "unknown key 'schemes." + k + "'");
  }
  if (!s2) throw rd.error(n, "scheme mapping needs sigma2");
  v.sigma2 = *s2;
  v.sigma1 = s1.value_or(*s2);
  if (v.label.empty()) v.label = v.sigma1.to_string() + "/" + v.sigma2.to_string();
  return v;
}

}  // namespace

ExperimentSpec parse_config(std::string_view yaml_text, const std::string& origin,
                            const std::filesystem::path& base_dir) {
  Reader rd(origin, base_dir);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw rd.error("top level must be a mapping");
  for (const auto& kv : root) {
    std::string k = kv.first.as<std::string>();
    if (!allowed_keys().count(k)) throw rd.error(kv.first, "unknown key '" + k + "'");
  }
  auto need = [&](const char* key) {
    YAML::Node n = root[key];
    if (!n) throw rd.error(std::string("missing required key '") + key + "'");
    return n;
  };

  ExperimentSpec spec;
  spec.name = root["name"] ? rd.str(root["name"], "name") : std::filesystem::path(origin).stem().string();
  const YAML::Node on = need("objective");
  spec.objective_name = rd.str(on, "objective");
  GDConfig& cfg = spec.base;
  const std::string& obj = spec.objective_name;
  if (obj == "quadratic") {
    if (root["diag"] || root["xstar"]) {
      if (!root["diag"] || !root["xstar"]) throw rd.error(on, "quadratic needs both diag and xstar");
      auto d = rd.list(root["diag"], "diag");
      auto xs = rd.list(root["xstar"], "xstar");
      cfg.objective = rd.wrap(root["diag"], "diag", [&] { return make_quadratic(d, xs); });
    } else {
      cfg.objective = make_mixed_scale_quadratic();
    }
  } else if (obj == "rosenbrock") {
    cfg.objective = make_rosenbrock();
  } else if (obj == "himmelblau") {
    cfg.objective = make_himmelblau();
  } else if (obj == "blr") {
    double reg = root["reg"] ? rd.num(root["reg"], "reg") : 0.0;
    if (reg < 0) throw rd.error(root["reg"], "reg must be >= 0");
    auto data = blr_dataset(rd, root, spec);
    cfg.objective = make_blr(data, reg);
  } else {
    throw rd.error(on, "objective must be quadratic | rosenbrock | himmelblau | blr");
  }
  for (const char* k : {"diag", "xstar"})
    if (root[k] && obj != "quadratic") throw rd.error(root[k], std::string(k) + " only applies to quadratic");
  for (const char* k : {"dataset", "digits", "reg", "synthetic"})
    if (root[k] && obj != "blr") throw rd.error(root[k], std::string(k) + " only applies to blr");

  if (const YAML::Node n = root["number_system"])
    cfg.number_system = rd.wrap(n, "number_system", [&] { return parse_number_system(rd.str(n, "number_system")); });
  if (const YAML::Node n = root["working_format"])
    cfg.working_fmt = rd.wrap(n, "working_format", [&] { return parse_qformat(rd.str(n, "working_format")); });
  cfg.mul_fmt = cfg.working_fmt;
  if (const YAML::Node n = root["multiply_format"])
    cfg.mul_fmt = rd.wrap(n, "multiply_format", [&] { return parse_qformat(rd.str(n, "multiply_format")); });
  if (const YAML::Node n = root["float_format"])
    cfg.float_fmt = rd.wrap(n, "float_format", [&] { return parse_float_format(rd.str(n, "float_format")); });

  cfg.x0 = root["x0"] ? rd.list(root["x0"], "x0") : std::vector<double>(cfg.objective->dim(), 0.0);
  const YAML::Node tn = need("t");
  spec.t_requested = rd.num(tn, "t");
  if (!(spec.t_requested > 0)) throw rd.error(tn, "t must be positive");
  spec.quantize_t = root["quantize_t"] && rd.boolean(root["quantize_t"], "quantize_t");
  cfg.t = spec.quantize_t ? quantize_stepsize(spec.t_requested, cfg) : spec.t_requested;
  if (spec.quantize_t && !(cfg.t > 0))
    throw rd.error(tn, "t = " + format_double(spec.t_requested) + " quantizes to zero");

  if (const YAML::Node n = root["iterations"]) {
    cfg.iterations = static_cast<int>(rd.integer(n, "iterations"));
    if (cfg.iterations < 0) throw rd.error(n, "iterations must be >= 0");
  }
  spec.seeds = obj == "blr" ? kDefaultBlrSeeds : kDefaultSeeds;
  if (const YAML::Node n = root["seeds"]) {
    spec.seeds = static_cast<int>(rd.integer(n, "seeds"));
    if (spec.seeds < 1) throw rd.error(n, "seeds must be >= 1");
  }
  if (const YAML::Node n = root["seed_base"]) {
    long long s = rd.integer(n, "seed_base");
    if (s < 0) throw rd.error(n, "seed_base must be >= 0");
    spec.seed_base = static_cast<std::uint64_t>(s);
  }
  if (const YAML::Node n = root["baseline"]) {
    std::string b = rd.str(n, "baseline");
    if (b == "none")
      spec.baseline = BaselineKind::none;
    else if (b == "reference")
      spec.baseline = BaselineKind::reference;
    else if (b == "binary32")
      spec.baseline = BaselineKind::binary32;
    else
      throw rd.error(n, "baseline must be none | reference | binary32");
  }
  if (const YAML::Node n = root["L"]) spec.L = rd.num(n, "L");
  if (const YAML::Node n = root["mu"]) spec.mu = rd.num(n, "mu");
  if (const YAML::Node n = root["bounds"]) spec.bounds = rd.boolean(n, "bounds");
  if (const YAML::Node n = root["loss_threshold"]) spec.loss_threshold = rd.num(n, "loss_threshold");
  if (const YAML::Node n = root["trace_runs"]) {
    spec.trace_runs = static_cast<int>(rd.integer(n, "trace_runs"));
    if (spec.trace_runs < 0) throw rd.error(n, "trace_runs must be >= 0");
  }
  spec.output_dir = root["output_dir"] ? std::filesystem::path(rd.str(root["output_dir"], "output_dir"))
                                       : std::filesystem::path("out") / spec.name;

  std::optional<RoundingScheme> sigma1;
  if (const YAML::Node n = root["sigma1_scheme"])
    sigma1 = rd.wrap(n, "sigma1_scheme", [&] { return parse_scheme(rd.str(n, "sigma1_scheme")); });
  const YAML::Node sn = need("schemes");
  if (!sn.IsSequence() || sn.size() == 0) throw rd.error(sn, "schemes must be a nonempty list");
  for (const auto& e : sn) spec.variants.push_back(variant_from(rd, e, sigma1));
  cfg.sigma1_scheme = spec.variants.front().sigma1;
  cfg.sigma2_scheme = spec.variants.front().sigma2;

  try {
    spec.validate();
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    if (!spec.quantize_t && msg.find("t = ") != std::string::npos) msg += " (set quantize_t: true to round it)";
    throw rd.error(msg);
  }
  return spec;
}

ExperimentSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), path.parent_path());
}

std::string config_schema() {
  return "name: experiment name (default: file stem)\n"
         "objective: quadratic | rosenbrock | himmelblau | blr (required)\n"
         "diag, xstar: quadratic diagonal and minimizer (default: the mixed-scale 5-D instance)\n"
         "dataset: blr data, synthetic:<seed> | idx:<images>,<labels> (default synthetic:1)\n"
         "synthetic: {features, samples, mean0, mean1, stddev, grid_bits, intercept}\n"
         "digits: [a, b] for idx data (default [3, 8])\n"
         "reg: blr L2 weight (default 0)\n"
         "x0: start point (default zeros)\n"
         "t: stepsize, number or 'p/q' or '2^-k' (required)\n"
         "quantize_t: round t to nearest in the working arithmetic (default false)\n"
         "working_format, multiply_format: Q<qi>.<qf> (default Q8.8; multiply defaults to working)\n"
         "float_format: fp<total>e<exp> | binary32 | binary16 | bfloat16 (lowfloat only)\n"
         "number_system: fixed | lowfloat | reference (default fixed)\n"
         "schemes: list of rn | sr | sr_eps:<e> | signed_sr_eps:<e>, or {label, sigma1, sigma2} (required)\n"
         "sigma1_scheme: gradient scheme shared by all listed schemes (default: same as each)\n"
         "iterations: steps per run (default 100)\n"
         "seeds: runs per scheme (default 30, blr 10); seed_base: first seed (default 1)\n"
         "baseline: reference | binary32 | none (default reference)\n"
         "L, mu: bound constants (default: the objective's)\n"
         "bounds: attach bound envelopes (default true)\n"
         "loss_threshold: report first iteration with mean f <= threshold\n"
         "trace_runs: seeds with per-iteration trace CSVs (default 1)\n"
         "output_dir: result directory (default out/<name>)\n";
}

}  // namespace lpgd
