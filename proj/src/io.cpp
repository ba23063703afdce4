#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "lpgd/error.hpp"
#include "lpgd/harness.hpp"

namespace lpgd {

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off, const std::filesystem::path& p) {
  if (b.size() < off + 4) throw IoError(p.string() + ": truncated header");
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, int digit_a, int digit_b) {
  if (digit_a == digit_b) throw ConfigError("load_idx: the two digits must differ");
  for (int d : {digit_a, digit_b})
    if (d < 0 || d > 255) throw ConfigError("load_idx: digit labels must be in [0, 255]");
  const auto img = read_file(images);
  const auto lab = read_file(labels);
  if (be32(img, 0, images) != 0x00000803u) throw IoError(images.string() + ": bad image magic");
  if (be32(lab, 0, labels) != 0x00000801u) throw IoError(labels.string() + ": bad label magic");
  const std::size_t n = be32(img, 4, images);
  const std::size_t rows = be32(img, 8, images);
  const std::size_t cols = be32(img, 12, images);
  const std::size_t nl = be32(lab, 4, labels);
  const std::size_t px = rows * cols;
  if (img.size() != 16 + n * px)
    throw IoError(images.string() + ": length mismatch, header implies " + std::to_string(16 + n * px) +
                  " bytes, file has " + std::to_string(img.size()));
  if (lab.size() != 8 + nl)
    throw IoError(labels.string() + ": length mismatch, header implies " + std::to_string(8 + nl) +
                  " bytes, file has " + std::to_string(lab.size()));
  if (n != nl) throw IoError("load_idx: image count " + std::to_string(n) + " != label count " + std::to_string(nl));
  Dataset ds;
  ds.cols = px;
  ds.provenance = "idx:" + images.string() + "," + labels.string() + " digits " + std::to_string(digit_a) + "/" +
                  std::to_string(digit_b);
  bool seen_a = false, seen_b = false;
  for (std::size_t i = 0; i < n; ++i) {
    int l = lab[8 + i];
    if (l != digit_a && l != digit_b) continue;
    seen_a = seen_a || l == digit_a;
    seen_b = seen_b || l == digit_b;
    ds.labels.push_back(l == digit_b ? 1 : 0);
    for (std::size_t j = 0; j < px; ++j) ds.features.push_back(img[16 + i * px + j] / 255.0);
    ++ds.rows;
  }
  if (!seen_a || !seen_b) throw IoError("load_idx: digit " + std::to_string(seen_a ? digit_b : digit_a) + " absent");
  ds.validate();
  return ds;
}

namespace {

std::string num(double v) { return std::isnan(v) ? std::string() : format_double(v); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool in_q = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_q) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        in_q = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      in_q = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

double parse_field(const std::string& s) {
  if (s.empty()) return std::nan("");
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw IoError("csv: bad number '" + s + "'");
  return v;
}

const char* kSummaryHeader = "k,mean_f,std_f,mean_gap,std_gap,frac_case_I,frac_case_II,frac_case_III,envelope";

}  // namespace

void write_summary_csv(std::ostream& os, const Summary& s) {
  os << kSummaryHeader << '\n';
  for (std::size_t k = 0; k < s.mean_f.size(); ++k) {
    os << k << ',' << num(s.mean_f[k]) << ',' << num(s.std_f[k]) << ',';
    os << (k < s.mean_gap.size() ? num(s.mean_gap[k]) : "") << ',';
    os << (k < s.std_gap.size() ? num(s.std_gap[k]) : "") << ',';
    for (int c = 0; c < 3; ++c) os << (k < s.case_frac.size() ? num(s.case_frac[k][c]) : "") << ',';
    os << (k < s.envelope.size() ? num(s.envelope[k]) : "") << '\n';
  }
}

Summary read_summary_csv(std::istream& is, const std::string& label) {
  Summary s;
  s.label = label;
  std::string line;
  if (!std::getline(is, line) || line != kSummaryHeader) throw IoError("summary csv: unexpected header");
  std::size_t expect = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 9) throw IoError("summary csv: row " + std::to_string(expect) + " has " + std::to_string(f.size()) + " fields");
    if (parse_field(f[0]) != static_cast<double>(expect)) throw IoError("summary csv: rows out of order");
    s.mean_f.push_back(parse_field(f[1]));
    s.std_f.push_back(parse_field(f[2]));
    if (!f[3].empty()) s.mean_gap.push_back(parse_field(f[3]));
    if (!f[4].empty()) s.std_gap.push_back(parse_field(f[4]));
    if (!f[5].empty()) s.case_frac.push_back({parse_field(f[5]), parse_field(f[6]), parse_field(f[7])});
    if (!f[8].empty()) s.envelope.push_back(parse_field(f[8]));
    ++expect;
  }
  return s;
}

void write_trace_csv(std::ostream& os, const RunResult& r) {
  os << "k,f,case,gamma,theta,max_abs_sigma1_over_u,num_C2,nonopposite_violations\n";
  for (const auto& tr : r.traces) {
    os << tr.k << ',' << num(tr.f_value) << ',' << to_string(tr.case_label) << ',' << num(tr.gamma) << ','
       << num(tr.theta) << ',' << num(tr.max_abs_sigma1_over_u) << ',' << tr.C2.size() << ','
       << tr.nonopposite_violations() << '\n';
  }
}

void write_runs_csv(std::ostream& os, const VariantResult& v) {
  os << "seed,status,final_f,chi,stagnated,stagnation_step,case_I,case_II,case_III,max_abs_sigma1_over_u,error\n";
  std::size_t i = 0, j = 0;
  // Merge successes and failures back into seed order.
  while (i < v.runs.size() || j < v.failures.size()) {
    bool take_run = j >= v.failures.size() || (i < v.runs.size() && v.runs[i].seed < v.failures[j].seed);
    if (take_run) {
      const RunResult& r = v.runs[i++];
      os << r.seed << ",ok," << num(r.f_curve.back()) << ',' << num(r.chi) << ',' << (r.stagnated ? 1 : 0) << ','
         << r.stagnation_step << ',' << r.case_counts[0] << ',' << r.case_counts[1] << ',' << r.case_counts[2] << ','
         << num(r.max_abs_sigma1_over_u) << ",\n";
    } else {
      const RunFailure& f = v.failures[j++];
      os << f.seed << ",failed,,,,,,,,," << quote(f.message) << '\n';
    }
  }
}

void write_overview_csv(std::ostream& os, const ExperimentResult& e) {
  os << "label,sigma1,sigma2,number_system,t_requested,t,runs,failed,stagnation_rate,final_mean_f,"
        "iterations_to_threshold,note\n";
  for (const auto& v : e.variants) {
    const Summary& s = v.summary;
    os << quote(v.variant.label) << ',' << v.variant.sigma1.to_string() << ',' << v.variant.sigma2.to_string() << ','
       << to_string(v.cfg.number_system) << ',' << num(e.spec.t_requested) << ',' << num(e.t_effective) << ','
       << s.runs << ',' << s.failed << ',' << num(s.stagnation_rate) << ','
       << (s.mean_f.empty() ? "" : num(s.mean_f.back())) << ','
       << (s.iterations_to_threshold ? std::to_string(*s.iterations_to_threshold) : "") << ',' << quote(s.note)
       << '\n';
  }
}

std::string file_label(std::string_view label) {
  std::string out;
  for (char c : label) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '-' ||
              c == '_';
    out += ok ? c : '_';
  }
  return out.empty() ? "_" : out;
}

std::string svg_line_chart(const std::string& title, std::span<const ChartSeries> series, bool log_y) {
  constexpr double W = 720, H = 440, ml = 70, mr = 170, mt = 40, mb = 50;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
  std::size_t nmax = 1;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : series) {
    nmax = std::max(nmax, s.y.size());
    for (double y : s.y) {
      if (!std::isfinite(y) || (log_y && y <= 0)) continue;
      lo = std::min(lo, ty(y));
      hi = std::max(hi, ty(y));
    }
  }
  if (!(lo <= hi)) {
    lo = 0;
    hi = 1;
  }
  if (hi == lo) hi = lo + 1;
  const double xs = (W - ml - mr) / std::max<double>(1, static_cast<double>(nmax - 1));
  auto px = [&](std::size_t k) { return ml + static_cast<double>(k) * xs; };
  auto py = [&](double v) { return mt + (hi - v) / (hi - lo) * (H - mt - mb); };
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << ml << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double v = lo + (hi - lo) * i / 4.0;
    os << "<text x=\"" << ml - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">"
       << (log_y ? "1e" : "") << std::setprecision(log_y ? 2 : 4) << v << "</text>\n";
    os << "<text x=\"" << px(static_cast<std::size_t>((nmax - 1) * i / 4)) << "\" y=\"" << H - mb + 18
       << "\" text-anchor=\"middle\">" << (nmax - 1) * i / 4 << "</text>\n";
  }
  os << std::setprecision(6);
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">iteration</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* col = colors[si % 8];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < s.y.size(); ++k) {
      double y = s.y[k];
      if (!std::isfinite(y) || (log_y && y <= 0)) continue;
      os << px(k) << ',' << py(ty(y)) << ' ';
    }
    os << "\"/>\n";
    double ly = mt + 16.0 * static_cast<double>(si);
    os << "<line x1=\"" << W - mr + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - mr + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - mr + 36 << "\" y=\"" << ly + 4 << "\">" << s.name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << content;
  if (!out) throw IoError("write failed for " + p.string());
}

template <class F>
void write_with(const std::filesystem::path& p, F&& f) {
  std::ostringstream os;
  f(os);
  write_file(p, os.str());
}

}  // namespace

void write_outputs(const ExperimentResult& e, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_with(dir / "overview.csv", [&](std::ostream& os) { write_overview_csv(os, e); });
  std::vector<ChartSeries> series;
  const bool gap = !e.variants.empty() && !e.variants.front().summary.mean_gap.empty();
  for (const auto& v : e.variants) {
    const std::string fl = file_label(v.variant.label);
    write_with(dir / ("summary_" + fl + ".csv"), [&](std::ostream& os) { write_summary_csv(os, v.summary); });
    write_with(dir / ("runs_" + fl + ".csv"), [&](std::ostream& os) { write_runs_csv(os, v); });
    for (const auto& r : v.runs)
      if (!r.traces.empty())
        write_with(dir / ("trace_" + fl + "_seed" + std::to_string(r.seed) + ".csv"),
                   [&](std::ostream& os) { write_trace_csv(os, r); });
    series.push_back({v.variant.label, gap ? v.summary.mean_gap : v.summary.mean_f});
  }
  if (!e.baseline_f.empty()) {
    write_with(dir / "baseline.csv", [&](std::ostream& os) {
      os << "k,f\n";
      for (std::size_t k = 0; k < e.baseline_f.size(); ++k) os << k << ',' << num(e.baseline_f[k]) << '\n';
    });
    std::vector<double> y = e.baseline_f;
    if (gap) {
      double fs = *e.spec.base.objective->f_star();
      for (auto& v : y) v -= fs;
    }
    series.push_back({"baseline " + to_string(e.spec.baseline), y});
  }
  write_file(dir / "objective.svg",
             svg_line_chart(e.spec.name + (gap ? ": mean f - f*" : ": mean f"), series, true));
}

void write_sweep_csv(std::ostream& os, const std::string& param, std::span<const SweepPoint> points) {
  os << "param,value,t,label,runs,failed,final_mean_f,iterations_to_threshold,stagnation_rate\n";
  for (const auto& p : points)
    for (const auto& v : p.result.variants) {
      const Summary& s = v.summary;
      os << param << ',' << num(p.value) << ',' << num(p.result.t_effective) << ',' << quote(v.variant.label) << ','
         << s.runs << ',' << s.failed << ',' << (s.mean_f.empty() ? "" : num(s.mean_f.back())) << ','
         << (s.iterations_to_threshold ? std::to_string(*s.iterations_to_threshold) : "") << ','
         << num(s.stagnation_rate) << '\n';
    }
}

void write_sweep_outputs(const std::string& param, std::span<const SweepPoint> points,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& p : points) write_outputs(p.result, dir / (param + "=" + file_label(format_double(p.value))));
  write_with(dir / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, param, points); });
}

}  // namespace lpgd
