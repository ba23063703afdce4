#pragma once

// Experiment runner: YAML configs, dataset ingestion, seed fan-out,
// ensemble statistics and CSV / SVG emission.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpgd/bounds.hpp"
#include "lpgd/gdengine.hpp"
#include "lpgd/objectives.hpp"

namespace lpgd {

// One compared rounding configuration.
struct Variant {
  std::string label;
  RoundingScheme sigma1 = RoundingScheme::sr();
  RoundingScheme sigma2 = RoundingScheme::sr();
};

enum class BaselineKind { none, reference, binary32 };
std::string to_string(BaselineKind b);

struct ExperimentSpec {
  std::string name;
  std::string objective_name;
  std::string dataset_source;  // "synthetic:<seed>" or "idx:<images>,<labels>" for blr
  GDConfig base;               // schemes are overwritten per variant
  std::vector<Variant> variants;
  int seeds = 30;
  std::uint64_t seed_base = 1;
  BaselineKind baseline = BaselineKind::reference;
  double t_requested = 0.0;  // value written in the config
  bool quantize_t = false;
  std::optional<double> L;   // bound constants; default to the objective's
  std::optional<double> mu;
  bool bounds = true;
  std::optional<double> loss_threshold;
  int trace_runs = 1;  // seeds whose per-iteration trace is written
  std::filesystem::path output_dir;

  // Throws ConfigError on any violated invariant.
  void validate() const;
};

// "0.25", "-3e-2", "1/1024", "2^-10".
double parse_number(std::string_view text);

// RN into the working arithmetic of number_system.
double quantize_stepsize(double t, const GDConfig& cfg);

// Diagnostics carry "<origin>:<line>:". Unknown keys are rejected.
ExperimentSpec parse_config(std::string_view yaml_text, const std::string& origin = "<config>",
                            const std::filesystem::path& base_dir = ".");
ExperimentSpec load_config(const std::filesystem::path& path);

// Documented key list, one "key: meaning" per line.
std::string config_schema();

// Two-digit filter of an IDX image/label pair; pixels scaled by 1/255,
// digit_a -> 0, digit_b -> 1.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, int digit_a, int digit_b);

constexpr int kDefaultSeeds = 30;
constexpr int kDefaultBlrSeeds = 10;

struct Summary {
  std::string label;
  std::vector<double> mean_f;  // iterations + 1 rows
  std::vector<double> std_f;   // sample std, 0 for one run
  std::vector<double> mean_gap;  // empty when f* unknown
  std::vector<double> std_gap;
  std::vector<std::array<double, 3>> case_frac;  // one per step
  std::size_t runs = 0;
  std::size_t failed = 0;
  double stagnation_rate = 0.0;
  std::optional<int> iterations_to_threshold;  // first k with mean_f <= threshold
  std::vector<double> envelope;  // bound envelope on E[f - f*], may be empty
  std::string note;
};

// Ensemble of successful runs; throws PreconditionError when empty.
Summary summarize(std::span<const RunResult> runs, std::optional<double> f_star, std::optional<double> threshold);

struct RunFailure {
  std::uint64_t seed = 0;
  std::string message;
};

struct VariantResult {
  Variant variant;
  GDConfig cfg;
  std::vector<RunResult> runs;  // successful runs in seed order
  std::vector<RunFailure> failures;
  Summary summary;
};

struct ExperimentResult {
  ExperimentSpec spec;
  double t_effective = 0.0;
  std::vector<VariantResult> variants;
  std::vector<double> baseline_f;  // empty when no baseline
};

// Deterministic for any parallelism: every run owns a value-addressed stream
// and results are reduced in (variant, seed) order.
ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned parallelism = 1);

// CSV writers; doubles use the shortest round-trip form, absent values are
// empty fields.
void write_summary_csv(std::ostream& os, const Summary& s);
Summary read_summary_csv(std::istream& is, const std::string& label = "");
void write_trace_csv(std::ostream& os, const RunResult& r);
void write_runs_csv(std::ostream& os, const VariantResult& v);
void write_overview_csv(std::ostream& os, const ExperimentResult& e);

struct ChartSeries {
  std::string name;
  std::vector<double> y;
};
// Static polyline chart; log_y drops nonpositive points.
std::string svg_line_chart(const std::string& title, std::span<const ChartSeries> series, bool log_y);

// File-system safe label.
std::string file_label(std::string_view label);

// Writes overview.csv, summary_<label>.csv, runs_<label>.csv,
// trace_<label>_seed<s>.csv, baseline.csv and objective.svg.
void write_outputs(const ExperimentResult& e, const std::filesystem::path& dir);

struct SweepPoint {
  double value = 0.0;
  ExperimentResult result;
};

// Overrides one scalar key ("t", "iterations", "seeds") per point.
std::vector<SweepPoint> run_sweep(const ExperimentSpec& spec, const std::string& param,
                                  std::span<const double> values, unsigned parallelism = 1);
void write_sweep_csv(std::ostream& os, const std::string& param, std::span<const SweepPoint> points);
void write_sweep_outputs(const std::string& param, std::span<const SweepPoint> points,
                         const std::filesystem::path& dir);

}  // namespace lpgd
