#pragma once

// Experiment orchestration: synthetic-stream sweeps, subspace-change tracking,
// the direction-of-arrival scene and online matrix completion. Every run is a
// pure function of (spec, tracker, seed); traces are written one CSV per
// (metric, tracker, label, seed) and summarized from the files on disk.

#include "petrels/esprit.hpp"
#include "petrels/mc.hpp"
#include "petrels/metrics.hpp"
#include "petrels/stream_model.hpp"
#include "petrels/tracker.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace petrels {

enum class ExperimentKind {
  lambda_sweep,
  rank_sweep,
  budget_sweep,
  noise_sweep,
  track_change,
  doa_scene,
  mc_run,
  selftest
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& text);

/// Generating subspace U diag(s) with `strong` N(0,1) scales and `weak`
/// level * N(0,1) scales, drawn per run seed.
struct StrongWeakSpec {
  Index strong = 5;
  Index weak = 5;
  double level = 0.01;
};

struct DoaSettings {
  Index rank = 10;
  double threshold = 0.5;
  Index window = 200;              // samples used for amplitude estimates
  std::int64_t report_every = 50;  // ESPRIT snapshot period
  bool complex_coefficients = false;
};

struct McSettings {
  Index rows = 200;
  Index cols = 400;
  Index rank = 5;
  EntryDistribution distribution = EntryDistribution::gaussian;
  double sampling_rate = 0.1;
  Index passes = 10;
  ColumnOrder column_order = ColumnOrder::uniform_random;
  std::string input;               // triplet file; synthetic dataset when empty
  std::string output_matrix;       // optional reconstruction output (.bin or triplets)
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::lambda_sweep;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir{"results"};
  std::vector<TrackerKind> trackers{TrackerKind::petrels};

  StreamScenario scenario;
  std::optional<StrongWeakSpec> strong_weak;

  Index rank = 0;  // estimation rank; 0 means the scenario's true rank
  double lambda = 0.98;
  double delta = 1e3;
  double mu = 1e-3;
  Index refresh_period = 0;
  Index rebalance_period = 100;  // PETRELS basis re-orthonormalization period
  GrouseStepRule grouse_step;
  Execution execution = Execution::parallel;

  std::vector<double> values;  // swept parameter values
  std::int64_t trace_every = 10;

  DoaSettings doa;
  McSettings mc;

  // selftest only
  bool inject_fault = false;

  void validate() const;
  Index estimation_rank() const { return rank > 0 ? rank : scenario.true_rank; }
};

/// Defaults reproducing the corresponding experiment at desk scale.
ExperimentSpec default_spec(ExperimentKind kind);

/// Overlays a JSON config document onto `spec`. Unknown keys are rejected.
void apply_config(ExperimentSpec& spec, const std::string& json_text);

// ---------------------------------------------------------------------------
// Single runs, reusable outside the orchestrator.

/// Tracker options implied by the spec for one run.
TrackerOptions tracker_options(const ExperimentSpec& spec, TrackerKind kind, Index rank,
                               double lambda);

struct StreamTraces {
  MetricTrace subspace_error{"subspace_error"};
  // Mean one-step normalized residual over each trace interval.
  MetricTrace residual_error{"residual_error"};
};

/// Feeds samples 1..horizon of the scenario to a fresh tracker, recording
/// metrics every `trace_every` steps (and at the horizon).
template <typename S>
StreamTraces run_stream(const StreamScenario& scenario, const TrackerOptions& tracker,
                        std::uint64_t tracker_seed, std::int64_t trace_every);

struct ModeSnapshot {
  std::int64_t t = 0;
  ModeEstimate estimate;  // all r modes, before thresholding
  double condition = 1.0;
};

struct DoaRunResult {
  std::vector<ModeSnapshot> snapshots;
  MetricTrace kept_modes{"kept_modes"};
  // Largest distance from a true above-threshold mode to the nearest kept
  // estimate (1 when a mode is missed).
  MetricTrace mode_error{"mode_error"};
};

DoaRunResult run_doa(const DoaScenario& scenario, const TrackerOptions& tracker,
                     std::uint64_t tracker_seed, const DoaSettings& settings);

// ---------------------------------------------------------------------------
// Orchestration

struct SummaryRow {
  std::string label;
  std::string tracker;
  std::string metric;
  std::int64_t t = 0;
  double median = 0, q25 = 0, q75 = 0, min = 0, max = 0;
  std::size_t n_seeds = 0;
  bool is_argmin = false;  // lowest median among labels at this (tracker, metric, t)
};

struct TraceFile {
  std::string metric;
  std::string tracker;
  std::string label;
  std::uint64_t seed = 0;
  std::filesystem::path path;
};

struct ExperimentResult {
  std::vector<TraceFile> traces;
  std::vector<std::filesystem::path> other_files;
  std::vector<SummaryRow> summary;
  std::filesystem::path summary_path;
  bool all_passed = true;  // selftest only
};

/// Runs every (value, tracker, seed) combination, writes traces and
/// summary.csv under spec.output_dir. Throws std::invalid_argument for invalid
/// specs and std::runtime_error for I/O failures.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Reads the listed traces back and aggregates them over seeds.
std::vector<SummaryRow> summarize(const std::vector<TraceFile>& traces);
void write_summary(std::ostream& os, const std::vector<SummaryRow>& rows);

/// Writes `contents` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Label used in file names for one swept value, e.g. "lambda=0.98".
std::string sweep_label(ExperimentKind kind, double value);

/// Linear-interpolation quantile of unsorted data, q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace petrels
