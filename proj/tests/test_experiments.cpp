#include "petrels/experiments.hpp"
#include "petrels/mc.hpp"
#include "petrels/selftest.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace petrels;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            ("petrels_" + std::string(info->test_suite_name()) + "_" + info->name());
    fs::remove_all(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> directory_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    out[e.path().filename().string()] = slurp(e.path());
  }
  return out;
}

ExperimentSpec small_lambda_sweep(const fs::path& dir) {
  ExperimentSpec spec = default_spec(ExperimentKind::lambda_sweep);
  spec.seeds = {1, 2, 3};
  spec.values = {0.9, 0.98};
  spec.scenario.ambient_dim = 60;
  spec.scenario.true_rank = 3;
  spec.scenario.observed_per_step = 20;
  spec.scenario.horizon = 200;
  spec.delta = 1.0;
  spec.trace_every = 50;
  spec.output_dir = dir;
  return spec;
}

}  // namespace

TEST(ExperimentKind, NamesRoundTrip) {
  for (const auto kind :
       {ExperimentKind::lambda_sweep, ExperimentKind::rank_sweep, ExperimentKind::budget_sweep,
        ExperimentKind::noise_sweep, ExperimentKind::track_change, ExperimentKind::doa_scene,
        ExperimentKind::mc_run, ExperimentKind::selftest}) {
    EXPECT_EQ(parse_experiment_kind(to_string(kind)), kind);
  }
  EXPECT_THROW(parse_experiment_kind("sweep"), std::invalid_argument);
}

TEST(DefaultSpec, ReferenceSettings) {
  const auto lambda = default_spec(ExperimentKind::lambda_sweep);
  EXPECT_EQ(lambda.scenario.ambient_dim, 500);
  EXPECT_EQ(lambda.scenario.observed_per_step, 50);
  EXPECT_NE(std::find(lambda.values.begin(), lambda.values.end(), 0.98), lambda.values.end());
  const auto track = default_spec(ExperimentKind::track_change);
  ASSERT_EQ(track.scenario.change_schedule.size(), 2u);
  EXPECT_EQ(track.scenario.change_schedule[0].at, 3000);
  EXPECT_EQ(track.scenario.change_schedule[1].at, 5000);
  for (const auto kind : {ExperimentKind::lambda_sweep, ExperimentKind::rank_sweep,
                          ExperimentKind::budget_sweep, ExperimentKind::noise_sweep,
                          ExperimentKind::track_change, ExperimentKind::doa_scene,
                          ExperimentKind::mc_run, ExperimentKind::selftest}) {
    EXPECT_NO_THROW(default_spec(kind).validate()) << to_string(kind);
  }
}

TEST(ApplyConfig, OverlaysKnownKeys) {
  ExperimentSpec spec = default_spec(ExperimentKind::track_change);
  apply_config(spec, R"({
    "kind": "track_change",
    "seeds": [4, 5],
    "trackers": ["petrels", "simplified"],
    "scenario": {"ambient_dim": 80, "true_rank": 4, "observed_per_step": 30, "horizon": 300,
                 "changes": [100, {"at": 200, "rotation_angle": 0.5}]},
    "tracker": {"rank": 5, "lambda": 0.97, "rebalance_period": 10, "execution": "serial",
                "grouse_step": {"kind": "constant", "scale": 0.01}}
  })");
  EXPECT_EQ(spec.seeds, (std::vector<std::uint64_t>{4, 5}));
  EXPECT_EQ(spec.trackers[1], TrackerKind::simplified);
  EXPECT_EQ(spec.scenario.ambient_dim, 80);
  ASSERT_EQ(spec.scenario.change_schedule.size(), 2u);
  EXPECT_FALSE(spec.scenario.change_schedule[0].rotation_angle.has_value());
  EXPECT_DOUBLE_EQ(*spec.scenario.change_schedule[1].rotation_angle, 0.5);
  EXPECT_EQ(spec.rank, 5);
  EXPECT_DOUBLE_EQ(spec.lambda, 0.97);
  EXPECT_EQ(spec.rebalance_period, 10);
  EXPECT_EQ(spec.execution, Execution::serial);
  EXPECT_EQ(spec.grouse_step.kind, GrouseStepRule::Kind::constant);
  EXPECT_DOUBLE_EQ(spec.grouse_step.scale, 0.01);
}

TEST(ApplyConfig, RejectsUnknownKeysAndBadJson) {
  ExperimentSpec spec = default_spec(ExperimentKind::lambda_sweep);
  EXPECT_THROW(apply_config(spec, R"({"seed": [1]})"), std::invalid_argument);
  EXPECT_THROW(apply_config(spec, R"({"scenario": {"dims": 3}})"), std::invalid_argument);
  EXPECT_THROW(apply_config(spec, R"({"tracker": {"execution": "gpu"}})"), std::invalid_argument);
  EXPECT_THROW(apply_config(spec, R"({"trackers": ["oja"]})"), std::invalid_argument);
  EXPECT_THROW(apply_config(spec, R"({"seeds": "one"})"), std::invalid_argument);
  EXPECT_THROW(apply_config(spec, "{not json"), std::invalid_argument);
}

TEST(SpecValidate, RejectsPastOnPartialObservation) {
  ExperimentSpec spec = default_spec(ExperimentKind::lambda_sweep);
  spec.trackers = {TrackerKind::past};
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec.scenario.observed_per_step = spec.scenario.ambient_dim;
  EXPECT_NO_THROW(spec.validate());

  ExperimentSpec doa = default_spec(ExperimentKind::doa_scene);
  doa.trackers = {TrackerKind::past};
  EXPECT_THROW(doa.validate(), std::invalid_argument);

  ExperimentSpec mc = default_spec(ExperimentKind::mc_run);
  mc.trackers = {TrackerKind::past};
  EXPECT_THROW(mc.validate(), std::invalid_argument);
}

TEST(SpecValidate, RejectsInconsistentSettings) {
  ExperimentSpec spec = default_spec(ExperimentKind::rank_sweep);
  spec.values.clear();
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = default_spec(ExperimentKind::rank_sweep);
  spec.values = {0};
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = default_spec(ExperimentKind::lambda_sweep);
  spec.strong_weak = StrongWeakSpec{5, 4, 0.01};
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = default_spec(ExperimentKind::lambda_sweep);
  spec.lambda = 0.0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = default_spec(ExperimentKind::lambda_sweep);
  spec.seeds.clear();
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = default_spec(ExperimentKind::mc_run);
  spec.mc.passes = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({3.0, 1.0, 2.0}, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(quantile({1.0, 2.0, 3.0, 4.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1.0, 2.0, 3.0, 4.0}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile({7.0}, 0.9), 7.0);
}

TEST(SweepLabel, NamesSweptValue) {
  EXPECT_EQ(sweep_label(ExperimentKind::lambda_sweep, 0.98), "lambda=0.98");
  EXPECT_EQ(sweep_label(ExperimentKind::rank_sweep, 12), "rank=12");
  EXPECT_EQ(sweep_label(ExperimentKind::budget_sweep, 50), "K=50");
}

TEST(WriteFileAtomic, ReplacesContentsWithoutLeftovers) {
  TempDir dir;
  fs::create_directories(dir.path());
  const fs::path p = dir.path() / "a.csv";
  write_file_atomic(p, "first\n");
  write_file_atomic(p, "second\n");
  EXPECT_EQ(slurp(p), "second\n");
  EXPECT_EQ(directory_contents(dir.path()).size(), 1u);
  EXPECT_THROW(write_file_atomic(dir.path() / "missing" / "b.csv", "x"), std::runtime_error);
}

TEST(Summarize, AggregatesTracesFromDisk) {
  TempDir dir;
  fs::create_directories(dir.path());
  std::vector<TraceFile> files;
  const std::vector<std::pair<std::string, std::vector<double>>> data = {
      {"a", {1.0, 2.0, 3.0}}, {"b", {0.5, 0.5, 4.0}}};
  for (const auto& [label, finals] : data) {
    for (std::size_t s = 0; s < finals.size(); ++s) {
      MetricTrace trace("subspace_error");
      trace.push(10, 9.0);
      trace.push(20, finals[s]);
      std::ostringstream os;
      trace.write_csv(os);
      const fs::path p = dir.path() / (label + std::to_string(s) + ".csv");
      write_file_atomic(p, os.str());
      files.push_back({"subspace_error", "petrels", label, s + 1, p});
    }
  }
  const auto rows = summarize(files);
  const SummaryRow* a20 = nullptr;
  const SummaryRow* b20 = nullptr;
  for (const auto& r : rows) {
    if (r.t == 20 && r.label == "a") a20 = &r;
    if (r.t == 20 && r.label == "b") b20 = &r;
  }
  ASSERT_NE(a20, nullptr);
  ASSERT_NE(b20, nullptr);
  EXPECT_DOUBLE_EQ(a20->median, 2.0);
  EXPECT_DOUBLE_EQ(a20->q25, 1.5);
  EXPECT_DOUBLE_EQ(a20->max, 3.0);
  EXPECT_EQ(a20->n_seeds, 3u);
  EXPECT_DOUBLE_EQ(b20->median, 0.5);
  EXPECT_TRUE(b20->is_argmin);
  EXPECT_FALSE(a20->is_argmin);
}

TEST(RunExperiment, WritesTracesAndSummary) {
  TempDir dir;
  const ExperimentResult res = run_experiment(small_lambda_sweep(dir.path()));
  EXPECT_EQ(res.traces.size(), 2u * 3u * 2u);  // values x seeds x metrics
  for (const auto& t : res.traces) EXPECT_TRUE(fs::exists(t.path)) << t.path;
  EXPECT_TRUE(fs::exists(dir.path() / "subspace_error__petrels__lambda=0.98__seed2.csv"));
  EXPECT_EQ(res.summary_path, dir.path() / "summary.csv");
  std::ostringstream os;
  write_summary(os, summarize(res.traces));
  EXPECT_EQ(slurp(res.summary_path), os.str());
  std::ifstream in(dir.path() / "subspace_error__petrels__lambda=0.9__seed1.csv");
  const MetricTrace trace = MetricTrace::read_csv(in);
  EXPECT_EQ(trace.points().front().first, 50);
  EXPECT_EQ(trace.points().back().first, 200);
  for (const auto& e : fs::directory_iterator(dir.path())) {
    EXPECT_NE(e.path().extension(), ".tmp");
  }
}

TEST(RunExperiment, RerunsAreByteIdenticalAcrossExecutionPolicies) {
  TempDir a, b;
  ExperimentSpec spec = small_lambda_sweep(a.path());
  spec.rebalance_period = 25;
  run_experiment(spec);
  spec.output_dir = b.path();
  spec.execution = Execution::serial;
  run_experiment(spec);
  EXPECT_EQ(directory_contents(a.path()), directory_contents(b.path()));
}

TEST(RunExperiment, RejectsInvalidSpecAndUnwritableOutput) {
  TempDir dir;
  ExperimentSpec spec = small_lambda_sweep(dir.path());
  spec.trackers = {TrackerKind::past};
  EXPECT_THROW(run_experiment(spec), std::invalid_argument);
  fs::create_directories(dir.path());
  std::ofstream(dir.path() / "file") << "x";
  spec = small_lambda_sweep(dir.path() / "file" / "sub");
  EXPECT_THROW(run_experiment(spec), std::runtime_error);
}

TEST(RunExperiment, McRunWritesReconstruction) {
  TempDir dir;
  ExperimentSpec spec = default_spec(ExperimentKind::mc_run);
  spec.seeds = {3};
  spec.mc.rows = 40;
  spec.mc.cols = 60;
  spec.mc.rank = 2;
  spec.mc.sampling_rate = 0.5;
  spec.mc.passes = 5;
  spec.output_dir = dir.path();
  spec.mc.output_matrix = (dir.path() / "xhat.bin").string();
  const ExperimentResult res = run_experiment(spec);
  ASSERT_FALSE(res.traces.empty());
  std::ifstream is(spec.mc.output_matrix, std::ios::binary);
  const Mat<Real> xhat = read_dense_binary(is);
  EXPECT_EQ(xhat.rows(), 40);
  EXPECT_EQ(xhat.cols(), 60);
}

TEST(RunStream, TracesAtPeriodAndHorizon) {
  ExperimentSpec spec = small_lambda_sweep("unused");
  spec.scenario.horizon = 120;
  const auto opts = tracker_options(spec, TrackerKind::grouse, 3, 0.98);
  const StreamTraces traces = run_stream<Real>(spec.scenario, opts, 1, 50);
  std::vector<std::int64_t> ts;
  for (const auto& [t, v] : traces.subspace_error.points()) ts.push_back(t);
  EXPECT_EQ(ts, (std::vector<std::int64_t>{50, 100, 120}));
  EXPECT_EQ(traces.residual_error.size(), 3u);
}

TEST(RunDoa, TracksTwoWellSeparatedModes) {
  DoaScenario sc;
  sc.sensors = 64;
  sc.observed_per_step = 24;
  sc.noise_std = 0.01;
  sc.initial = {{0.2, 0.6}, {1.0, 1.0}};
  sc.mode_schedule = {{400, {{0.3, 0.6}, {1.0, 1.0}}}};
  sc.horizon = 800;
  ExperimentSpec spec = default_spec(ExperimentKind::doa_scene);
  spec.delta = 1.0;
  DoaSettings settings;
  settings.rank = 2;
  settings.report_every = 100;
  const DoaRunResult res =
      run_doa(sc, tracker_options(spec, TrackerKind::petrels, 2, 0.98), 1, settings);
  EXPECT_EQ(res.snapshots.size(), 8u);
  EXPECT_LT(res.mode_error.at(400), 1e-3);
  EXPECT_LT(res.mode_error.at(800), 1e-3);
  EXPECT_EQ(res.kept_modes.at(800), 2.0);
}

TEST(Selftest, PassesOnSeveralSeedsWithSamePassSet) {
  std::vector<std::vector<std::string>> passed;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto results = run_selftest({seed, false});
    std::vector<std::string> names;
    for (const auto& r : results) {
      EXPECT_TRUE(r.passed) << r.name << " seed " << seed << ": " << r.value << " > " << r.tolerance;
      if (r.passed) names.push_back(r.name);
    }
    passed.push_back(names);
  }
  EXPECT_EQ(passed[0], passed[1]);
  EXPECT_EQ(passed[1], passed[2]);
}

TEST(Selftest, InjectedAsymmetryIsCaught) {
  const auto results = run_selftest({1, true});
  std::size_t failures = 0;
  for (const auto& r : results) {
    if (!r.passed) {
      ++failures;
      EXPECT_EQ(r.name, "rinv_hermitian_psd");
    }
  }
  EXPECT_GE(failures, 1u);
  std::ostringstream os;
  write_selftest_report(os, results);
  EXPECT_EQ(os.str().rfind("check,status,value,tolerance,detail\n", 0), 0u);
  EXPECT_NE(os.str().find("rinv_hermitian_psd,fail,"), std::string::npos);
}

TEST(Selftest, ExperimentReportsOverallStatus) {
  TempDir dir;
  ExperimentSpec spec = default_spec(ExperimentKind::selftest);
  spec.seeds = {1};
  spec.output_dir = dir.path();
  EXPECT_TRUE(run_experiment(spec).all_passed);
  spec.inject_fault = true;
  EXPECT_FALSE(run_experiment(spec).all_passed);
}
