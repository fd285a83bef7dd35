// petrels: experiment runner.
//
//   petrels sweep-lambda --seeds 1-5 --out results/lambda
//   petrels track --tracker petrels,grouse --config track.json
//   petrels selftest

#include "petrels/experiments.hpp"
#include "petrels/selftest.hpp"

#include <CLI11.hpp>

#include <omp.h>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

namespace {

using namespace petrels;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(std::stoull(part));
    } else {
      const auto lo = std::stoull(part.substr(0, dash));
      const auto hi = std::stoull(part.substr(dash + 1));
      if (hi < lo) throw std::invalid_argument("seed range '" + part + "' is empty");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    }
  }
  if (seeds.empty()) throw std::invalid_argument("no seeds in '" + text + "'");
  return seeds;
}

std::vector<TrackerKind> parse_trackers(const std::vector<std::string>& items) {
  std::vector<TrackerKind> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty()) out.push_back(parse_tracker_kind(name));
    }
  }
  return out;
}

struct Flags {
  std::string config;
  std::string seeds;
  std::string out;
  std::vector<std::string> trackers;
  std::vector<double> values;
  std::optional<double> lambda, delta, noise, mu, grouse_constant;
  std::optional<Index> rank, ambient_dim, true_rank, observed, refresh, rebalance;
  std::optional<std::int64_t> horizon, trace_every;
  bool serial = false;
  int threads = 0;
  // doa
  std::optional<Index> report_every;
  bool complex_coefficients = false;
  // mc
  std::string input, output_matrix, order, distribution;
  std::optional<Index> passes, rows, cols;
  std::optional<double> rate;
  // selftest
  bool inject_fault = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seeds", f.seeds, "seed list, e.g. 1,2,3 or 1-5");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--threads", f.threads, "OpenMP threads (0 = runtime default)");
}

void add_tracking(CLI::App* cmd, Flags& f) {
  cmd->add_option("--tracker", f.trackers, "petrels|simplified|regularized|grouse|past (repeatable or comma list)");
  cmd->add_option("--lambda", f.lambda, "discount factor");
  cmd->add_option("--delta", f.delta, "initial Rinv scale");
  cmd->add_option("--rank", f.rank, "estimation rank");
  cmd->add_option("--mu", f.mu, "regularization weight (regularized tracker)");
  cmd->add_option("--refresh", f.refresh, "re-invert Rinv every N steps (0 = off)");
  cmd->add_option("--rebalance", f.rebalance, "re-orthonormalize the PETRELS basis every N steps (0 = off)");
  cmd->add_option("--grouse-step", f.grouse_constant, "constant GROUSE step size");
  cmd->add_flag("--serial", f.serial, "use the serial row kernels");
  cmd->add_option("--trace-every", f.trace_every, "metric sampling period");
}

void add_scenario(CLI::App* cmd, Flags& f) {
  cmd->add_option("--ambient-dim", f.ambient_dim, "signal dimension M");
  cmd->add_option("--true-rank", f.true_rank, "generating rank");
  cmd->add_option("--observed", f.observed, "observed entries per step K");
  cmd->add_option("--noise", f.noise, "noise standard deviation");
  cmd->add_option("--horizon", f.horizon, "number of samples");
}

void apply_flags(ExperimentSpec& spec, const Flags& f) {
  if (!f.seeds.empty()) spec.seeds = parse_seeds(f.seeds);
  if (!f.out.empty()) spec.output_dir = f.out;
  if (!f.trackers.empty()) spec.trackers = parse_trackers(f.trackers);
  if (!f.values.empty()) spec.values = f.values;
  if (f.lambda) spec.lambda = *f.lambda;
  if (f.delta) spec.delta = *f.delta;
  if (f.mu) spec.mu = *f.mu;
  if (f.rank) {
    spec.rank = *f.rank;
    spec.doa.rank = *f.rank;
  }
  if (f.refresh) spec.refresh_period = *f.refresh;
  if (f.rebalance) spec.rebalance_period = *f.rebalance;
  if (f.grouse_constant) spec.grouse_step = {GrouseStepRule::Kind::constant, *f.grouse_constant};
  if (f.serial) spec.execution = Execution::serial;
  if (f.trace_every) spec.trace_every = *f.trace_every;
  if (f.ambient_dim) spec.scenario.ambient_dim = *f.ambient_dim;
  if (f.true_rank) spec.scenario.true_rank = *f.true_rank;
  if (f.observed) spec.scenario.observed_per_step = *f.observed;
  if (f.noise) spec.scenario.noise_std = *f.noise;
  if (f.horizon) spec.scenario.horizon = *f.horizon;
  if (f.report_every) spec.doa.report_every = *f.report_every;
  if (f.complex_coefficients) spec.doa.complex_coefficients = true;
  if (!f.input.empty()) spec.mc.input = f.input;
  if (!f.output_matrix.empty()) spec.mc.output_matrix = f.output_matrix;
  if (!f.order.empty()) spec.mc.column_order = parse_column_order(f.order);
  if (!f.distribution.empty()) {
    spec.mc.distribution = f.distribution == "gaussian" ? EntryDistribution::gaussian
                                                        : EntryDistribution::uniform01;
    if (f.distribution != "gaussian" && f.distribution != "uniform01") {
      throw std::invalid_argument("--distribution must be gaussian or uniform01");
    }
  }
  if (f.passes) spec.mc.passes = *f.passes;
  if (f.rows) spec.mc.rows = *f.rows;
  if (f.cols) spec.mc.cols = *f.cols;
  if (f.rate) spec.mc.sampling_rate = *f.rate;
  spec.inject_fault = f.inject_fault;
}

void print_final_rows(const ExperimentResult& result) {
  std::map<std::tuple<std::string, std::string, std::string>, const SummaryRow*> last;
  std::vector<std::tuple<std::string, std::string, std::string>> order;
  for (const auto& row : result.summary) {
    const auto key = std::make_tuple(row.metric, row.tracker, row.label);
    if (!last.count(key)) order.push_back(key);
    last[key] = &row;
  }
  std::cout << "metric,tracker,label,t,median,q25,q75\n";
  for (const auto& key : order) {
    const SummaryRow& r = *last.at(key);
    std::cout << r.metric << ',' << r.tracker << ',' << r.label << ',' << r.t << ','
              << format_double(r.median) << ',' << format_double(r.q25) << ','
              << format_double(r.q75) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming subspace tracking experiments"};
  app.require_subcommand(1);

  Flags f;
  const std::vector<std::pair<std::string, ExperimentKind>> commands = {
      {"sweep-lambda", ExperimentKind::lambda_sweep}, {"sweep-rank", ExperimentKind::rank_sweep},
      {"sweep-budget", ExperimentKind::budget_sweep}, {"sweep-noise", ExperimentKind::noise_sweep},
      {"track", ExperimentKind::track_change},        {"doa", ExperimentKind::doa_scene},
      {"mc", ExperimentKind::mc_run},                 {"selftest", ExperimentKind::selftest},
  };
  const std::map<ExperimentKind, std::string> help = {
      {ExperimentKind::lambda_sweep, "final subspace error across discount factors"},
      {ExperimentKind::rank_sweep, "convergence under rank overestimation"},
      {ExperimentKind::budget_sweep, "convergence across observed entries per step"},
      {ExperimentKind::noise_sweep, "error floor across noise levels"},
      {ExperimentKind::track_change, "tracking abrupt subspace changes"},
      {ExperimentKind::doa_scene, "four-stage direction-of-arrival scene with ESPRIT"},
      {ExperimentKind::mc_run, "online matrix completion"},
      {ExperimentKind::selftest, "oracle and invariant checks"},
  };

  std::map<CLI::App*, ExperimentKind> kinds;
  for (const auto& [name, kind] : commands) {
    CLI::App* cmd = app.add_subcommand(name, help.at(kind));
    kinds[cmd] = kind;
    add_common(cmd, f);
    if (kind == ExperimentKind::selftest) {
      cmd->add_flag("--inject-fault", f.inject_fault, "corrupt Rinv symmetry before its check");
      continue;
    }
    add_tracking(cmd, f);
    if (kind != ExperimentKind::doa_scene && kind != ExperimentKind::mc_run) add_scenario(cmd, f);
    if (kind != ExperimentKind::track_change && kind != ExperimentKind::doa_scene &&
        kind != ExperimentKind::mc_run) {
      cmd->add_option("--values", f.values, "swept values (comma list)")->delimiter(',');
    }
    if (kind == ExperimentKind::doa_scene) {
      cmd->add_option("--report-every", f.report_every, "ESPRIT snapshot period");
      cmd->add_flag("--complex-coefficients", f.complex_coefficients,
                    "draw complex mode coefficients");
    }
    if (kind == ExperimentKind::mc_run) {
      cmd->add_option("--input", f.input, "triplet file (rows cols nnz header)")->check(CLI::ExistingFile);
      cmd->add_option("--output-matrix", f.output_matrix, "write the reconstruction (.bin or triplets)");
      cmd->add_option("--passes", f.passes, "passes over the columns");
      cmd->add_option("--order", f.order, "uniform_random|cyclic");
      cmd->add_option("--distribution", f.distribution, "gaussian|uniform01 (synthetic data)");
      cmd->add_option("--rows", f.rows, "synthetic rows");
      cmd->add_option("--cols", f.cols, "synthetic columns");
      cmd->add_option("--rate", f.rate, "synthetic sampling rate");
    }
  }

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* cmd = app.get_subcommands().front();
    const ExperimentKind kind = kinds.at(cmd);
    ExperimentSpec spec = default_spec(kind);
    spec.output_dir = std::filesystem::path("results") / cmd->get_name();
    if (!f.config.empty()) {
      std::ifstream is(f.config);
      std::stringstream buf;
      buf << is.rdbuf();
      apply_config(spec, buf.str());
      if (spec.kind != kind) {
        throw std::invalid_argument("config kind '" + to_string(spec.kind) +
                                    "' does not match subcommand '" + cmd->get_name() + "'");
      }
    }
    apply_flags(spec, f);
    if (f.threads > 0) omp_set_num_threads(f.threads);

    const ExperimentResult result = run_experiment(spec);
    if (kind == ExperimentKind::selftest) {
      for (const auto& path : result.other_files) {
        std::ifstream is(path);
        std::cout << "== " << path.string() << '\n' << is.rdbuf();
      }
      std::cout << (result.all_passed ? "selftest: all checks passed\n" : "selftest: FAILED\n");
      return result.all_passed ? 0 : 1;
    }
    print_final_rows(result);
    std::cerr << "wrote " << result.traces.size() + result.other_files.size() << " files and "
              << result.summary_path.string() << '\n';
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
