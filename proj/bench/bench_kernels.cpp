// Serial reference vs OpenMP row kernels, alone and inside a full step.
#include "petrels/petrels.hpp"
#include "petrels/rng.hpp"
#include "petrels/row_kernels.hpp"
#include "petrels/stream_model.hpp"

#include <benchmark/benchmark.h>

using namespace petrels;

namespace {

struct RowProblem {
  Mat<Real> subspace;
  std::vector<Mat<Real>> rinv;
  Vec<Real> coeff;
  Vec<Real> values;
  MaskVec mask;
};

RowProblem make_problem(Index m, Index r) {
  Rng rng(7);
  RowProblem p;
  p.subspace = Mat<Real>(m, r);
  for (Index i = 0; i < p.subspace.size(); ++i) p.subspace.data()[i] = rng.normal();
  p.rinv.assign(static_cast<std::size_t>(m), Mat<Real>::Identity(r, r));
  p.coeff = Vec<Real>(r);
  for (Index i = 0; i < r; ++i) p.coeff(i) = rng.normal() * 0.1;
  p.values = Vec<Real>(m);
  p.mask = MaskVec(m);
  for (Index i = 0; i < m; ++i) {
    p.values(i) = rng.normal();
    p.mask(i) = rng.uniform01() < 0.1;
  }
  return p;
}

template <bool Parallel>
void BM_UpdateRows(benchmark::State& state) {
  const Index m = state.range(0);
  const Index r = state.range(1);
  RowProblem p = make_problem(m, r);
  for (auto _ : state) {
    // lambda = 1 keeps Rinv bounded over many iterations.
    if constexpr (Parallel) {
      kernels::update_rows<Real>(p.subspace, p.rinv, nullptr, p.coeff, p.values, p.mask, 1.0);
    } else {
      kernels::update_rows_reference<Real>(p.subspace, p.rinv, nullptr, p.coeff, p.values, p.mask,
                                           1.0);
    }
    benchmark::DoNotOptimize(p.subspace.data());
  }
  state.SetItemsProcessed(state.iterations() * m);
}

template <Execution Exec>
void BM_PetrelsStep(benchmark::State& state) {
  StreamScenario sc;
  sc.ambient_dim = state.range(0);
  sc.true_rank = state.range(1);
  sc.observed_per_step = sc.ambient_dim / 10;
  sc.horizon = 4096;
  const auto samples = gen_lowrank_stream<Real>(sc);
  TrackerConfig config;
  config.ambient_dim = sc.ambient_dim;
  config.rank = sc.true_rank;
  config.execution = Exec;
  auto tracker = init_state<Real>(config, std::nullopt, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    if (i == samples.size()) {
      state.PauseTiming();
      tracker = init_state<Real>(config, std::nullopt, 1);
      i = 0;
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(petrels_step(tracker, config, samples[i++]));
  }
}

}  // namespace

BENCHMARK(BM_UpdateRows<false>)->Name("update_rows/serial")->Args({500, 10})->Args({2000, 20});
BENCHMARK(BM_UpdateRows<true>)->Name("update_rows/parallel")->Args({500, 10})->Args({2000, 20});
BENCHMARK(BM_PetrelsStep<Execution::serial>)->Name("petrels_step/serial")->Args({500, 10});
BENCHMARK(BM_PetrelsStep<Execution::parallel>)->Name("petrels_step/parallel")->Args({500, 10});

BENCHMARK_MAIN();
