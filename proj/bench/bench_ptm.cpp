// OpenMP kernels against their serial reference implementations.

#include <benchmark/benchmark.h>

#include "ptm/corpus.hpp"
#include "ptm/partitioner.hpp"
#include "ptm/sampler.hpp"
#include "ptm/workload.hpp"

namespace {

using namespace ptm;

const Corpus& corpus() {
  static const Corpus c = generate_synthetic(2000, 5000, 100, 1.1, 1);
  return c;
}

const WorkloadMatrix& matrix() {
  static const WorkloadMatrix r = build_workload(corpus());
  return r;
}

void BM_BalanceReportSerial(benchmark::State& state) {
  const auto p = partition(matrix(), Algorithm::a1, {static_cast<std::uint32_t>(state.range(0)), 1, 0}).partitioning;
  for (auto _ : state) benchmark::DoNotOptimize(balance_report_serial(matrix(), p));
}

void BM_BalanceReport(benchmark::State& state) {
  const auto p = partition(matrix(), Algorithm::a1, {static_cast<std::uint32_t>(state.range(0)), 1, 0}).partitioning;
  for (auto _ : state) benchmark::DoNotOptimize(balance_report(matrix(), p));
}

void BM_PartitionSerial(benchmark::State& state) {
  const auto alg = static_cast<Algorithm>(state.range(1));
  for (auto _ : state)
    benchmark::DoNotOptimize(partition_serial(matrix(), alg, {static_cast<std::uint32_t>(state.range(0)), 100, 1}));
  state.SetLabel(std::string(to_string(alg)));
}

void BM_Partition(benchmark::State& state) {
  const auto alg = static_cast<Algorithm>(state.range(1));
  for (auto _ : state)
    benchmark::DoNotOptimize(partition(matrix(), alg, {static_cast<std::uint32_t>(state.range(0)), 100, 1}));
  state.SetLabel(std::string(to_string(alg)));
}

ModelConfig sweep_config() {
  ModelConfig cfg;
  cfg.num_topics = 32;
  cfg.seed = 3;
  return cfg;
}

void BM_SweepSequential(benchmark::State& state) {
  const auto cfg = sweep_config();
  auto s = init_state(corpus(), nullptr, cfg);
  std::uint64_t it = 0;
  for (auto _ : state) sweep_sequential(s, cfg, ++it);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * s.token_count()));
}

void BM_SweepParallel(benchmark::State& state) {
  const auto cfg = sweep_config();
  const auto P = static_cast<std::uint32_t>(state.range(0));
  auto s = init_state(corpus(), nullptr, cfg);
  const auto plan = make_parallel_plan(s, partition(matrix(), Algorithm::a3, {P, 20, 1}).partitioning, nullptr);
  std::uint64_t it = 0;
  for (auto _ : state) sweep_parallel(s, cfg, plan, ++it);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * s.token_count()));
}

}  // namespace

BENCHMARK(BM_BalanceReportSerial)->Arg(10)->Arg(60);
BENCHMARK(BM_BalanceReport)->Arg(10)->Arg(60)->UseRealTime();
BENCHMARK(BM_PartitionSerial)->Args({30, static_cast<int>(Algorithm::a1)})->Args({30, static_cast<int>(Algorithm::a3)})
    ->Args({30, static_cast<int>(Algorithm::baseline)})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Partition)->Args({30, static_cast<int>(Algorithm::a1)})->Args({30, static_cast<int>(Algorithm::a3)})
    ->Args({30, static_cast<int>(Algorithm::baseline)})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepSequential)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
