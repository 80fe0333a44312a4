#include <benchmark/benchmark.h>

#include "frameless/exact_analysis.hpp"
#include "frameless/monte_carlo.hpp"

namespace {

using namespace frameless;

void BM_Analyze(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto cfg = ProtocolConfig::single(n, 2.6, n * 13 / 10);
  for (auto _ : state) benchmark::DoNotOptimize(analyze(cfg).per);
}
BENCHMARK(BM_Analyze)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_AnalyzeTwoStage(benchmark::State& state) {
  const auto cfg = ProtocolConfig::two_stage(100, 2.62, 5.04, 126, 200);
  for (auto _ : state) benchmark::DoNotOptimize(analyze(cfg).per);
}
BENCHMARK(BM_AnalyzeTwoStage)->Unit(benchmark::kMillisecond);

void BM_SampleAndPeel(benchmark::State& state) {
  const auto cfg = ProtocolConfig::single(100, 2.5, 130);
  std::uint64_t trial = 0;
  for (auto _ : state) {
    auto rng = trial_rng(1, trial++);
    benchmark::DoNotOptimize(peel(sample_graph(cfg, rng)).size());
  }
}
BENCHMARK(BM_SampleAndPeel);

void BM_Simulate(benchmark::State& state) {
  const auto cfg = ProtocolConfig::single(100, 2.5, 130);
  for (auto _ : state) benchmark::DoNotOptimize(simulate(cfg, {1000, 1, 1}).mean_per);
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
