// Serial reference vs OpenMP kernels. Each benchmark takes the trace count as
// its argument and the execution mode as the second (0 serial, 1 parallel).

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <utility>

#include "tracealign/aligner.hpp"
#include "tracealign/experiments.hpp"
#include "tracealign/io.hpp"
#include "tracealign/metrics.hpp"

using namespace tracealign;

namespace {

std::shared_ptr<const EventLog> model_log(std::size_t traces) {
  static std::map<std::size_t, std::shared_ptr<const EventLog>> cache;
  auto& slot = cache[traces];
  if (!slot) {
    const auto spec = io::read_model_file(TRACEALIGN_SOURCE_DIR "/models/trauma_resuscitation.json");
    slot = std::make_shared<const EventLog>(generate_log(spec, traces, 7));
  }
  return slot;
}

const Alignment& model_alignment(std::size_t traces) {
  static std::map<std::size_t, Alignment> cache;
  auto it = cache.find(traces);
  if (it == cache.end()) it = cache.emplace(traces, progressive_align(model_log(traces))).first;
  return it->second;
}

Execution mode(const benchmark::State& state) {
  return state.range(1) == 0 ? Execution::kSerial : Execution::kParallel;
}

void BM_DistanceMatrix(benchmark::State& state) {
  const auto log = model_log(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(distance_matrix(*log, {}, mode(state)));
}

void BM_ProgressiveAlign(benchmark::State& state) {
  const auto log = model_log(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(progressive_align(log, {}, std::nullopt, mode(state)));
}

void BM_PatternCensus(benchmark::State& state) {
  const auto log = model_log(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(extract_patterns(*log, 2, std::nullopt, mode(state)));
}

void BM_Oms(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto& a = model_alignment(n);
  const auto census = extract_patterns(a.source());
  for (auto _ : state) benchmark::DoNotOptimize(overall_misalignment_score(a, census, 0.4, mode(state)));
}

void BM_Ois(benchmark::State& state) {
  const auto& a = model_alignment(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(overall_information_score(a, mode(state)));
}

void BM_RefFreeSps(benchmark::State& state) {
  const auto& a = model_alignment(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ref_free_sps(a, {}, mode(state)));
}

void BM_CorrelationExperiment(benchmark::State& state) {
  const auto log = model_log(static_cast<std::size_t>(state.range(0)));
  ExperimentOptions o;
  o.samples = 20;
  o.max_moves = 20;
  o.consensus_trees = 2;
  o.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(correlation_experiment(log, o, mode(state)));
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int n : {20, 80})
    for (int m : {0, 1}) b->Args({n, m});
  b->ArgNames({"traces", "parallel"});
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_DistanceMatrix)->Apply(sizes);
BENCHMARK(BM_ProgressiveAlign)->Apply(sizes);
BENCHMARK(BM_PatternCensus)->Apply(sizes);
BENCHMARK(BM_Oms)->Apply(sizes);
BENCHMARK(BM_Ois)->Apply(sizes);
BENCHMARK(BM_RefFreeSps)->Apply(sizes);
BENCHMARK(BM_CorrelationExperiment)->Apply(sizes);

BENCHMARK_MAIN();
