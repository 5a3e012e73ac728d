#include <benchmark/benchmark.h>

#include "tafp/benchmark_gen.hpp"
#include "tafp/fu_placer.hpp"
#include "tafp/lc_placer.hpp"
#include "tafp/thermal.hpp"

namespace {

using namespace tafp;

const Benchmark& reference() {
  static const Benchmark b = generate_benchmark(BenchmarkSpec::reference());
  return b;
}

void BM_Decode(benchmark::State& state) {
  const Problem& p = reference().problem;
  Rng rng(1);
  const FuChromosome c = random_chromosome(p.units.size(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(decode(c, p));
}
BENCHMARK(BM_Decode)->Unit(benchmark::kMillisecond);

void BM_DecodeStar(benchmark::State& state) {
  const Problem& p = reference().problem;
  Rng rng(1);
  const FuChromosome c = random_chromosome(p.units.size(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(decode_star(c, p));
}
BENCHMARK(BM_DecodeStar)->Unit(benchmark::kMillisecond);

void BM_SolveSteadyLinear(benchmark::State& state) {
  const Floorplan fp = baseline_floorplan(reference());
  const RCNetwork net = assemble(fp, reference().problem);
  for (auto _ : state) benchmark::DoNotOptimize(solve_steady(net));
}
BENCHMARK(BM_SolveSteadyLinear)->Unit(benchmark::kMillisecond);

void BM_SimulateSteady(benchmark::State& state) {
  const Floorplan fp = baseline_floorplan(reference());
  for (auto _ : state) benchmark::DoNotOptimize(simulate_steady(fp, reference().problem));
}
BENCHMARK(BM_SimulateSteady)->Unit(benchmark::kMillisecond);

void BM_LcEvaluate(benchmark::State& state) {
  const Problem& p = reference().problem;
  const Floorplan fp = baseline_floorplan(reference());
  const auto field = simulate_steady(fp, p).field;
  const auto cand = enumerate_channel_candidates(fp);
  const LcEvaluator ev(p.stack, field, cand, 32);
  Rng rng(3);
  const LcChromosome bits = random_bits(cand.size(), 32.0 / cand.size(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(ev.evaluate(bits));
}
BENCHMARK(BM_LcEvaluate);

}  // namespace

BENCHMARK_MAIN();
