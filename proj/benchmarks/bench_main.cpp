#include <benchmark/benchmark.h>

#include "vhem/engine.hpp"
#include "vhem/synth.hpp"

namespace {

vhem::SynthBenchmark make_bench(int states, int mix, int groups, int per_group) {
  vhem::Rng rng(17);
  vhem::SynthStructure st;
  st.n_states = states;
  st.n_mix = mix;
  return vhem::synth_benchmark(groups, per_group, 4.0, st, rng);
}

void BM_EstepPair(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int m = static_cast<int>(state.range(1));
  const auto bench = make_bench(n, m, 2, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vhem::estep_pair(bench.models[0], bench.models[1], 10).objective);
  }
}
BENCHMARK(BM_EstepPair)->Args({2, 1})->Args({4, 2})->Args({8, 4});

void BM_ForwardLoglik(benchmark::State& state) {
  const auto bench = make_bench(static_cast<int>(state.range(0)), 2, 2, 1);
  vhem::Rng rng(3);
  const auto seq = vhem::sample(bench.models[0], static_cast<int>(state.range(1)), rng).sequence;
  for (auto _ : state) benchmark::DoNotOptimize(vhem::forward_loglik(bench.models[0], seq));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_ForwardLoglik)->Args({2, 100})->Args({8, 100})->Args({8, 1000});

void BM_VhemIteration(benchmark::State& state) {
  const auto bench = make_bench(2, 1, 4, static_cast<int>(state.range(0)) / 4);
  const vhem::H3m base = vhem::H3m::uniform(bench.models);
  vhem::VhemConfig cfg;
  cfg.k_reduced = 4;
  cfg.max_iters = 1;
  cfg.tol = 0.0;
  cfg.threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(vhem::vhem_reduce(base, cfg).bound_history.back());
}
BENCHMARK(BM_VhemIteration)->Args({20, 1})->Args({80, 1})->Args({80, 4})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
