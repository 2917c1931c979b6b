#include <benchmark/benchmark.h>

#include "lirlab/loss/infonce.hpp"
#include "lirlab/maxsim.hpp"
#include "lirlab/synth.hpp"

using namespace lirlab;

namespace {

EmbeddingStore corpus(std::size_t n, std::size_t p, std::size_t d) {
  SynthSpec spec;
  spec.n = n;
  spec.p = p;
  spec.d = d;
  spec.seed = 42;
  return synth_embeddings(spec);
}

}  // namespace

// Single pair, blocked kernel vs the textbook loop.
void BM_MaxSimPair(benchmark::State& state) {
  const auto store = corpus(2, state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(maxsim(store.matrix(0), store.matrix(1)));
}
BENCHMARK(BM_MaxSimPair)->ArgsProduct({{1, 8, 32}, {16, 128}});

void BM_MaxSimBrute(benchmark::State& state) {
  const auto store = corpus(2, state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(maxsim_brute(store.matrix(0), store.matrix(1)));
}
BENCHMARK(BM_MaxSimBrute)->ArgsProduct({{1, 8, 32}, {16, 128}});

void BM_ScoreMatrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto store = corpus(n, 8, 64);
  WorkerPool pool(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(maxsim_matrix(store, store, pool));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_ScoreMatrix)->ArgsProduct({{64, 256}, {1, 4}})->Unit(benchmark::kMillisecond);

void BM_InfoNceGrad(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto q = corpus(n, 4, 16);
  loss::Batch b;
  b.tau = 0.1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = q.matrix(i);
    b.queries.emplace_back(m.tokens(), m.dim(), std::vector<double>(m.values().begin(), m.values().end()));
  }
  b.targets = b.queries;
  for (auto _ : state) benchmark::DoNotOptimize(loss::infonce_maxsim_grad(b, loss::TiePolicy::first_index));
}
BENCHMARK(BM_InfoNceGrad)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
