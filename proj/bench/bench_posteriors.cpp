// Serial reference vs OpenMP posterior table construction on synthetic
// n-best lattices.
#include <benchmark/benchmark.h>

#include "lmbr/nbest.hpp"
#include "lmbr/posteriors.hpp"
#include "lmbr/synth.hpp"

namespace {

lmbr::Lattice make_lattice(std::size_t n) {
  lmbr::SynthConfig cfg;
  cfg.size = 1;
  cfg.nbest_size = n;
  cfg.min_len = 8;
  cfg.max_len = 14;
  cfg.lm_corpus_size = 0;
  const auto task = lmbr::synth_generate(cfg);
  return lmbr::normalize_posterior(lmbr::nbest_to_lattice(task.nbest.front()));
}

void BM_TableSerial(benchmark::State& state) {
  const auto lat = make_lattice(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lmbr::compute_posterior_table_serial(lat, 4, 0.1));
}

void BM_TableParallel(benchmark::State& state) {
  const auto lat = make_lattice(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lmbr::compute_posterior_table(lat, 4, 0.1));
}

}  // namespace

BENCHMARK(BM_TableSerial)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TableParallel)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
