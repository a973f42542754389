// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include <numeric>

#include "quinelab/lab.hpp"

using namespace quinelab;

namespace {

SearchOptions search_opts(std::uint64_t samples, int workers) {
  SearchOptions o;
  o.family = default_family(RandomFamily::Kind::ic, 5, 8);
  o.family.seed = 1;
  o.samples = samples;
  o.verify.chemistry = ChemistryId::ic;
  o.verify.horizon = 200;
  o.verify.max_nodes = 100;
  o.workers = workers;
  return o;
}

void BM_search_serial(benchmark::State& st) {
  auto o = search_opts(static_cast<std::uint64_t>(st.range(0)), 1);
  for (auto _ : st) benchmark::DoNotOptimize(search_quines_serial(o));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_search_parallel(benchmark::State& st) {
  auto o = search_opts(2000, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(search_quines(o));
  st.SetItemsProcessed(st.iterations() * 2000);
}

const Molecule& loop4() {
  static const Molecule m = parse_mol("L b t a\nT t\nFOE a b r\nT r", Family::directed);
  return m;
}

std::vector<std::uint64_t> seeds(std::size_t n) {
  std::vector<std::uint64_t> s(n);
  std::iota(s.begin(), s.end(), 1);
  return s;
}

MetabolismOptions lifetime_opts() {
  MetabolismOptions o;
  o.chemistry = ChemistryId::diric;  // never dies, so every run goes the full horizon
  o.horizon = 2000;
  return o;
}

void BM_lifetime_serial(benchmark::State& st) {
  auto s = seeds(32);
  for (auto _ : st) benchmark::DoNotOptimize(lifetime_stats_serial(loop4(), lifetime_opts(), s));
}

void BM_lifetime_parallel(benchmark::State& st) {
  auto s = seeds(32);
  for (auto _ : st)
    benchmark::DoNotOptimize(lifetime_stats(loop4(), lifetime_opts(), s, static_cast<int>(st.range(0))));
}

}  // namespace

BENCHMARK(BM_search_serial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_search_parallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_lifetime_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_lifetime_parallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
