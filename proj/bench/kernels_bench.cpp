#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "mpshrink/data.hpp"
#include "mpshrink/kernels.hpp"

namespace {

using namespace mpshrink;

// Sparse-ish random patterns: m rows, d features, ~density nonzeros each.
const Dataset& bench_dataset(std::size_t m) {
  static std::map<std::size_t, Dataset> cache;
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g;
  std::bernoulli_distribution keep(0.3);
  const std::uint32_t d = 200;
  std::vector<RawExample> raw(m);
  for (auto& ex : raw) {
    ex.label = keep(rng) ? 1 : -1;
    for (std::uint32_t j = 1; j <= d; ++j)
      if (keep(rng)) ex.features.push_back({j, g(rng)});
  }
  return cache.emplace(m, build_dataset(raw, 1.0, 0.0)).first->second;
}

std::vector<double> bench_weights(const Dataset& ds) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::vector<double> w(ds.dim);
  for (auto& v : w) v = g(rng);
  return w;
}

void BM_MinDotSerial(benchmark::State& st) {
  const auto& ds = bench_dataset(static_cast<std::size_t>(st.range(0)));
  const auto w = bench_weights(ds);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::min_dot(w, 1.0, ds.patterns));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_MinDotOmp(benchmark::State& st) {
  const auto& ds = bench_dataset(static_cast<std::size_t>(st.range(0)));
  const auto w = bench_weights(ds);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::omp::min_dot(w, 1.0, ds.patterns));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_CountSerial(benchmark::State& st) {
  const auto& ds = bench_dataset(static_cast<std::size_t>(st.range(0)));
  const auto w = bench_weights(ds);
  for (auto _ : st)
    benchmark::DoNotOptimize(kernels::serial::count_at_most(w, 1.0, ds.patterns, 0.0));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_CountOmp(benchmark::State& st) {
  const auto& ds = bench_dataset(static_cast<std::size_t>(st.range(0)));
  const auto w = bench_weights(ds);
  for (auto _ : st)
    benchmark::DoNotOptimize(kernels::omp::count_at_most(w, 1.0, ds.patterns, 0.0));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_MinDotSerial)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_MinDotOmp)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_CountSerial)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_CountOmp)->Arg(1 << 12)->Arg(1 << 16);

BENCHMARK_MAIN();
