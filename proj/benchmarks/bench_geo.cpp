#include <benchmark/benchmark.h>

#include <random>

#include "seqgpt/geo/poi_store.hpp"

namespace {

using namespace seqgpt::geo;

std::vector<Poi> random_pois(std::size_t n, std::uint64_t seed) {
  static const char* cats[] = {"gym", "hotel", "cafe", "station", "mall"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> off(-0.1, 0.1);
  std::vector<Poi> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"p" + std::to_string(i), "poi " + std::to_string(i), cats[rng() % 5],
                   GeoPoint(1.30 + off(rng), 103.85 + off(rng)), {}});
  }
  return out;
}

void BM_Haversine(benchmark::State& state) {
  const GeoPoint a(1.2931, 103.8558), b(1.2950, 103.8530);
  for (auto _ : state) benchmark::DoNotOptimize(haversine_m(a, b));
}
BENCHMARK(BM_Haversine);

void BM_Within(benchmark::State& state) {
  const PoiStore store(random_pois(static_cast<std::size_t>(state.range(0)), 1));
  const Circle area({1.30, 103.85}, 2000);
  for (auto _ : state) benchmark::DoNotOptimize(store.within(area));
}
BENCHMARK(BM_Within)->Arg(1'000)->Arg(10'000)->Arg(100'000);

void BM_RingQuery(benchmark::State& state) {
  const PoiStore store(random_pois(static_cast<std::size_t>(state.range(0)), 2));
  const GeoPoint center(1.30, 103.85);
  for (auto _ : state) benchmark::DoNotOptimize(store.ring_query(center, 800, 100, "gym"));
}
BENCHMARK(BM_RingQuery)->Arg(1'000)->Arg(10'000)->Arg(100'000);

}  // namespace
