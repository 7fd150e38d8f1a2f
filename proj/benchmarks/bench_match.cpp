#include <benchmark/benchmark.h>

#include "seqgpt/geo/ingest.hpp"
#include "seqgpt/match/matcher.hpp"
#include "seqgpt/match/query_cache.hpp"

namespace {

using namespace seqgpt;

const geo::PoiStore& desk() {
  static const geo::PoiStore store = geo::load_pois(std::filesystem::path(SEQGPT_DATA_DIR) / "desk_pois.csv");
  return store;
}

match::ExemplarQuery demo_query() {
  return {{{match::ExampleKind::named, "Suntec City", "mall", 0},
           {match::ExampleKind::named, "Anytime Fitness City Hall", "gym", 461},
           {match::ExampleKind::category_only, std::nullopt, "hotel", 200}},
          geo::Circle({-33.8688, 151.2093}, 1500)};
}

// range(0): candidates per slot, 0 = unbounded
void BM_MatchDemo(benchmark::State& state) {
  const auto q = demo_query();
  const match::MatchConfig cfg{state.range(0) == 0 ? match::kUnboundedCap : static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(match::match_exemplar(desk(), q, cfg));
}
BENCHMARK(BM_MatchDemo)->Arg(0)->Arg(50)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_BruteForceDemo(benchmark::State& state) {
  const auto q = demo_query();
  for (auto _ : state) benchmark::DoNotOptimize(match::brute_force_match(desk(), q));
}
BENCHMARK(BM_BruteForceDemo)->Unit(benchmark::kMicrosecond);

void BM_CacheHit(benchmark::State& state) {
  match::QueryCache cache;
  const auto q = demo_query();
  match::cached_search(cache, desk(), q);
  for (auto _ : state) benchmark::DoNotOptimize(match::cached_search(cache, desk(), q));
}
BENCHMARK(BM_CacheHit);

void BM_CacheKey(benchmark::State& state) {
  const auto q = demo_query();
  for (auto _ : state) benchmark::DoNotOptimize(match::cache_key(q));
}
BENCHMARK(BM_CacheKey);

}  // namespace
