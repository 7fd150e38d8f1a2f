#include "seqgpt/match/query_cache.hpp"

#include <cmath>
#include <cstdio>

#include "seqgpt/text.hpp"

namespace seqgpt::match {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  // "-0.0000" and "0.0000" must share a key.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string verbatim(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

long long round_to(double v, double step) { return std::llround(v / step) * static_cast<long long>(step); }

}  // namespace

std::string cache_key(const ExemplarQuery& query) {
  std::string key = "seq1;k=" + std::to_string(query.k) + ";eps=" + verbatim(query.eps_m) +
                    ";area=" + fixed(query.area.center().lat(), 4) + "," +
                    fixed(query.area.center().lon(), 4) + "," +
                    std::to_string(round_to(query.area.radius_m(), 100.0)) + ";ex=";
  for (std::size_t i = 0; i < query.examples.size(); ++i) {
    const ExampleSpec& e = query.examples[i];
    if (i) key += '|';
    key += text::to_lower(e.category);
    key += '@';
    key += std::to_string(round_to(e.anchor_distance_m, 10.0));
  }
  return key;
}

QueryCache::QueryCache(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ContractViolation("cache capacity must be positive");
}

void QueryCache::reset_generation_locked(std::uint64_t generation) {
  if (generation == generation_) return;
  if (!lru_.empty()) ++stats_.invalidations;
  lru_.clear();
  index_.clear();
  generation_ = generation;
}

QueryCache::Lookup QueryCache::get_or_compute(const std::string& key, std::uint64_t generation,
                                              const std::function<ResultList()>& compute) {
  std::promise<Value> promise;
  const std::string flight_key = std::to_string(generation) + '\x1f' + key;
  {
    std::unique_lock lock(mu_);
    reset_generation_locked(generation);
    if (auto it = index_.find(key); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      ++stats_.hits;
      return {it->second->value, true};
    }
    if (auto it = in_flight_.find(flight_key); it != in_flight_.end()) {
      auto shared = it->second;
      ++stats_.hits;
      lock.unlock();
      return {shared.get(), true};
    }
    ++stats_.misses;
    ++stats_.computations;
    in_flight_.emplace(flight_key, promise.get_future().share());
  }

  Value value;
  try {
    value = std::make_shared<const ResultList>(compute());
  } catch (...) {
    std::lock_guard lock(mu_);
    promise.set_exception(std::current_exception());
    in_flight_.erase(flight_key);
    throw;
  }

  std::lock_guard lock(mu_);
  promise.set_value(value);
  in_flight_.erase(flight_key);
  if (generation == generation_ && !index_.contains(key)) {
    lru_.push_front({key, value});
    index_[key] = lru_.begin();
    while (lru_.size() > capacity_) {
      index_.erase(lru_.back().key);
      lru_.pop_back();
      ++stats_.evictions;
    }
  }
  return {value, false};
}

std::size_t QueryCache::size() const {
  std::lock_guard lock(mu_);
  return lru_.size();
}

QueryCache::Stats QueryCache::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

void QueryCache::clear() {
  std::lock_guard lock(mu_);
  lru_.clear();
  index_.clear();
}

CachedSearch cached_search(QueryCache& cache, const geo::PoiStore& store,
                           const ExemplarQuery& query, const MatchConfig& config) {
  query.validate();
  std::string key = cache_key(query);
  key += ";cap=";
  key += config.cap == kUnboundedCap ? "inf" : std::to_string(config.cap);
  auto lookup = cache.get_or_compute(key, store.generation(),
                                     [&] { return match_exemplar(store, query, config); });
  return {*lookup.results, lookup.hit};
}

}  // namespace seqgpt::match
