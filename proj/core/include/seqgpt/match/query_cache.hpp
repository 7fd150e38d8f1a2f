#pragma once

#include <cstdint>
#include <functional>
#include <future>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqgpt/match/matcher.hpp"

namespace seqgpt::match {

/// Canonical cache key: categories lowercased, anchor distances rounded to
/// 10 m, area center to 4 decimal degrees, radius to 100 m; k and eps verbatim.
std::string cache_key(const ExemplarQuery& query);

using ResultList = std::vector<MatchResult>;

/// LRU cache of ranked result lists keyed by canonical query. Entries belong
/// to one store generation; a lookup under a different generation drops
/// everything. Concurrent misses on one key run the computation once and
/// share its result.
class QueryCache {
 public:
  static constexpr std::size_t kDefaultCapacity = 256;

  struct Stats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t computations = 0;
    std::uint64_t evictions = 0;
    std::uint64_t invalidations = 0;
  };

  struct Lookup {
    std::shared_ptr<const ResultList> results;
    bool hit = false;
  };

  explicit QueryCache(std::size_t capacity = kDefaultCapacity);

  QueryCache(const QueryCache&) = delete;
  QueryCache& operator=(const QueryCache&) = delete;

  Lookup get_or_compute(const std::string& key, std::uint64_t generation,
                        const std::function<ResultList()>& compute);

  std::size_t size() const;
  std::size_t capacity() const noexcept { return capacity_; }
  Stats stats() const;
  void clear();

 private:
  using Value = std::shared_ptr<const ResultList>;
  struct Entry {
    std::string key;
    Value value;
  };

  void reset_generation_locked(std::uint64_t generation);

  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::uint64_t generation_ = 0;
  std::list<Entry> lru_;  // front = most recently used
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
  std::unordered_map<std::string, std::shared_future<Value>> in_flight_;
  Stats stats_;
};

struct CachedSearch {
  ResultList results;
  bool hit = false;
};

CachedSearch cached_search(QueryCache& cache, const geo::PoiStore& store,
                           const ExemplarQuery& query, const MatchConfig& config = {});

}  // namespace seqgpt::match
