#pragma once

#include <memory>

#include "seqgpt/dialogue/orchestrator.hpp"
#include "seqgpt/match/query_cache.hpp"
#include "seqgpt/server/gazetteer.hpp"

namespace seqgpt::server {

/// Dataset + gazetteer + result cache. This is both the dialogue's search
/// context and the engine behind /api/search.
class SearchService final : public dialogue::SearchContext {
 public:
  SearchService(std::shared_ptr<const geo::PoiStore> store, Gazetteer gazetteer,
                std::size_t cache_capacity = match::QueryCache::kDefaultCapacity, match::MatchConfig config = {});

  std::vector<match::DraftExample> resolve_examples(
      const std::vector<match::DraftExample>& examples) const override;
  dialogue::GeocodeResult geocode(std::string_view name) const override;
  std::vector<match::MatchResult> search(const match::QueryDraft& draft) const override;

  /// Geocodes a named area if needed, resolves the examples and runs the
  /// cached matcher.
  match::ExemplarQuery resolve(const match::QueryDraft& draft) const;
  match::CachedSearch run(const match::ExemplarQuery& query) const;

  const geo::PoiStore& store() const noexcept { return *store_; }
  const Gazetteer& gazetteer() const noexcept { return gazetteer_; }
  match::QueryCache& cache() const noexcept { return *cache_; }

 private:
  std::shared_ptr<const geo::PoiStore> store_;
  Gazetteer gazetteer_;
  std::unique_ptr<match::QueryCache> cache_;
  match::MatchConfig config_;
};

}  // namespace seqgpt::server
