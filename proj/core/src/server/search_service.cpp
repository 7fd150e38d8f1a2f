#include "seqgpt/server/search_service.hpp"

#include "seqgpt/match/resolve.hpp"

namespace seqgpt::server {

SearchService::SearchService(std::shared_ptr<const geo::PoiStore> store, Gazetteer gazetteer,
                             std::size_t cache_capacity, match::MatchConfig config)
    : store_(std::move(store)),
      gazetteer_(std::move(gazetteer)),
      cache_(std::make_unique<match::QueryCache>(cache_capacity)),
      config_(config) {
  if (!store_) throw ContractViolation("search service needs a POI store");
}

std::vector<match::DraftExample> SearchService::resolve_examples(
    const std::vector<match::DraftExample>& examples) const {
  return match::resolve_examples(*store_, examples);
}

dialogue::GeocodeResult SearchService::geocode(std::string_view name) const { return gazetteer_.geocode(name); }

match::ExemplarQuery SearchService::resolve(const match::QueryDraft& draft) const {
  match::QueryDraft d = draft;
  if (!d.area && d.area_name) d.area = gazetteer_.geocode(*d.area_name).circle;
  return match::resolve_query(*store_, d);
}

match::CachedSearch SearchService::run(const match::ExemplarQuery& query) const {
  return match::cached_search(*cache_, *store_, query, config_);
}

std::vector<match::MatchResult> SearchService::search(const match::QueryDraft& draft) const {
  return run(resolve(draft)).results;
}

}  // namespace seqgpt::server
