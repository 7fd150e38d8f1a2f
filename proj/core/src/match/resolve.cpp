#include "seqgpt/match/resolve.hpp"

namespace seqgpt::match {

AmbiguousPlace::AmbiguousPlace(const std::string& name, std::vector<geo::Poi> candidates)
    : Error("AMBIGUOUS_PLACE", "ambiguous place: " + name + " (" +
                                   std::to_string(candidates.size()) + " matches)"),
      name_(name),
      candidates_(std::move(candidates)) {}

std::vector<DraftExample> resolve_examples(const geo::PoiStore& store,
                                           const std::vector<DraftExample>& examples) {
  std::vector<DraftExample> out = examples;
  std::optional<geo::GeoPoint> anchor;
  for (std::size_t i = 0; i < out.size(); ++i) {
    DraftExample& e = out[i];
    if (i == 0) e.anchor_distance_m = 0.0;
    if (e.kind != ExampleKind::named) continue;
    if (!e.name || e.name->empty()) throw ContractViolation("named example without a name");
    auto matches = store.find_by_name(*e.name);
    if (matches.empty()) throw UnknownPlace(*e.name);
    if (matches.size() > 1) throw AmbiguousPlace(*e.name, std::move(matches));
    const geo::Poi& poi = matches.front();
    e.name = poi.name;
    e.category = poi.category;
    if (i == 0) {
      anchor = poi.point;
    } else if (anchor) {
      e.anchor_distance_m = geo::haversine_m(*anchor, poi.point);
    } else if (!e.anchor_distance_m) {
      throw AnchorUnresolved(i + 1);
    }
  }
  return out;
}

ExemplarQuery resolve_query(const geo::PoiStore& store, const QueryDraft& raw) {
  if (raw.examples.empty()) throw ContractViolation("query needs at least one example");
  const auto resolved = resolve_examples(store, raw.examples);
  if (!raw.area) throw MissingArea();
  std::vector<ExampleSpec> specs;
  specs.reserve(resolved.size());
  for (std::size_t i = 0; i < resolved.size(); ++i) {
    const DraftExample& e = resolved[i];
    if (!e.anchor_distance_m) throw MissingDistance(i + 1);
    specs.push_back({e.kind, e.name, e.category, *e.anchor_distance_m});
  }
  ExemplarQuery q{std::move(specs), *raw.area, raw.k, raw.eps_m};
  q.validate();
  return q;
}

}  // namespace seqgpt::match
