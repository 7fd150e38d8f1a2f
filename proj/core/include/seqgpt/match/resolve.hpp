#pragma once

#include <vector>

#include "seqgpt/geo/poi_store.hpp"
#include "seqgpt/match/query.hpp"

namespace seqgpt::match {

class UnknownPlace : public Error {
 public:
  explicit UnknownPlace(const std::string& name)
      : Error("UNKNOWN_PLACE", "unknown place: " + name), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class AmbiguousPlace : public Error {
 public:
  AmbiguousPlace(const std::string& name, std::vector<geo::Poi> candidates);
  const std::string& name() const noexcept { return name_; }
  const std::vector<geo::Poi>& candidates() const noexcept { return candidates_; }

 private:
  std::string name_;
  std::vector<geo::Poi> candidates_;
};

/// A later named slot needs its distance from slot 1, but slot 1 is not a
/// named place and no distance was stated.
class AnchorUnresolved : public Error {
 public:
  explicit AnchorUnresolved(std::size_t slot)
      : Error("ANCHOR_UNRESOLVED", "slot " + std::to_string(slot) +
                                       ": distance from slot 1 cannot be computed") {}
};

class MissingDistance : public Error {
 public:
  explicit MissingDistance(std::size_t slot)
      : Error("MISSING_DISTANCE",
              "slot " + std::to_string(slot) + ": distance from the first place is missing") {}
};

class MissingArea : public Error {
 public:
  MissingArea() : Error("MISSING_AREA", "the query has no resolved search area") {}
};

/// Resolves named slots against the whole store (examples need not lie in
/// the search area). Named slots take the dataset's category and canonical
/// name; their anchor distances are recomputed from slot 1's place when slot 1
/// is named, replacing any stated value. Category-only slots are unchanged
/// except that slot 1 is pinned to distance 0.
std::vector<DraftExample> resolve_examples(const geo::PoiStore& store,
                                           const std::vector<DraftExample>& examples);

/// resolve_examples plus completeness checks. The draft's area must already
/// be a circle.
ExemplarQuery resolve_query(const geo::PoiStore& store, const QueryDraft& raw);

}  // namespace seqgpt::match
