#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "seqgpt/match/query.hpp"

// JSON wire forms shared by the HTTP server, the CLI and the dialogue layer.
namespace seqgpt::match {

class InvalidQuery : public Error {
 public:
  explicit InvalidQuery(const std::string& message) : Error("INVALID_QUERY", message) {}
};

nlohmann::json to_json(const geo::GeoPoint& p);
nlohmann::json to_json(const geo::Circle& c);
nlohmann::json to_json(const geo::Poi& p);
nlohmann::json to_json(const ExemplarQuery& q);
nlohmann::json to_json(const QueryDraft& d);
nlohmann::json to_json(const MatchResult& r);
nlohmann::json to_json(const std::vector<MatchResult>& results);

geo::Circle circle_from_json(const nlohmann::json& j);

/// Strict parse of a complete query; throws InvalidQuery.
ExemplarQuery query_from_json(const nlohmann::json& j);

/// Lenient parse: distances may be null, named examples may omit the
/// category, the area may be a circle, `{"name": ...}`, or absent.
QueryDraft draft_from_json(const nlohmann::json& j);

}  // namespace seqgpt::match
