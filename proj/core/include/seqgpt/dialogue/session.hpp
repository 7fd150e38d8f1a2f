#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqgpt/llm/chat.hpp"
#include "seqgpt/match/query.hpp"

namespace seqgpt::dialogue {

class InvalidRewind : public Error {
 public:
  explicit InvalidRewind(const std::string& detail) : Error("INVALID_REWIND", detail) {}
};

struct Turn {
  llm::Role role = llm::Role::user;
  std::string text;
  std::int64_t timestamp_ms = 0;

  friend bool operator==(const Turn&, const Turn&) = default;
};

/// Draft as it stood when a state was entered for the first time.
struct Visit {
  std::string state;
  match::QueryDraft draft;

  friend bool operator==(const Visit&, const Visit&) = default;
};

struct Session {
  std::string id;
  std::vector<Turn> history;  // append-only
  std::string state;
  match::QueryDraft draft;
  std::optional<std::vector<match::MatchResult>> last_results;
  std::vector<std::string> path;    // every state entered, in order
  std::vector<Visit> first_visits;  // ordered by first entry

  bool visited(std::string_view state) const noexcept;
  /// Index into first_visits, or npos.
  std::size_t first_visit_index(std::string_view state) const noexcept;

  /// Records a state entry (path, and a first-visit snapshot if new).
  void enter(const std::string& state);

  friend bool operator==(const Session&, const Session&) = default;
};

/// Returns the session to `target`: the draft is restored to its snapshot
/// from the target's first visit (so everything collected from then on is
/// dropped), results are cleared, later first-visit records are forgotten
/// and the target is appended to the path. History is kept in full.
/// Throws InvalidRewind when the target was never visited, is `stop`, or
/// runs automatically on entry.
Session rewind(const Session& session, std::string_view target);

nlohmann::json to_json(const Turn& turn);
nlohmann::json to_json(const Session& session);

}  // namespace seqgpt::dialogue
