#include "seqgpt/dialogue/session.hpp"

#include <algorithm>

#include "seqgpt/dialogue/state_graph.hpp"
#include "seqgpt/match/wire.hpp"

namespace seqgpt::dialogue {

bool Session::visited(std::string_view s) const noexcept { return first_visit_index(s) != std::string::npos; }

std::size_t Session::first_visit_index(std::string_view s) const noexcept {
  for (std::size_t i = 0; i < first_visits.size(); ++i) {
    if (first_visits[i].state == s) return i;
  }
  return std::string::npos;
}

void Session::enter(const std::string& s) {
  state = s;
  path.push_back(s);
  if (!visited(s)) first_visits.push_back({s, draft});
}

Session rewind(const Session& session, std::string_view target) {
  const std::size_t idx = session.first_visit_index(target);
  if (idx == std::string::npos) {
    throw InvalidRewind("state '" + std::string(target) + "' was never visited");
  }
  if (target == kStopState) throw InvalidRewind("cannot rewind to the stop state");
  if (is_automatic(handler_for(target))) {
    throw InvalidRewind("state '" + std::string(target) + "' runs on entry and cannot be resumed");
  }
  Session out = session;
  out.draft = session.first_visits[idx].draft;
  out.first_visits.resize(idx + 1);
  out.last_results.reset();
  out.state = std::string(target);
  out.path.push_back(out.state);
  return out;
}

nlohmann::json to_json(const Turn& turn) {
  return {{"role", llm::to_string(turn.role)}, {"text", turn.text}, {"timestamp_ms", turn.timestamp_ms}};
}

nlohmann::json to_json(const Session& s) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& t : s.history) history.push_back(to_json(t));
  nlohmann::json j{{"session_id", s.id},
                   {"state", s.state},
                   {"history", std::move(history)},
                   {"draft", match::to_json(s.draft)},
                   {"path", s.path}};
  j["results"] = s.last_results ? match::to_json(*s.last_results) : nlohmann::json(nullptr);
  return j;
}

}  // namespace seqgpt::dialogue
