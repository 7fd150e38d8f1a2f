#include "seqgpt/dialogue/state_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace seqgpt::dialogue {

namespace {

constexpr const char* kStandardGraph = R"json({
  "start": "greet",
  "states": [
    {"name": "greet", "role": "assistant", "produces_query": false,
     "prompt": "Greet the user and invite them to describe example places they know.",
     "transitions": [{"to": "collect_examples", "weight": 1.0}, {"to": "stop", "weight": 0.05}]},
    {"name": "collect_examples", "role": "assistant", "produces_query": true,
     "prompt": "Collect example places (by name or category) and their distances in meters from the first place.",
     "transitions": [{"to": "confirm_examples", "weight": 0.8}, {"to": "error_recovery", "weight": 0.1},
                     {"to": "stop", "weight": 0.1}]},
    {"name": "confirm_examples", "role": "assistant", "produces_query": false,
     "prompt": "Summarize the chosen examples and ask the user to acknowledge them or add more.",
     "transitions": [{"to": "collect_area", "weight": 0.7}, {"to": "collect_examples", "weight": 0.2},
                     {"to": "stop", "weight": 0.1}]},
    {"name": "collect_area", "role": "assistant", "produces_query": true,
     "prompt": "Ask for a general search area: a neighborhood, city, region, or landmark.",
     "transitions": [{"to": "confirm_query", "weight": 0.8}, {"to": "collect_examples", "weight": 0.1},
                     {"to": "error_recovery", "weight": 0.05}, {"to": "stop", "weight": 0.05}]},
    {"name": "confirm_query", "role": "assistant", "produces_query": false,
     "prompt": "Confirm the search area and examples, then ask whether to start the search.",
     "transitions": [{"to": "execute_search", "weight": 0.8}, {"to": "collect_area", "weight": 0.1},
                     {"to": "collect_examples", "weight": 0.05}, {"to": "stop", "weight": 0.05}]},
    {"name": "execute_search", "role": "assistant", "produces_query": false,
     "prompt": "Report the outcome of the search.",
     "transitions": [{"to": "present_results", "weight": 0.9}, {"to": "error_recovery", "weight": 0.1}]},
    {"name": "present_results", "role": "assistant", "produces_query": false,
     "prompt": "Present the ranked result sets and offer to refine the query.",
     "transitions": [{"to": "refine", "weight": 0.3}, {"to": "stop", "weight": 0.7}]},
    {"name": "refine", "role": "assistant", "produces_query": true,
     "prompt": "Apply the user's adjustments to the examples or area and offer to search again.",
     "transitions": [{"to": "execute_search", "weight": 0.6}, {"to": "collect_examples", "weight": 0.1},
                     {"to": "collect_area", "weight": 0.1}, {"to": "stop", "weight": 0.2}]},
    {"name": "error_recovery", "role": "assistant", "produces_query": false,
     "prompt": "Ask the user to clarify, then return to the step the query still needs.",
     "transitions": [{"to": "collect_examples", "weight": 0.35}, {"to": "confirm_examples", "weight": 0.15},
                     {"to": "collect_area", "weight": 0.2}, {"to": "confirm_query", "weight": 0.2},
                     {"to": "stop", "weight": 0.1}]},
    {"name": "stop", "role": "system", "produces_query": false,
     "prompt": "The conversation has ended.", "transitions": []}
  ]
})json";

}  // namespace

GraphConfig GraphConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw GraphError("graph config must be an object");
  GraphConfig g;
  try {
    const auto& states = j.at("states");
    if (!states.is_array() || states.empty()) throw GraphError("\"states\" must be a non-empty array");
    for (const auto& s : states) {
      StateConfig sc;
      sc.name = s.at("name").get<std::string>();
      if (sc.name.empty()) throw GraphError("state with empty name");
      try {
        sc.role = llm::role_from_string(s.at("role").get<std::string>());
      } catch (const ContractViolation& e) {
        throw GraphError("state " + sc.name + ": " + e.what());
      }
      sc.prompt = s.value("prompt", "");
      sc.produces_query = s.value("produces_query", false);
      if (auto t = s.find("transitions"); t != s.end()) {
        for (const auto& tr : *t) {
          Transition edge{tr.at("to").get<std::string>(), tr.value("weight", 1.0)};
          if (!std::isfinite(edge.weight) || edge.weight < 0.0) {
            throw GraphError("state " + sc.name + ": transition weight must be finite and >= 0");
          }
          sc.transitions.push_back(std::move(edge));
        }
      }
      g.states.push_back(std::move(sc));
    }
    g.start = j.at("start").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw GraphError(std::string("malformed graph config: ") + e.what());
  }
  std::set<std::string> names;
  for (const auto& s : g.states) {
    if (!names.insert(s.name).second) throw GraphError("duplicate state: " + s.name);
  }
  for (const auto& s : g.states) {
    for (const auto& t : s.transitions) {
      if (!names.contains(t.to)) throw GraphError("state " + s.name + ": unknown target " + t.to);
    }
  }
  if (!names.contains(g.start)) throw GraphError("start state is not defined: " + g.start);
  return g;
}

GraphConfig GraphConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("IO_ERROR", "cannot open graph config: " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw GraphError(path.string() + ": not valid JSON");
  return from_json(j);
}

nlohmann::json GraphConfig::to_json() const {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : this->states) {
    nlohmann::json tr = nlohmann::json::array();
    for (const auto& t : s.transitions) tr.push_back({{"to", t.to}, {"weight", t.weight}});
    states.push_back({{"name", s.name},
                      {"role", llm::to_string(s.role)},
                      {"prompt", s.prompt},
                      {"produces_query", s.produces_query},
                      {"transitions", std::move(tr)}});
  }
  return {{"states", std::move(states)}, {"start", start}};
}

const StateConfig* GraphConfig::find(std::string_view name) const {
  auto it = std::find_if(states.begin(), states.end(), [&](const auto& s) { return s.name == name; });
  return it == states.end() ? nullptr : &*it;
}

std::size_t GraphConfig::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].name == name) return i;
  }
  throw GraphError("unknown state: " + std::string(name));
}

Handler handler_for(std::string_view n) noexcept {
  if (n == "greet") return Handler::greet;
  if (n == "collect_examples") return Handler::collect_examples;
  if (n == "confirm_examples") return Handler::confirm_examples;
  if (n == "collect_area") return Handler::collect_area;
  if (n == "confirm_query") return Handler::confirm_query;
  if (n == "execute_search") return Handler::execute_search;
  if (n == "present_results") return Handler::present_results;
  if (n == "refine") return Handler::refine;
  if (n == "error_recovery") return Handler::error_recovery;
  if (n == "stop") return Handler::stop;
  return Handler::generic;
}

bool is_automatic(Handler h) noexcept {
  return h == Handler::greet || h == Handler::confirm_query || h == Handler::execute_search;
}

bool extracts_examples(Handler h) noexcept {
  switch (h) {
    case Handler::collect_examples:
    case Handler::confirm_examples:
    case Handler::present_results:
    case Handler::refine:
    case Handler::error_recovery:
      return true;
    default:
      return false;
  }
}

bool extracts_area(Handler h) noexcept {
  switch (h) {
    case Handler::collect_area:
    case Handler::confirm_query:
    case Handler::present_results:
    case Handler::refine:
    case Handler::error_recovery:
      return true;
    default:
      return false;
  }
}

bool ChatState::allows(std::string_view target) const noexcept {
  return std::find(allowed_signals.begin(), allowed_signals.end(), target) != allowed_signals.end();
}

ChatGraph::ChatGraph(const GraphConfig& config) : start_(config.start) {
  for (const auto& s : config.states) {
    ChatState cs{s.name, s.prompt, handler_for(s.name), {}};
    for (const auto& t : s.transitions) cs.allowed_signals.push_back(t.to);
    states_.push_back(std::move(cs));
  }
  if (!has(kStopState)) throw GraphError("runtime graph needs a 'stop' state");
  if (!has(kErrorRecoveryState)) throw GraphError("runtime graph needs an 'error_recovery' state");
}

nlohmann::json ChatGraph::standard_config_json() { return nlohmann::json::parse(kStandardGraph); }

const ChatGraph& ChatGraph::standard() {
  static const ChatGraph graph(GraphConfig::from_json(standard_config_json()));
  return graph;
}

bool ChatGraph::has(std::string_view name) const noexcept {
  return std::any_of(states_.begin(), states_.end(), [&](const auto& s) { return s.name == name; });
}

const ChatState& ChatGraph::state(std::string_view name) const {
  auto it = std::find_if(states_.begin(), states_.end(), [&](const auto& s) { return s.name == name; });
  if (it == states_.end()) throw GraphError("unknown state: " + std::string(name));
  return *it;
}

}  // namespace seqgpt::dialogue
