#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqgpt/llm/chat.hpp"

namespace seqgpt::dialogue {

class GraphError : public Error {
 public:
  explicit GraphError(const std::string& m) : Error("INVALID_GRAPH", m) {}
};

// State graph config file, shared by the runtime dialogue and synthesis:
// {"states":[{"name","role","prompt","produces_query","transitions":[{"to","weight"}]}],"start"}

struct Transition {
  std::string to;
  double weight = 1.0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct StateConfig {
  std::string name;
  llm::Role role = llm::Role::assistant;
  std::string prompt;
  bool produces_query = false;
  std::vector<Transition> transitions;

  friend bool operator==(const StateConfig&, const StateConfig&) = default;
};

/// Structurally checked graph: unique names, known roles, defined targets,
/// finite non-negative weights, defined start state.
struct GraphConfig {
  std::vector<StateConfig> states;
  std::string start;

  static GraphConfig from_json(const nlohmann::json& j);
  static GraphConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const StateConfig* find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws GraphError

  friend bool operator==(const GraphConfig&, const GraphConfig&) = default;
};

inline constexpr std::string_view kStopState = "stop";
inline constexpr std::string_view kErrorRecoveryState = "error_recovery";

/// What a runtime state does with a turn. Known state names bind to their
/// handler; states added by a custom graph fall back to `generic`, which
/// extracts nothing and relies on the backend's signal.
enum class Handler {
  greet,
  collect_examples,
  confirm_examples,
  collect_area,
  confirm_query,
  execute_search,
  present_results,
  refine,
  error_recovery,
  stop,
  generic,
};

Handler handler_for(std::string_view state_name) noexcept;

/// Runs without waiting for user input (on entry).
bool is_automatic(Handler h) noexcept;
bool extracts_examples(Handler h) noexcept;
bool extracts_area(Handler h) noexcept;

struct ChatState {
  std::string name;
  std::string prompt;
  Handler handler = Handler::generic;
  std::vector<std::string> allowed_signals;

  bool allows(std::string_view target) const noexcept;
};

/// Runtime view of a graph; requires `stop` and `error_recovery` states.
class ChatGraph {
 public:
  explicit ChatGraph(const GraphConfig& config);

  /// The built-in ten-state runtime graph.
  static const ChatGraph& standard();
  static nlohmann::json standard_config_json();

  bool has(std::string_view name) const noexcept;
  const ChatState& state(std::string_view name) const;
  const std::string& start() const noexcept { return start_; }
  const std::vector<ChatState>& states() const noexcept { return states_; }

 private:
  std::vector<ChatState> states_;
  std::string start_;
};

}  // namespace seqgpt::dialogue
