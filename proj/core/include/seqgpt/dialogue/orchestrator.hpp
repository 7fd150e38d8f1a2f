#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqgpt/dialogue/session.hpp"
#include "seqgpt/dialogue/signal.hpp"
#include "seqgpt/dialogue/state_graph.hpp"
#include "seqgpt/llm/backends.hpp"

namespace seqgpt::dialogue {

class SessionClosed : public Error {
 public:
  explicit SessionClosed(const std::string& id) : Error("SESSION_CLOSED", "session " + id + " has ended") {}
};

struct GeocodeResult {
  geo::Circle circle;
  std::string label;                // e.g. "central Sydney"
  std::optional<std::string> note;  // e.g. an ignored qualifier
};

/// What the dialogue needs from the search side. Implementations throw
/// seqgpt::Error subclasses (UnknownPlace, UnknownArea, ...); the dialogue
/// turns those into clarification prompts.
class SearchContext {
 public:
  virtual ~SearchContext() = default;

  virtual std::vector<match::DraftExample> resolve_examples(
      const std::vector<match::DraftExample>& examples) const = 0;
  virtual GeocodeResult geocode(std::string_view name) const = 0;
  virtual std::vector<match::MatchResult> search(const match::QueryDraft& draft) const = 0;
};

struct DialogueOptions {
  /// Milliseconds since the epoch; defaults to the system clock.
  std::function<std::int64_t()> clock;
  /// Bound on states entered automatically within one advance.
  std::size_t max_auto_steps = 8;
  llm::Constraints constraints;
  /// k and eps of a new session's draft.
  std::size_t default_k = match::kDefaultK;
  double default_eps_m = match::kDefaultEpsM;
};

struct AdvanceResult {
  std::string reply;  // visible text, tokens stripped
  Session session;
  /// Set when this advance ran a search.
  std::optional<std::vector<match::MatchResult>> results;
  /// The backend produced a missing/illegal token and the session moved to
  /// error_recovery.
  bool protocol_error = false;
};

inline constexpr std::string_view kClarification =
    "Sorry, I didn't quite get that. Could you rephrase or tell me what you'd like to change?";

/// Runtime orchestration over a ChatGraph. advance() is transactional: on a
/// backend exception (budget, transport, exhausted script) the caller's
/// session is untouched and the exception propagates.
class Dialogue {
 public:
  explicit Dialogue(ChatGraph graph = ChatGraph::standard(), const SearchContext* context = nullptr,
                    DialogueOptions options = {});

  /// New session in the graph's start state; automatic states run at once.
  AdvanceResult start(std::string id, const llm::BackendRegistry& backends) const;

  /// One user turn. Throws SessionClosed in the stop state.
  AdvanceResult advance(const Session& session, std::string_view user_text,
                        const llm::BackendRegistry& backends) const;

  const ChatGraph& graph() const noexcept { return graph_; }

 private:
  struct Chain;
  bool step(Chain& chain, const std::optional<std::string>& user_text,
            const llm::BackendRegistry& backends) const;
  void run_automatic(Chain& chain, const llm::BackendRegistry& backends) const;
  std::int64_t now() const;

  ChatGraph graph_;
  const SearchContext* context_;
  DialogueOptions options_;
};

/// Clears draft fields collected after `target` was first entered (examples
/// belong to collect_examples, the area to collect_area) and forgets the
/// first-visit records that follow it. Used for back tokens.
void clear_after(Session& session, std::string_view target);

}  // namespace seqgpt::dialogue
