#include "seqgpt/dialogue/orchestrator.hpp"

#include <chrono>

#include "seqgpt/dialogue/extract.hpp"
#include "seqgpt/llm/hints.hpp"
#include "seqgpt/match/wire.hpp"

namespace seqgpt::dialogue {

struct Dialogue::Chain {
  Session session;
  std::vector<std::string> replies;
  std::optional<std::vector<match::MatchResult>> results;
  bool protocol_error = false;
};

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

std::string circle_label(const geo::Circle& c) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.4f, %.4f (radius %.0f m)", c.center().lat(), c.center().lon(), c.radius_m());
  return buf;
}

}  // namespace

void clear_after(Session& s, std::string_view target) {
  const std::size_t t = s.first_visit_index(target);
  if (t == std::string::npos) return;
  auto later = [&](std::string_view owner) {
    const std::size_t i = s.first_visit_index(owner);
    return i != std::string::npos && i > t;
  };
  if (later("collect_examples")) s.draft.examples.clear();
  if (later("collect_area")) {
    s.draft.area.reset();
    s.draft.area_name.reset();
  }
  s.first_visits.resize(t + 1);
}

Dialogue::Dialogue(ChatGraph graph, const SearchContext* context, DialogueOptions options)
    : graph_(std::move(graph)), context_(context), options_(std::move(options)) {}

std::int64_t Dialogue::now() const {
  if (options_.clock) return options_.clock();
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

bool Dialogue::step(Chain& chain, const std::optional<std::string>& user_text,
                    const llm::BackendRegistry& backends) const {
  Session& s = chain.session;
  const ChatState& st = graph_.state(s.state);
  match::QueryDraft tentative = s.draft;
  std::optional<std::vector<match::MatchResult>> results;

  std::string allowed;
  for (const auto& a : st.allowed_signals) allowed += (allowed.empty() ? "" : ",") + a;
  llm::HintList hints{{"state", st.name}, {"allowed", allowed}, {"request", "chat"}};

  if (user_text) {
    if (extracts_examples(st.handler)) {
      const auto edits = extract_examples(*user_text);
      hints.emplace_back("edits", std::to_string(edits.size()));
      if (!edits.empty()) {
        match::QueryDraft merged = apply_edits(tentative, edits);
        try {
          if (context_) merged.examples = context_->resolve_examples(merged.examples);
          tentative = std::move(merged);
        } catch (const Error& e) {
          hints.emplace_back("error", e.what());
          hints.emplace_back("error_code", e.code());
        }
      }
    }
    if (extracts_area(st.handler)) {
      const AreaSpec area = extract_area(*user_text, st.handler == Handler::collect_area);
      if (area.circle) {
        tentative.area = area.circle;
        tentative.area_name.reset();
        hints.emplace_back("area_status", "ok");
        hints.emplace_back("area_label", circle_label(*area.circle));
      } else if (area.name && context_) {
        try {
          GeocodeResult g = context_->geocode(*area.name);
          tentative.area = g.circle;
          tentative.area_name = *area.name;
          hints.emplace_back("area_status", "ok");
          hints.emplace_back("area_label", g.label);
          if (g.note) hints.emplace_back("area_note", *g.note);
        } catch (const Error& e) {
          hints.emplace_back("area_status", "unknown");
          hints.emplace_back("area_label", *area.name);
          hints.emplace_back("error", e.what());
          hints.emplace_back("error_code", e.code());
        }
      } else if (area.name) {
        tentative.area.reset();
        tentative.area_name = *area.name;
        hints.emplace_back("area_status", "unresolved");
        hints.emplace_back("area_label", *area.name);
      } else {
        hints.emplace_back("area_status", "none");
      }
    }
  }

  if (st.handler == Handler::execute_search) {
    if (!context_) {
      hints.emplace_back("error", "no search engine is configured");
      hints.emplace_back("error_code", "INTERNAL");
    } else {
      try {
        results = context_->search(tentative);
        hints.emplace_back("results", std::to_string(results->size()));
      } catch (const Error& e) {
        hints.emplace_back("error", e.what());
        hints.emplace_back("error_code", e.code());
      }
    }
  }
  hints.emplace_back("draft", match::to_json(tentative).dump());

  std::vector<llm::ChatMessage> messages;
  messages.push_back({llm::Role::system, llm::compose_system_message(st.prompt, hints)});
  for (const auto& t : s.history) {
    if (t.role != llm::Role::system) messages.push_back({t.role, t.text});
  }
  const std::string raw = backends.for_state(st.name).complete(messages, options_.constraints);

  ParsedReply parsed;
  try {
    parsed = parse_signal(raw, st);
  } catch (const MissingSignal&) {
    chain.protocol_error = true;
  } catch (const IllegalTransition&) {
    chain.protocol_error = true;
  }
  if (chain.protocol_error) {
    chain.replies.emplace_back(kClarification);
    s.last_results.reset();
    s.enter(std::string(kErrorRecoveryState));
    return false;
  }

  s.draft = std::move(tentative);
  if (results) {
    s.last_results = results;
    chain.results = std::move(results);
  }
  chain.replies.push_back(parsed.visible_text);

  switch (parsed.token.kind) {
    case SignalKind::proceed:
      s.enter(parsed.token.target);
      break;
    case SignalKind::back:
      clear_after(s, parsed.token.target);
      s.last_results.reset();
      s.enter(parsed.token.target);
      break;
    case SignalKind::stop:
      s.enter(std::string(kStopState));
      break;
    case SignalKind::stay:
      break;
  }
  return true;
}

void Dialogue::run_automatic(Chain& chain, const llm::BackendRegistry& backends) const {
  std::size_t steps = 0;
  while (chain.session.state != kStopState && is_automatic(graph_.state(chain.session.state).handler)) {
    if (steps++ == options_.max_auto_steps) {
      chain.replies.emplace_back(kClarification);
      chain.protocol_error = true;
      chain.session.enter(std::string(kErrorRecoveryState));
      return;
    }
    if (!step(chain, std::nullopt, backends)) return;
  }
}

AdvanceResult Dialogue::start(std::string id, const llm::BackendRegistry& backends) const {
  Chain chain;
  chain.session.id = std::move(id);
  chain.session.draft.k = options_.default_k;
  chain.session.draft.eps_m = options_.default_eps_m;
  chain.session.enter(graph_.start());
  if (is_automatic(graph_.state(graph_.start()).handler)) {
    run_automatic(chain, backends);
  } else {
    chain.replies.push_back(graph_.state(graph_.start()).prompt);
  }
  std::string reply = join(chain.replies, "\n\n");
  if (!reply.empty()) chain.session.history.push_back({llm::Role::assistant, reply, now()});
  return {std::move(reply), std::move(chain.session), std::move(chain.results), chain.protocol_error};
}

AdvanceResult Dialogue::advance(const Session& session, std::string_view user_text,
                                const llm::BackendRegistry& backends) const {
  if (session.state == kStopState) throw SessionClosed(session.id);
  Chain chain{session, {}, {}, false};
  chain.session.history.push_back({llm::Role::user, std::string(user_text), now()});
  if (step(chain, std::string(user_text), backends)) run_automatic(chain, backends);
  std::string reply = join(chain.replies, "\n\n");
  chain.session.history.push_back({llm::Role::assistant, reply, now()});
  return {std::move(reply), std::move(chain.session), std::move(chain.results), chain.protocol_error};
}

}  // namespace seqgpt::dialogue
