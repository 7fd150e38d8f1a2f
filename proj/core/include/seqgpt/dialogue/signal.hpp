#pragma once

#include <string>
#include <string_view>

#include "seqgpt/dialogue/state_graph.hpp"

namespace seqgpt::dialogue {

enum class SignalKind { proceed, back, stay, stop };

/// Trailing control token of a backend reply:
///   <SIG:proceed:NAME>  <SIG:back:NAME>  <SIG:stay>  <SIG:stop>
struct SignalToken {
  SignalKind kind = SignalKind::stay;
  std::string target;  // proceed/back: state name; stop: "stop"; stay: empty

  friend bool operator==(const SignalToken&, const SignalToken&) = default;
};

inline constexpr std::string_view kSignalPrefix = "<SIG:";

class MissingSignal : public Error {
 public:
  explicit MissingSignal(const std::string& detail) : Error("MISSING_SIGNAL", detail) {}
};

class IllegalTransition : public Error {
 public:
  IllegalTransition(std::string from, std::string to);
  const std::string& from() const noexcept { return from_; }
  const std::string& to() const noexcept { return to_; }

 private:
  std::string from_;
  std::string to_;
};

struct ParsedReply {
  std::string visible_text;
  SignalToken token;
};

/// Grammar check only. Throws MissingSignal when the reply does not end in
/// exactly one well-formed token.
ParsedReply split_signal(std::string_view reply);

/// split_signal plus a legality check against `current.allowed_signals`.
ParsedReply parse_signal(std::string_view reply, const ChatState& current);

std::string format_signal(const SignalToken& token);
SignalToken proceed_to(std::string target);
SignalToken back_to(std::string target);
SignalToken stay();
SignalToken stop();

}  // namespace seqgpt::dialogue
