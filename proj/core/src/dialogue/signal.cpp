#include "seqgpt/dialogue/signal.hpp"

#include <regex>

#include "seqgpt/text.hpp"

namespace seqgpt::dialogue {

IllegalTransition::IllegalTransition(std::string from, std::string to)
    : Error("ILLEGAL_TRANSITION", "illegal transition " + from + " -> " + to),
      from_(std::move(from)),
      to_(std::move(to)) {}

ParsedReply split_signal(std::string_view reply) {
  static const std::regex token(R"(<SIG:(?:(proceed|back):([A-Za-z0-9_\-]+)|(stay)|(stop))>\s*$)");
  const std::size_t pos = reply.rfind(kSignalPrefix);
  if (pos == std::string_view::npos) throw MissingSignal("reply carries no signal token");
  const std::string tail(reply.substr(pos));
  std::smatch m;
  if (!std::regex_match(tail, m, token)) {
    throw MissingSignal("reply does not end with a well-formed signal token");
  }
  ParsedReply out;
  std::string visible(reply.substr(0, pos));
  if (visible.find(kSignalPrefix) != std::string::npos) {
    throw MissingSignal("reply carries more than one signal token");
  }
  while (!visible.empty() && std::isspace(static_cast<unsigned char>(visible.back()))) {
    visible.pop_back();
  }
  out.visible_text = std::move(visible);
  if (m[1].matched) {
    out.token.kind = m[1] == "proceed" ? SignalKind::proceed : SignalKind::back;
    out.token.target = m[2].str();
  } else if (m[3].matched) {
    out.token.kind = SignalKind::stay;
  } else {
    out.token.kind = SignalKind::stop;
    out.token.target = std::string(kStopState);
  }
  return out;
}

ParsedReply parse_signal(std::string_view reply, const ChatState& current) {
  ParsedReply parsed = split_signal(reply);
  if (parsed.token.kind != SignalKind::stay && !current.allows(parsed.token.target)) {
    throw IllegalTransition(current.name, parsed.token.target);
  }
  return parsed;
}

std::string format_signal(const SignalToken& t) {
  switch (t.kind) {
    case SignalKind::proceed: return "<SIG:proceed:" + t.target + ">";
    case SignalKind::back: return "<SIG:back:" + t.target + ">";
    case SignalKind::stay: return "<SIG:stay>";
    case SignalKind::stop: return "<SIG:stop>";
  }
  return "<SIG:stay>";
}

SignalToken proceed_to(std::string target) { return {SignalKind::proceed, std::move(target)}; }
SignalToken back_to(std::string target) { return {SignalKind::back, std::move(target)}; }
SignalToken stay() { return {SignalKind::stay, {}}; }
SignalToken stop() { return {SignalKind::stop, std::string(kStopState)}; }

}  // namespace seqgpt::dialogue
