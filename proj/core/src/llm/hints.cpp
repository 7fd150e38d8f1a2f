#include "seqgpt/llm/hints.hpp"

#include "seqgpt/text.hpp"

namespace seqgpt::llm {

std::optional<std::string> Hints::get(std::string_view key) const {
  auto it = values.find(std::string(key));
  if (it == values.end()) return std::nullopt;
  return it->second;
}

std::string Hints::get_or(std::string_view key, std::string fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

std::string compose_system_message(std::string_view body, const HintList& hints) {
  std::string out(body);
  for (const auto& [k, v] : hints) {
    if (!out.empty()) out += '\n';
    out += '@';
    out += k;
    out += ": ";
    for (char c : v) out += (c == '\n' ? ' ' : c);
  }
  return out;
}

Hints parse_hints(std::string_view msg) {
  Hints h;
  std::size_t pos = 0;
  while (pos <= msg.size()) {
    std::size_t eol = msg.find('\n', pos);
    if (eol == std::string_view::npos) eol = msg.size();
    std::string_view line = msg.substr(pos, eol - pos);
    std::size_t colon = line.find(": ");
    if (line.size() > 1 && line.front() == '@' && colon != std::string_view::npos) {
      h.values[std::string(line.substr(1, colon - 1))] = std::string(line.substr(colon + 2));
    } else {
      if (!h.body.empty()) h.body += '\n';
      h.body += line;
    }
    pos = eol + 1;
  }
  return h;
}

Hints hints_of(std::span<const ChatMessage> messages) {
  for (const ChatMessage& m : messages) {
    if (m.role == Role::system) return parse_hints(m.content);
  }
  return {};
}

std::string last_content(std::span<const ChatMessage> messages, Role role) {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == role) return it->content;
  }
  return {};
}

}  // namespace seqgpt::llm
