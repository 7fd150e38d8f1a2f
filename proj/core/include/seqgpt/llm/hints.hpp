#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seqgpt/llm/chat.hpp"

// Orchestrators pass structured context to backends as `@key: value` lines
// appended to the system message. Remote models see them as plain text; the
// rule and scripted backends parse them.
namespace seqgpt::llm {

struct Hints {
  std::string body;
  std::map<std::string, std::string> values;

  std::optional<std::string> get(std::string_view key) const;
  std::string get_or(std::string_view key, std::string fallback) const;
};

using HintList = std::vector<std::pair<std::string, std::string>>;

std::string compose_system_message(std::string_view body, const HintList& hints);
Hints parse_hints(std::string_view system_message);

/// Hints of the first system message, or empty hints.
Hints hints_of(std::span<const ChatMessage> messages);

/// Content of the last message with `role`, or empty.
std::string last_content(std::span<const ChatMessage> messages, Role role);

}  // namespace seqgpt::llm
