#include "seqgpt/llm/chat.hpp"

namespace seqgpt::llm {

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role role_from_string(std::string_view s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  throw ContractViolation("unknown chat role: " + std::string(s));
}

RemoteError::RemoteError(int status, std::string body_excerpt)
    : Error("REMOTE_ERROR", "remote backend failed (status " + std::to_string(status) +
                                "): " + body_excerpt),
      status_(status),
      body_(std::move(body_excerpt)) {}

ChatBackend::ChatBackend(std::optional<std::size_t> budget) : budget_(budget) {
  if (budget_ && *budget_ == 0) throw ContractViolation("budget must be at least 1");
}

ChatBackend::~ChatBackend() = default;

std::uint64_t estimate_tokens(std::size_t chars) noexcept { return (chars + 3) / 4; }

std::string ChatBackend::complete(std::span<const ChatMessage> messages,
                                  const Constraints& constraints) {
  if (messages.empty()) throw ContractViolation("complete needs at least one message");
  if (budget_) {
    std::lock_guard lock(budget_mu_);
    if (reserved_ >= *budget_) throw BudgetExhausted(*budget_);
    ++reserved_;
  }
  Completion c;
  try {
    c = do_complete(messages, constraints);
  } catch (...) {
    if (budget_) {
      std::lock_guard lock(budget_mu_);
      --reserved_;
    }
    throw;
  }
  requests_.fetch_add(1);
  if (c.reported_tokens) {
    tokens_.fetch_add(*c.reported_tokens);
  } else {
    std::size_t chars = c.text.size();
    for (const ChatMessage& m : messages) chars += m.content.size();
    tokens_.fetch_add(estimate_tokens(chars));
  }
  return std::move(c.text);
}

Usage ChatBackend::usage() const noexcept { return {requests_.load(), tokens_.load()}; }

}  // namespace seqgpt::llm
