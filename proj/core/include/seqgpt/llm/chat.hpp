#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqgpt/error.hpp"

namespace seqgpt::llm {

enum class Role { system, user, assistant };

std::string_view to_string(Role role) noexcept;
/// Throws ContractViolation for anything but "system", "user", "assistant".
Role role_from_string(std::string_view s);

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct Constraints {
  int max_tokens = 512;
  double temperature = 0.0;
  std::vector<std::string> stop_sequences;
};

struct Usage {
  std::uint64_t requests = 0;
  std::uint64_t estimated_tokens = 0;

  friend bool operator==(const Usage&, const Usage&) = default;
};

class BudgetExhausted : public Error {
 public:
  explicit BudgetExhausted(std::size_t budget)
      : Error("BUDGET_EXHAUSTED",
              "request budget of " + std::to_string(budget) + " calls is exhausted") {}
};

class ScriptExhausted : public Error {
 public:
  ScriptExhausted() : Error("SCRIPT_EXHAUSTED", "scripted backend has no replies left") {}
};

class RemoteError : public Error {
 public:
  RemoteError(int status, std::string body_excerpt);
  int status() const noexcept { return status_; }
  const std::string& body_excerpt() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

/// Chat-completion backend. Public calls go through `complete`, which
/// enforces the optional request budget and keeps usage counters; concrete
/// backends implement `do_complete`.
class ChatBackend {
 public:
  explicit ChatBackend(std::optional<std::size_t> budget = std::nullopt);
  virtual ~ChatBackend();

  ChatBackend(const ChatBackend&) = delete;
  ChatBackend& operator=(const ChatBackend&) = delete;

  std::string complete(std::span<const ChatMessage> messages, const Constraints& constraints = {});

  Usage usage() const noexcept;
  std::optional<std::size_t> budget() const noexcept { return budget_; }

  virtual std::string_view kind() const noexcept = 0;

 protected:
  struct Completion {
    std::string text;
    std::optional<std::uint64_t> reported_tokens;
  };

 private:
  virtual Completion do_complete(std::span<const ChatMessage> messages,
                                 const Constraints& constraints) = 0;

  std::optional<std::size_t> budget_;
  std::mutex budget_mu_;
  std::size_t reserved_ = 0;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> tokens_{0};
};

/// ceil(chars / 4): the fallback when a backend reports no usage.
std::uint64_t estimate_tokens(std::size_t chars) noexcept;

}  // namespace seqgpt::llm
