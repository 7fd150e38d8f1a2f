#pragma once

#include <stdexcept>
#include <string>

namespace seqgpt {

/// Base for every error raised by the library. `code()` is a stable
/// machine-readable identifier (e.g. "UNKNOWN_PLACE") that the HTTP layer and
/// the CLI surface verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// A caller broke an operation's precondition.
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& message)
      : Error("CONTRACT_VIOLATION", message) {}
};

}  // namespace seqgpt
