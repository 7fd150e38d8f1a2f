#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqgpt/llm/chat.hpp"

namespace seqgpt::llm {

/// Replays fixture replies. Keyed replies are looked up by the `@state`
/// hint (suffixed `#query` or `#signal` for those request kinds) and picked
/// by `@variant` modulo their count, or round-robin without one; keyed
/// entries never run out. Otherwise the FIFO queue is consumed, and an empty
/// queue raises ScriptExhausted.
class ScriptedBackend final : public ChatBackend {
 public:
  using Keyed = std::map<std::string, std::vector<std::string>>;

  explicit ScriptedBackend(std::vector<std::string> queue, Keyed keyed = {},
                           std::optional<std::size_t> budget = std::nullopt);

  /// File forms: a JSON array (queue), or an object with optional
  /// "replies" (queue) and "keyed" (map of arrays). Non-string entries are
  /// stored as their compact JSON text.
  static std::unique_ptr<ScriptedBackend> from_file(const std::filesystem::path& path,
                                                    std::optional<std::size_t> budget = {});

  std::size_t remaining() const;
  std::string_view kind() const noexcept override { return "scripted"; }

 private:
  Completion do_complete(std::span<const ChatMessage> messages, const Constraints&) override;

  mutable std::mutex mu_;
  std::vector<std::string> queue_;
  std::size_t next_ = 0;
  Keyed keyed_;
  std::map<std::string, std::size_t> round_robin_;
};

/// Network-free deterministic backend. It reads the orchestrator's hint
/// lines, runs the dialogue extractors on the latest turn, and answers with
/// template text that always ends in a valid signal token. It also serves
/// as a template generator for synthesis ("@request: text" / "query") and
/// as a most-likely-transition baseline for "@request: signal".
class RuleBackend final : public ChatBackend {
 public:
  explicit RuleBackend(std::optional<std::size_t> budget = std::nullopt) : ChatBackend(budget) {}
  std::string_view kind() const noexcept override { return "rule"; }

 private:
  Completion do_complete(std::span<const ChatMessage> messages, const Constraints&) override;
};

struct RemoteOptions {
  std::string endpoint;  // e.g. "https://api.openai.com/v1"
  std::string model_name;
  double timeout_s = 30.0;
  int max_retries = 2;
  std::optional<std::size_t> budget;
  /// Defaults to the SEQ_GPT_API_KEY environment variable.
  std::optional<std::string> api_key;
};

/// One OpenAI-compatible POST {endpoint}/chat/completions per call, retried
/// on transport failures.
class RemoteBackend final : public ChatBackend {
 public:
  explicit RemoteBackend(RemoteOptions options);
  ~RemoteBackend() override;

  std::string_view kind() const noexcept override { return "remote"; }
  std::uint64_t attempts() const noexcept { return attempts_.load(); }

  static nlohmann::json request_body(const std::string& model, std::span<const ChatMessage> messages,
                                     const Constraints& constraints);

 private:
  Completion do_complete(std::span<const ChatMessage> messages, const Constraints&) override;

  RemoteOptions options_;
  std::string origin_;
  std::string path_;
  std::atomic<std::uint64_t> attempts_{0};
};

enum class BackendKind { rule, scripted, remote };

struct BackendConfig {
  BackendKind kind = BackendKind::rule;
  std::optional<std::string> endpoint;
  std::optional<std::string> model_name;
  double timeout_s = 30.0;
  int max_retries = 2;
  std::optional<std::size_t> budget;
  std::optional<std::filesystem::path> script;  // scripted only

  void validate() const;
};

/// Parses {"kind", "endpoint", "model_name", "timeout_s", "max_retries",
/// "budget", "script"}; relative script paths resolve against `base_dir`.
BackendConfig backend_config_from_json(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir = {});

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config);

/// Maps dialogue states to backends; unbound states use the default.
class BackendRegistry {
 public:
  void add(const std::string& id, std::shared_ptr<ChatBackend> backend);
  void bind(const std::string& state, const std::string& id);
  void set_default(const std::string& id);

  ChatBackend& for_state(std::string_view state) const;
  ChatBackend& get(std::string_view id) const;
  std::vector<std::string> ids() const;
  Usage total_usage() const;

 private:
  std::map<std::string, std::shared_ptr<ChatBackend>, std::less<>> backends_;
  std::map<std::string, std::string, std::less<>> bindings_;
  std::string default_id_;
};

/// Declarative registry: {"default": id, "backends": {id: config},
/// "states": {state: id}}. `instantiate` builds fresh backends, so budgets
/// and scripted queues are per instance (one per chat session).
struct RegistrySpec {
  std::string default_id = "rule";
  std::map<std::string, BackendConfig> backends{{"rule", BackendConfig{}}};
  std::map<std::string, std::string> bindings;

  static RegistrySpec from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  BackendRegistry instantiate() const;
};

/// CLI shorthand: "rule", "scripted:PATH", or "remote" (endpoint/model given
/// separately).
BackendConfig parse_backend_flag(const std::string& flag);

}  // namespace seqgpt::llm
