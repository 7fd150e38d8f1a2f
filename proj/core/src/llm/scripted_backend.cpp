#include <fstream>

#include "seqgpt/llm/backends.hpp"
#include "seqgpt/llm/hints.hpp"

namespace seqgpt::llm {

ScriptedBackend::ScriptedBackend(std::vector<std::string> queue, Keyed keyed,
                                 std::optional<std::size_t> budget)
    : ChatBackend(budget), queue_(std::move(queue)), keyed_(std::move(keyed)) {
  for (const auto& [key, replies] : keyed_) {
    if (replies.empty()) throw ContractViolation("scripted key '" + key + "' has no replies");
  }
}

namespace {

std::string as_text(const nlohmann::json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path,
                                                            std::optional<std::size_t> budget) {
  std::ifstream in(path);
  if (!in) throw Error("IO_ERROR", "cannot open script: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("INVALID_SCRIPT", path.string() + ": " + e.what());
  }
  std::vector<std::string> queue;
  Keyed keyed;
  const nlohmann::json* replies = nullptr;
  if (doc.is_array()) {
    replies = &doc;
  } else if (doc.is_object()) {
    if (auto it = doc.find("replies"); it != doc.end()) replies = &*it;
    if (auto it = doc.find("keyed"); it != doc.end()) {
      if (!it->is_object()) throw Error("INVALID_SCRIPT", "\"keyed\" must be an object");
      for (const auto& [key, list] : it->items()) {
        if (!list.is_array()) throw Error("INVALID_SCRIPT", "keyed '" + key + "' must be an array");
        for (const auto& v : list) keyed[key].push_back(as_text(v));
      }
    }
  } else {
    throw Error("INVALID_SCRIPT", "script must be a JSON array or object");
  }
  if (replies) {
    if (!replies->is_array()) throw Error("INVALID_SCRIPT", "\"replies\" must be an array");
    for (const auto& v : *replies) queue.push_back(as_text(v));
  }
  return std::make_unique<ScriptedBackend>(std::move(queue), std::move(keyed), budget);
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  return queue_.size() - next_;
}

ChatBackend::Completion ScriptedBackend::do_complete(std::span<const ChatMessage> messages,
                                                     const Constraints&) {
  const Hints hints = hints_of(messages);
  std::lock_guard lock(mu_);
  if (!keyed_.empty()) {
    if (auto state = hints.get("state")) {
      std::string key = *state;
      const std::string request = hints.get_or("request", "chat");
      if (request == "query" || request == "signal") key += "#" + request;
      if (auto it = keyed_.find(key); it != keyed_.end()) {
        std::size_t pick = 0;
        if (auto variant = hints.get("variant")) {
          pick = static_cast<std::size_t>(std::stoull(*variant) % it->second.size());
        } else {
          pick = round_robin_[key]++ % it->second.size();
        }
        return {it->second[pick], std::nullopt};
      }
    }
  }
  if (next_ >= queue_.size()) throw ScriptExhausted();
  return {queue_[next_++], std::nullopt};
}

}  // namespace seqgpt::llm
