#include <cstdlib>
#include <regex>

#include <httplib.h>

#include "seqgpt/llm/backends.hpp"

namespace seqgpt::llm {

namespace {

constexpr std::size_t kExcerpt = 200;

std::string excerpt(const std::string& body) {
  return body.size() <= kExcerpt ? body : body.substr(0, kExcerpt) + "...";
}

}  // namespace

RemoteBackend::RemoteBackend(RemoteOptions options)
    : ChatBackend(options.budget), options_(std::move(options)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(options_.endpoint, m, url)) {
    throw ContractViolation("remote endpoint must be an http(s) URL: " + options_.endpoint);
  }
  if (options_.model_name.empty()) throw ContractViolation("remote backend needs a model name");
  origin_ = m[1].str();
  path_ = m[2].str();
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  path_ += "/chat/completions";
  if (!options_.api_key) {
    if (const char* key = std::getenv("SEQ_GPT_API_KEY")) options_.api_key = key;
  }
}

RemoteBackend::~RemoteBackend() = default;

nlohmann::json RemoteBackend::request_body(const std::string& model,
                                           std::span<const ChatMessage> messages,
                                           const Constraints& constraints) {
  nlohmann::json msgs = nlohmann::json::array();
  for (const ChatMessage& m : messages) {
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return {{"model", model},
          {"messages", std::move(msgs)},
          {"max_tokens", constraints.max_tokens},
          {"temperature", constraints.temperature},
          {"stop", constraints.stop_sequences}};
}

ChatBackend::Completion RemoteBackend::do_complete(std::span<const ChatMessage> messages,
                                                   const Constraints& constraints) {
  const std::string body = request_body(options_.model_name, messages, constraints).dump();
  httplib::Client client(origin_);
  const auto secs = static_cast<time_t>(options_.timeout_s);
  const auto usecs = static_cast<time_t>((options_.timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (options_.api_key && !options_.api_key->empty()) {
    headers.emplace("Authorization", "Bearer " + *options_.api_key);
  }

  std::string transport_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    attempts_.fetch_add(1);
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      transport_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) throw RemoteError(res->status, excerpt(res->body));
    nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded()) throw RemoteError(res->status, "invalid JSON: " + excerpt(res->body));
    try {
      Completion c;
      c.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
      if (auto u = doc.find("usage"); u != doc.end() && u->is_object()) {
        if (u->contains("total_tokens")) {
          c.reported_tokens = u->at("total_tokens").get<std::uint64_t>();
        } else if (u->contains("prompt_tokens") || u->contains("completion_tokens")) {
          c.reported_tokens = u->value("prompt_tokens", std::uint64_t{0}) +
                              u->value("completion_tokens", std::uint64_t{0});
        }
      }
      return c;
    } catch (const nlohmann::json::exception&) {
      throw RemoteError(res->status, "unexpected response shape: " + excerpt(res->body));
    }
  }
  throw RemoteError(0, "transport failure after " + std::to_string(options_.max_retries + 1) +
                           " attempts: " + transport_error);
}

}  // namespace seqgpt::llm
