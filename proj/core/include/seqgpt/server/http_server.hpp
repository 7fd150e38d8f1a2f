#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "seqgpt/dialogue/orchestrator.hpp"
#include "seqgpt/server/config.hpp"
#include "seqgpt/server/search_service.hpp"
#include "seqgpt/server/session_store.hpp"

namespace seqgpt::server {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// HTTP status for an error code; unknown codes map to 500.
int status_for(std::string_view code) noexcept;
nlohmann::json error_body(std::string_view code, std::string_view message);

struct ApiOptions {
  std::size_t default_k = match::kDefaultK;
  double default_eps_m = match::kDefaultEpsM;
  /// New session ids; defaults to 128 random bits in hex.
  std::function<std::string()> id_source;
  /// Transcript timestamps (ms); defaults to the system clock.
  std::function<std::int64_t()> clock;
};

/// Transport-independent request handling for every endpoint. Always
/// answers with a JSON body; failures use {"error":{"code","message"}}.
class Api {
 public:
  Api(std::shared_ptr<SearchService> search, dialogue::ChatGraph graph, llm::RegistrySpec backends,
      std::shared_ptr<SessionRepository> sessions, ApiOptions options = {});

  /// Loads dataset, gazetteer and graph named by the config.
  static std::shared_ptr<Api> from_config(const ServerConfig& config);

  ApiResponse handle(std::string_view method, std::string_view path,
                     const std::multimap<std::string, std::string>& params, std::string_view body) const;

  const SearchService& search() const noexcept { return *search_; }
  SessionRepository& sessions() const noexcept { return *sessions_; }

 private:
  ApiResponse create_session() const;
  ApiResponse post_message(const std::string& id, const nlohmann::json& body) const;
  ApiResponse rewind_session(const std::string& id, const nlohmann::json& body) const;
  ApiResponse get_session(const std::string& id) const;
  ApiResponse post_search(nlohmann::json body) const;
  ApiResponse get_pois(const std::multimap<std::string, std::string>& params) const;
  ApiResponse post_geocode(const nlohmann::json& body) const;
  ApiResponse get_backends() const;

  std::shared_ptr<SearchService> search_;
  dialogue::Dialogue dialogue_;
  llm::RegistrySpec backends_;
  std::shared_ptr<SessionRepository> sessions_;
  ApiOptions options_;
};

/// httplib front end for an Api.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<const Api> api);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `host:port` (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves on the bound socket until stop().
  void serve();
  /// serve() on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Loads the config, binds and serves until SIGINT/SIGTERM.
void run_server(const ServerConfig& config, std::ostream& log);

}  // namespace seqgpt::server
