#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "seqgpt/llm/backends.hpp"
#include "seqgpt/match/query.hpp"

namespace seqgpt::server {

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error("INVALID_CONFIG", m) {}
};

/// Server configuration file:
/// {
///   "listen": "127.0.0.1:8080",
///   "dataset": "pois.csv", "gazetteer": "gazetteer.csv", "graph": "dialogue_graph.json",
///   "backends": {"default": "rule", "backends": {"rule": {"kind": "rule"}}, "states": {}},
///   "cache_capacity": 256, "default_k": 10, "default_eps_m": 500,
///   "session_ttl_s": 3600, "cell_m": 500
/// }
/// Relative paths resolve against the config file's directory; "graph" is
/// optional (the built-in runtime graph is used without it).
struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path dataset;
  std::filesystem::path gazetteer;
  std::optional<std::filesystem::path> graph;
  llm::RegistrySpec backends;
  std::size_t cache_capacity = 256;
  std::size_t default_k = match::kDefaultK;
  double default_eps_m = match::kDefaultEpsM;
  double session_ttl_s = 3600.0;
  double cell_m = 500.0;

  /// Fails fast: unknown keys, bad values and unreadable files all throw
  /// ConfigError.
  static ServerConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ServerConfig load(const std::filesystem::path& path);
};

}  // namespace seqgpt::server
