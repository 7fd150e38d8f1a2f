#include "seqgpt/server/config.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <set>

namespace seqgpt::server {

namespace {

std::filesystem::path resolve_path(const nlohmann::json& v, const std::filesystem::path& base, const char* key) {
  if (!v.is_string() || v.get<std::string>().empty()) {
    throw ConfigError(std::string("\"") + key + "\" must be a non-empty path");
  }
  std::filesystem::path p(v.get<std::string>());
  if (p.is_relative() && !base.empty()) p = base / p;
  std::ifstream probe(p);
  if (!probe) throw ConfigError(std::string("\"") + key + "\" is not readable: " + p.string());
  return p;
}

double positive(const nlohmann::json& j, const char* key) {
  if (!j.is_number() || !std::isfinite(j.get<double>()) || j.get<double>() <= 0.0) {
    throw ConfigError(std::string("\"") + key + "\" must be a positive number");
  }
  return j.get<double>();
}

std::size_t count(const nlohmann::json& j, const char* key) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 1) {
    throw ConfigError(std::string("\"") + key + "\" must be an integer >= 1");
  }
  return j.get<std::size_t>();
}

}  // namespace

ServerConfig ServerConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw ConfigError("server config must be a JSON object");
  static const std::set<std::string> known = {"listen",        "dataset",     "gazetteer",     "graph",
                                              "backends",      "cache_capacity", "default_k", "default_eps_m",
                                              "session_ttl_s", "cell_m"};
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw ConfigError("unknown config key: " + k);
  }
  ServerConfig c;
  if (auto it = j.find("listen"); it != j.end()) {
    static const std::regex re(R"(^([^:\s]+):(\d{1,5})$)");
    std::smatch m;
    const std::string s = it->is_string() ? it->get<std::string>() : "";
    if (!std::regex_match(s, m, re) || std::stoi(m[2].str()) > 65535) {
      throw ConfigError("\"listen\" must look like host:port");
    }
    c.host = m[1].str();
    c.port = std::stoi(m[2].str());
  }
  if (!j.contains("dataset")) throw ConfigError("missing \"dataset\"");
  if (!j.contains("gazetteer")) throw ConfigError("missing \"gazetteer\"");
  c.dataset = resolve_path(j["dataset"], base, "dataset");
  c.gazetteer = resolve_path(j["gazetteer"], base, "gazetteer");
  if (auto it = j.find("graph"); it != j.end() && !it->is_null()) c.graph = resolve_path(*it, base, "graph");
  if (auto it = j.find("backends"); it != j.end()) {
    try {
      c.backends = llm::RegistrySpec::from_json(*it, base);
    } catch (const Error& e) {
      throw ConfigError(std::string("backends: ") + e.what());
    }
    for (const auto& [id, bc] : c.backends.backends) {
      if (bc.script) {
        std::ifstream probe(*bc.script);
        if (!probe) throw ConfigError("backend " + id + ": script is not readable: " + bc.script->string());
      }
    }
  }
  if (auto it = j.find("cache_capacity"); it != j.end()) c.cache_capacity = count(*it, "cache_capacity");
  if (auto it = j.find("default_k"); it != j.end()) c.default_k = count(*it, "default_k");
  if (auto it = j.find("default_eps_m"); it != j.end()) c.default_eps_m = positive(*it, "default_eps_m");
  if (auto it = j.find("session_ttl_s"); it != j.end()) c.session_ttl_s = positive(*it, "session_ttl_s");
  if (auto it = j.find("cell_m"); it != j.end()) c.cell_m = positive(*it, "cell_m");
  return c;
}

ServerConfig ServerConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  const nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
  return from_json(j, path.parent_path());
}

}  // namespace seqgpt::server
