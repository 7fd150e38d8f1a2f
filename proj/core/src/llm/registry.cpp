#include <set>

#include "seqgpt/llm/backends.hpp"

namespace seqgpt::llm {

namespace {

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error("INVALID_CONFIG", m) {}
};

}  // namespace

void BackendConfig::validate() const {
  if (kind == BackendKind::remote && (!endpoint || endpoint->empty() || !model_name ||
                                      model_name->empty())) {
    throw ConfigError("remote backend requires endpoint and model_name");
  }
  if (kind == BackendKind::scripted && !script) {
    throw ConfigError("scripted backend requires a script path");
  }
  if (budget && *budget < 1) throw ConfigError("budget must be >= 1");
  if (!(timeout_s > 0.0)) throw ConfigError("timeout_s must be positive");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
}

BackendConfig backend_config_from_json(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("backend config must be an object");
  BackendConfig c;
  try {
    const std::string kind = j.value("kind", "rule");
    if (kind == "rule") {
      c.kind = BackendKind::rule;
    } else if (kind == "scripted") {
      c.kind = BackendKind::scripted;
    } else if (kind == "remote") {
      c.kind = BackendKind::remote;
    } else {
      throw ConfigError("unknown backend kind: " + kind);
    }
    if (j.contains("endpoint")) c.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("model_name")) c.model_name = j.at("model_name").get<std::string>();
    c.timeout_s = j.value("timeout_s", 30.0);
    c.max_retries = j.value("max_retries", 2);
    if (j.contains("budget") && !j.at("budget").is_null()) {
      const long long b = j.at("budget").get<long long>();
      if (b < 1) throw ConfigError("budget must be >= 1");
      c.budget = static_cast<std::size_t>(b);
    }
    if (j.contains("script")) {
      std::filesystem::path p = j.at("script").get<std::string>();
      c.script = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("backend config: ") + e.what());
  }
  c.validate();
  return c;
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config) {
  config.validate();
  switch (config.kind) {
    case BackendKind::rule:
      return std::make_unique<RuleBackend>(config.budget);
    case BackendKind::scripted:
      return ScriptedBackend::from_file(*config.script, config.budget);
    case BackendKind::remote:
      return std::make_unique<RemoteBackend>(RemoteOptions{*config.endpoint, *config.model_name,
                                                           config.timeout_s, config.max_retries,
                                                           config.budget, std::nullopt});
  }
  throw ContractViolation("unknown backend kind");
}

void BackendRegistry::add(const std::string& id, std::shared_ptr<ChatBackend> backend) {
  if (!backend) throw ContractViolation("null backend for id " + id);
  backends_[id] = std::move(backend);
  if (default_id_.empty()) default_id_ = id;
}

void BackendRegistry::bind(const std::string& state, const std::string& id) {
  if (!backends_.contains(id)) throw ContractViolation("unknown backend id: " + id);
  bindings_[state] = id;
}

void BackendRegistry::set_default(const std::string& id) {
  if (!backends_.contains(id)) throw ContractViolation("unknown backend id: " + id);
  default_id_ = id;
}

ChatBackend& BackendRegistry::for_state(std::string_view state) const {
  auto it = bindings_.find(state);
  return get(it == bindings_.end() ? std::string_view(default_id_) : std::string_view(it->second));
}

ChatBackend& BackendRegistry::get(std::string_view id) const {
  auto it = backends_.find(id);
  if (it == backends_.end()) throw ContractViolation("unknown backend id: " + std::string(id));
  return *it->second;
}

std::vector<std::string> BackendRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& kv : backends_) out.push_back(kv.first);
  return out;
}

Usage BackendRegistry::total_usage() const {
  Usage total;
  for (const auto& kv : backends_) {
    const Usage u = kv.second->usage();
    total.requests += u.requests;
    total.estimated_tokens += u.estimated_tokens;
  }
  return total;
}

RegistrySpec RegistrySpec::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("backend registry must be an object");
  RegistrySpec spec;
  if (auto it = j.find("backends"); it != j.end()) {
    if (!it->is_object() || it->empty()) throw ConfigError("\"backends\" must be a non-empty object");
    spec.backends.clear();
    for (const auto& [id, cfg] : it->items()) spec.backends[id] = backend_config_from_json(cfg, base_dir);
  }
  spec.default_id = j.value("default", spec.backends.begin()->first);
  if (!spec.backends.contains(spec.default_id)) {
    throw ConfigError("default backend '" + spec.default_id + "' is not defined");
  }
  if (auto it = j.find("states"); it != j.end()) {
    if (!it->is_object()) throw ConfigError("\"states\" must be an object");
    for (const auto& [state, id] : it->items()) {
      if (!id.is_string() || !spec.backends.contains(id.get<std::string>())) {
        throw ConfigError("state '" + state + "' is bound to an undefined backend");
      }
      spec.bindings[state] = id.get<std::string>();
    }
  }
  return spec;
}

BackendRegistry RegistrySpec::instantiate() const {
  BackendRegistry reg;
  for (const auto& [id, cfg] : backends) reg.add(id, make_backend(cfg));
  reg.set_default(default_id);
  for (const auto& [state, id] : bindings) reg.bind(state, id);
  return reg;
}

BackendConfig parse_backend_flag(const std::string& flag) {
  BackendConfig c;
  if (flag == "rule") return c;
  if (flag.rfind("scripted:", 0) == 0 && flag.size() > 9) {
    c.kind = BackendKind::scripted;
    c.script = flag.substr(9);
    return c;
  }
  if (flag == "remote") {
    c.kind = BackendKind::remote;
    return c;
  }
  throw ConfigError("unknown backend '" + flag + "' (expected rule, scripted:PATH or remote)");
}

}  // namespace seqgpt::llm
