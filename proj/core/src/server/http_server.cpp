#include "seqgpt/server/http_server.hpp"

#include <atomic>
#include <csignal>
#include <iomanip>
#include <ostream>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "seqgpt/geo/ingest.hpp"
#include "seqgpt/match/resolve.hpp"
#include "seqgpt/match/wire.hpp"

namespace seqgpt::server {

using nlohmann::json;

namespace {

class BadRequest : public Error {
 public:
  explicit BadRequest(const std::string& m) : Error("BAD_REQUEST", m) {}
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& m) : Error("NOT_FOUND", m) {}
};

json parse_body(std::string_view body) {
  json j = json::parse(body.begin(), body.end(), nullptr, false);
  if (j.is_discarded()) throw BadRequest("request body is not valid JSON");
  if (!j.is_object()) throw BadRequest("request body must be a JSON object");
  return j;
}

std::string string_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw BadRequest(std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

double number_param(const std::multimap<std::string, std::string>& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) throw BadRequest("missing query parameter " + key);
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size() || !std::isfinite(v)) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw BadRequest("query parameter " + key + " must be a number");
  }
}

std::string random_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  std::ostringstream out;
  out << std::hex << std::setfill('0') << std::setw(16) << rng() << std::setw(16) << rng();
  return out.str();
}

ApiResponse failure(const Error& e) {
  ApiResponse r{status_for(e.code()), error_body(e.code(), e.what())};
  if (const auto* amb = dynamic_cast<const match::AmbiguousPlace*>(&e)) {
    json c = json::array();
    for (const auto& p : amb->candidates()) c.push_back(match::to_json(p));
    r.body["error"]["candidates"] = std::move(c);
  }
  return r;
}

}  // namespace

int status_for(std::string_view code) noexcept {
  static const std::map<std::string_view, int> table = {
      {"BAD_REQUEST", 400},      {"INVALID_QUERY", 400},     {"INVALID_GEOMETRY", 400},
      {"CONTRACT_VIOLATION", 400}, {"MISSING_DISTANCE", 400}, {"ANCHOR_UNRESOLVED", 400},
      {"MISSING_AREA", 400},     {"INVALID_REWIND", 400},    {"INSTANCE_TOO_LARGE", 400},
      {"UNKNOWN_SESSION", 404},  {"UNKNOWN_PLACE", 404},     {"UNKNOWN_AREA", 404},
      {"NOT_FOUND", 404},        {"METHOD_NOT_ALLOWED", 405}, {"SESSION_BUSY", 409},
      {"SESSION_CLOSED", 409},   {"AMBIGUOUS_PLACE", 409},   {"BUDGET_EXHAUSTED", 429},
      {"REMOTE_ERROR", 502},     {"SCRIPT_EXHAUSTED", 503},
  };
  auto it = table.find(code);
  return it == table.end() ? 500 : it->second;
}

json error_body(std::string_view code, std::string_view message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

Api::Api(std::shared_ptr<SearchService> search, dialogue::ChatGraph graph, llm::RegistrySpec backends,
         std::shared_ptr<SessionRepository> sessions, ApiOptions options)
    : search_(std::move(search)),
      dialogue_(std::move(graph), search_.get(),
                dialogue::DialogueOptions{options.clock, 8, {}, options.default_k, options.default_eps_m}),
      backends_(std::move(backends)),
      sessions_(std::move(sessions)),
      options_(std::move(options)) {
  if (!options_.id_source) options_.id_source = random_id;
}

std::shared_ptr<Api> Api::from_config(const ServerConfig& c) {
  auto store = std::make_shared<const geo::PoiStore>(geo::load_pois(c.dataset, geo::PoiFormat::automatic, c.cell_m));
  auto search = std::make_shared<SearchService>(std::move(store), Gazetteer::load(c.gazetteer), c.cache_capacity);
  dialogue::ChatGraph graph =
      c.graph ? dialogue::ChatGraph(dialogue::GraphConfig::load(*c.graph)) : dialogue::ChatGraph::standard();
  auto sessions = std::make_shared<InMemorySessionStore>(
      std::chrono::milliseconds(static_cast<std::int64_t>(c.session_ttl_s * 1000.0)));
  ApiOptions options;
  options.default_k = c.default_k;
  options.default_eps_m = c.default_eps_m;
  c.backends.instantiate();  // fail fast on unusable backend configs
  return std::make_shared<Api>(std::move(search), std::move(graph), c.backends, std::move(sessions),
                               std::move(options));
}

ApiResponse Api::handle(std::string_view method, std::string_view path_view,
                        const std::multimap<std::string, std::string>& params, std::string_view body) const {
  static const std::regex session_re(R"(^/api/sessions/([^/]+)$)");
  static const std::regex message_re(R"(^/api/sessions/([^/]+)/messages$)");
  static const std::regex rewind_re(R"(^/api/sessions/([^/]+)/rewind$)");
  const std::string path(path_view);
  std::smatch m;
  auto method_not_allowed = [&] {
    return ApiResponse{405, error_body("METHOD_NOT_ALLOWED", std::string(method) + " is not supported on " + path)};
  };
  try {
    if (path == "/api/sessions") {
      return method == "POST" ? create_session() : method_not_allowed();
    }
    if (std::regex_match(path, m, message_re)) {
      return method == "POST" ? post_message(m[1].str(), parse_body(body)) : method_not_allowed();
    }
    if (std::regex_match(path, m, rewind_re)) {
      return method == "POST" ? rewind_session(m[1].str(), parse_body(body)) : method_not_allowed();
    }
    if (std::regex_match(path, m, session_re)) {
      return method == "GET" ? get_session(m[1].str()) : method_not_allowed();
    }
    if (path == "/api/search") return method == "POST" ? post_search(parse_body(body)) : method_not_allowed();
    if (path == "/api/geocode") return method == "POST" ? post_geocode(parse_body(body)) : method_not_allowed();
    if (path == "/api/pois") return method == "GET" ? get_pois(params) : method_not_allowed();
    if (path == "/api/backends") return method == "GET" ? get_backends() : method_not_allowed();
    if (path == "/api/health") {
      if (method != "GET") return method_not_allowed();
      return {200, {{"status", "ok"}, {"pois", search_->store().size()}, {"sessions", sessions_->size()}}};
    }
    throw NotFound("no route for " + path);
  } catch (const Error& e) {
    return failure(e);
  } catch (const std::exception& e) {
    return {500, error_body("INTERNAL", e.what())};
  }
}

ApiResponse Api::create_session() const {
  SessionSlot slot{{}, backends_.instantiate()};
  dialogue::AdvanceResult r = dialogue_.start(options_.id_source(), slot.backends);
  slot.session = r.session;
  sessions_->put(std::move(slot));
  return {201, {{"session_id", r.session.id}, {"state", r.session.state}, {"greeting", r.reply}}};
}

ApiResponse Api::post_message(const std::string& id, const json& body) const {
  const std::string text = string_field(body, "text");
  SessionLease lease = sessions_->acquire(id);
  dialogue::AdvanceResult r = dialogue_.advance(lease.session(), text, lease.backends());
  lease.commit(r.session);
  json out{{"reply", r.reply}, {"state", r.session.state}, {"draft", match::to_json(r.session.draft)}};
  if (r.results) out["results"] = match::to_json(*r.results);
  return {200, std::move(out)};
}

ApiResponse Api::rewind_session(const std::string& id, const json& body) const {
  const std::string target = string_field(body, "state");
  SessionLease lease = sessions_->acquire(id);
  if (!dialogue_.graph().has(target)) throw dialogue::InvalidRewind("unknown state: " + target);
  dialogue::Session s = dialogue::rewind(lease.session(), target);
  lease.commit(s);
  return {200, {{"state", s.state}, {"draft", match::to_json(s.draft)}}};
}

ApiResponse Api::get_session(const std::string& id) const {
  return {200, dialogue::to_json(sessions_->snapshot(id))};
}

ApiResponse Api::post_search(json body) const {
  if (!body.contains("k")) body["k"] = options_.default_k;
  if (!body.contains("eps_m")) body["eps_m"] = options_.default_eps_m;
  const match::QueryDraft draft = match::draft_from_json(body);
  if (!draft.area && !draft.area_name) throw match::MissingArea();
  const match::CachedSearch r = search_->run(search_->resolve(draft));
  return {200, {{"results", match::to_json(r.results)}, {"cache_hit", r.hit}}};
}

ApiResponse Api::get_pois(const std::multimap<std::string, std::string>& params) const {
  const double lat = number_param(params, "lat");
  const double lon = number_param(params, "lon");
  const double radius = number_param(params, "radius_m");
  const geo::Circle area(geo::GeoPoint(lat, lon), radius);
  std::optional<std::string> category;
  if (auto it = params.find("category"); it != params.end() && !it->second.empty()) {
    category = geo::normalize_category(it->second);
  }
  json pois = json::array();
  for (const auto& p : search_->store().within(area)) {
    if (!category || p.category == *category) pois.push_back(match::to_json(p));
  }
  return {200, {{"pois", std::move(pois)}}};
}

ApiResponse Api::post_geocode(const json& body) const {
  const std::string name = string_field(body, "name");
  if (name.empty()) throw BadRequest("\"name\" must not be empty");
  const dialogue::GeocodeResult g = search_->geocode(name);
  json out = match::to_json(g.circle);
  out["label"] = g.label;
  if (g.note) out["note"] = *g.note;
  return {200, std::move(out)};
}

ApiResponse Api::get_backends() const {
  json ids = json::array();
  for (const auto& [id, cfg] : backends_.backends) ids.push_back(id);
  return {200, {{"default", backends_.default_id}, {"backends", std::move(ids)}}};
}

// ----- httplib front end -------------------------------------------------------

struct HttpServer::Impl {
  std::shared_ptr<const Api> api;
  httplib::Server server;
  std::thread thread;
  bool bound = false;
};

HttpServer::HttpServer(std::shared_ptr<const Api> api) : impl_(std::make_unique<Impl>()) {
  impl_->api = std::move(api);
  auto route = [api = impl_->api](const httplib::Request& req, httplib::Response& res) {
    std::multimap<std::string, std::string> params(req.params.begin(), req.params.end());
    const ApiResponse r = api->handle(req.method, req.path, params, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body.dump(), "application/json");
  };
  auto& s = impl_->server;
  s.Get(".*", route);
  s.Post(".*", route);
  s.Put(".*", route);
  s.Delete(".*", route);
  s.Patch(".*", route);
  s.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "unexpected failure";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(error_body("INTERNAL", what).dump(), "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error("BIND_FAILED", "cannot listen on " + host + ":" + std::to_string(port));
  impl_->bound = true;
  return bound;
}

void HttpServer::serve() {
  if (!impl_->bound) throw ContractViolation("bind() before serve()");
  impl_->server.listen_after_bind();
}

void HttpServer::start() {
  if (!impl_->bound) throw ContractViolation("bind() before start()");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

namespace {
std::atomic<bool> g_interrupted{false};
extern "C" void on_signal(int) { g_interrupted.store(true); }
}  // namespace

void run_server(const ServerConfig& config, std::ostream& log) {
  auto api = Api::from_config(config);
  HttpServer server(api);
  const int port = server.bind(config.host, config.port);
  log << "listening on " << config.host << ":" << port << " (" << api->search().store().size() << " pois)"
      << std::endl;
  g_interrupted.store(false);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.start();
  while (!g_interrupted.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  log << "shutting down" << std::endl;
  server.stop();
}

}  // namespace seqgpt::server
