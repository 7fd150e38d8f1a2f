#include <gtest/gtest.h>

#include <httplib.h>

#include <sstream>

#include "seqgpt/server/config.hpp"
#include "seqgpt/server/gazetteer.hpp"
#include "seqgpt/server/http_server.hpp"
#include "seqgpt/server/session_store.hpp"
#include "support.hpp"

namespace seqgpt::server {
namespace {

using nlohmann::json;

// ----- gazetteer -----

Gazetteer desk_gazetteer() { return Gazetteer::load(testing::data_dir() / "gazetteer.csv"); }

TEST(Gazetteer, ExactAndPrefixes) {
  const auto g = desk_gazetteer();
  EXPECT_EQ(g.size(), 6u);
  const auto s = g.geocode("Sydney");
  EXPECT_EQ(s.circle, geo::Circle({-33.8688, 151.2093}, 3000));
  EXPECT_EQ(s.label, "Sydney");
  EXPECT_FALSE(s.note);
  EXPECT_EQ(g.geocode("in the City Hall").circle.radius_m(), 800);
  EXPECT_EQ(g.geocode("around Marina Bay.").label, "Marina Bay");
}

TEST(Gazetteer, DowntownQualifierHalvesRadius) {
  const auto d = desk_gazetteer().geocode("In downtown Sydney");
  EXPECT_EQ(d.circle, geo::Circle({-33.8688, 151.2093}, 1500));
  EXPECT_EQ(d.label, "central Sydney");
  const auto other = desk_gazetteer().geocode("sunny Melbourne");
  EXPECT_EQ(other.circle.radius_m(), 5000);
  ASSERT_TRUE(other.note);
  EXPECT_NE(other.note->find("sunny"), std::string::npos);
}

TEST(Gazetteer, UnknownArea) {
  try {
    desk_gazetteer().geocode("Atlantis");
    FAIL();
  } catch (const UnknownArea& e) {
    EXPECT_EQ(e.code(), "UNKNOWN_AREA");
  }
  EXPECT_THROW(desk_gazetteer().geocode(""), Error);
}

TEST(Gazetteer, CsvErrors) {
  for (const char* bad : {"name,lat,lon\nx,1,1\n", "name,lat,lon,radius_m\nx,1,1,-5\n", "name,lat,lon,radius_m\nx,99,1,5\n",
                          "name,lat,lon,radius_m\nx,a,1,5\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(Gazetteer::parse_csv(in), Error) << bad;
  }
}

// ----- config -----

TEST(Config, ShippedConfigLoads) {
  const auto c = ServerConfig::load(testing::data_dir() / "server_config.json");
  EXPECT_EQ(c.host, "127.0.0.1");
  EXPECT_EQ(c.port, 8080);
  EXPECT_TRUE(std::filesystem::exists(c.dataset));
  EXPECT_TRUE(c.graph && std::filesystem::exists(*c.graph));
  EXPECT_EQ(c.backends.default_id, "rule");
  EXPECT_EQ(c.default_k, 10u);
  EXPECT_EQ(c.session_ttl_s, 3600);
}

TEST(Config, FailsFast) {
  const auto base = testing::data_dir();
  const json good = {{"dataset", "desk_pois.csv"}, {"gazetteer", "gazetteer.csv"}};
  EXPECT_NO_THROW(ServerConfig::from_json(good, base));
  auto with = [&](const char* key, json v) {
    json j = good;
    j[key] = std::move(v);
    return j;
  };
  const json bad[] = {
      with("bogus", 1),          with("listen", "nohost"),      with("listen", 8080),
      with("dataset", "no.csv"), with("cache_capacity", 0),     with("default_eps_m", -1),
      with("default_k", 1.5),    with("backends", {{"default", "x"}}),
      with("backends", json{{"backends", {{"s", {{"kind", "scripted"}, {"script", "missing.json"}}}}}}),
  };
  for (const json& j : bad) {
    try {
      ServerConfig::from_json(j, base);
      FAIL() << j.dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), "INVALID_CONFIG") << j.dump();
    }
  }
  EXPECT_THROW(ServerConfig::from_json(json{{"gazetteer", "gazetteer.csv"}}, base), ConfigError);
  EXPECT_THROW(ServerConfig::load(base / "nope.json"), ConfigError);
}

// ----- session store -----

SessionSlot slot(std::string id) {
  SessionSlot s;
  s.session.id = std::move(id);
  s.session.state = "collect_examples";
  return s;
}

TEST(SessionStore, LeaseCommitAndBusy) {
  InMemorySessionStore store;
  store.put(slot("a"));
  EXPECT_EQ(store.size(), 1u);
  {
    SessionLease lease = store.acquire("a");
    EXPECT_THROW(store.acquire("a"), SessionBusy);
    auto s = lease.session();
    s.state = "collect_area";
    lease.commit(s);
    EXPECT_EQ(store.snapshot("a").state, "collect_area");
  }
  EXPECT_NO_THROW(store.acquire("a"));
  EXPECT_THROW(store.acquire("b"), UnknownSession);
  EXPECT_THROW(store.snapshot("b"), UnknownSession);
}

TEST(SessionStore, IdleTtlEviction) {
  auto t = std::chrono::steady_clock::time_point{};
  InMemorySessionStore store(std::chrono::seconds(10), [&] { return t; });
  store.put(slot("a"));
  store.put(slot("b"));
  t += std::chrono::seconds(6);
  store.snapshot("a");  // touches a
  t += std::chrono::seconds(6);
  EXPECT_EQ(store.size(), 1u);
  EXPECT_NO_THROW(store.snapshot("a"));
  EXPECT_THROW(store.snapshot("b"), UnknownSession);
  {
    SessionLease lease = store.acquire("a");
    t += std::chrono::seconds(60);
    EXPECT_EQ(store.size(), 1u);  // leased sessions are never evicted
  }
  t += std::chrono::seconds(11);
  EXPECT_EQ(store.size(), 0u);
}

// ----- Api -----

json call(const Api& api, std::string_view method, std::string_view path, const json& body, int expect_status) {
  const ApiResponse r = api.handle(method, path, {}, body.is_null() ? "" : body.dump());
  EXPECT_EQ(r.status, expect_status) << method << " " << path << " -> " << r.body.dump();
  return r.body;
}

TEST(Api, StatusTable) {
  EXPECT_EQ(status_for("INVALID_QUERY"), 400);
  EXPECT_EQ(status_for("UNKNOWN_SESSION"), 404);
  EXPECT_EQ(status_for("SESSION_BUSY"), 409);
  EXPECT_EQ(status_for("BUDGET_EXHAUSTED"), 429);
  EXPECT_EQ(status_for("REMOTE_ERROR"), 502);
  EXPECT_EQ(status_for("WHATEVER"), 500);
  EXPECT_EQ(error_body("X", "m"), (json{{"error", {{"code", "X"}, {"message", "m"}}}}));
}

TEST(Api, DemoConversation) {
  const auto api = testing::desk_api();
  const json created = call(*api, "POST", "/api/sessions", nullptr, 201);
  EXPECT_EQ(created["session_id"], "s1");
  EXPECT_EQ(created["state"], "collect_examples");
  EXPECT_FALSE(created["greeting"].get<std::string>().empty());
  json last;
  for (const char* turn : testing::kDemoTurns) {
    last = call(*api, "POST", "/api/sessions/s1/messages", {{"text", turn}}, 200);
    EXPECT_EQ(last["reply"].get<std::string>().find("<SIG:"), std::string::npos);
  }
  EXPECT_EQ(last["state"], "present_results");
  ASSERT_TRUE(last.contains("results"));
  EXPECT_EQ(last["results"].size(), 10u);
  EXPECT_EQ(last["draft"]["area"]["radius_m"], 1500.0);

  const json session = call(*api, "GET", "/api/sessions/s1", nullptr, 200);
  EXPECT_EQ(session["state"], "present_results");
  EXPECT_GE(session["history"].size(), 2 * std::size(testing::kDemoTurns));

  const json rewound = call(*api, "POST", "/api/sessions/s1/rewind", {{"state", "collect_area"}}, 200);
  EXPECT_EQ(rewound["state"], "collect_area");
  EXPECT_TRUE(rewound["draft"]["area"].is_null());
  EXPECT_EQ(rewound["draft"]["examples"].size(), 3u);
}

TEST(Api, MalformedRequestsGetStructured4xx) {
  const auto api = testing::desk_api();
  call(*api, "POST", "/api/sessions", nullptr, 201);
  struct Case {
    const char* method;
    const char* path;
    std::string body;
    int status;
    const char* code;
  };
  const Case cases[] = {
      {"POST", "/api/sessions/s1/messages", "not json", 400, "BAD_REQUEST"},
      {"POST", "/api/sessions/s1/messages", "[]", 400, "BAD_REQUEST"},
      {"POST", "/api/sessions/s1/messages", R"({"text": 5})", 400, "BAD_REQUEST"},
      {"POST", "/api/sessions/s1/messages", R"({})", 400, "BAD_REQUEST"},
      {"POST", "/api/sessions/nope/messages", R"({"text": "hi"})", 404, "UNKNOWN_SESSION"},
      {"GET", "/api/sessions/nope", "", 404, "UNKNOWN_SESSION"},
      {"POST", "/api/sessions/s1/rewind", R"({"state": "nowhere"})", 400, "INVALID_REWIND"},
      {"POST", "/api/sessions/s1/rewind", R"({"state": "collect_area"})", 400, "INVALID_REWIND"},
      {"POST", "/api/search", "{", 400, "BAD_REQUEST"},
      {"POST", "/api/search", R"({"examples": [{"kind": "weird"}]})", 400, "INVALID_QUERY"},
      {"POST", "/api/search", R"({"examples": [{"kind": "category_only", "category": "gym"}]})", 400, "MISSING_AREA"},
      {"POST", "/api/search",
       R"({"examples": [{"kind": "named", "name": "Nowhere Plaza"}], "area": {"name": "Sydney"}})", 404,
       "UNKNOWN_PLACE"},
      {"GET", "/api/pois?lat=1", "", 400, "BAD_REQUEST"},
      {"POST", "/api/geocode", R"({"name": ""})", 400, "BAD_REQUEST"},
      {"POST", "/api/geocode", R"({"name": "Atlantis"})", 404, "UNKNOWN_AREA"},
      {"DELETE", "/api/sessions", "", 405, "METHOD_NOT_ALLOWED"},
      {"GET", "/api/nothing", "", 404, "NOT_FOUND"},
  };
  for (const auto& c : cases) {
    std::multimap<std::string, std::string> params;
    std::string path = c.path;
    if (auto q = path.find('?'); q != std::string::npos) {
      params.emplace("lat", "1");
      path.resize(q);
    }
    const ApiResponse r = api->handle(c.method, path, params, c.body);
    EXPECT_EQ(r.status, c.status) << c.method << " " << c.path << " " << c.body;
    EXPECT_EQ(r.body["error"]["code"], c.code) << r.body.dump();
    EXPECT_TRUE(r.body["error"]["message"].is_string());
  }
  // The session survives bad requests.
  EXPECT_EQ(call(*api, "GET", "/api/sessions/s1", nullptr, 200)["state"], "collect_examples");
}

TEST(Api, SearchEndpointAndCache) {
  const auto api = testing::desk_api();
  const json query = {{"examples",
                       {{{"kind", "named"}, {"name", "Suntec City"}},
                        {{"kind", "named"}, {"name", "Anytime Fitness City Hall"}},
                        {{"kind", "category_only"}, {"category", "hotel"}, {"anchor_distance_m", 200}}}},
                      {"area", {{"name", "downtown Sydney"}}}};
  const json a = call(*api, "POST", "/api/search", query, 200);
  const json b = call(*api, "POST", "/api/search", query, 200);
  EXPECT_FALSE(a["cache_hit"].get<bool>());
  EXPECT_TRUE(b["cache_hit"].get<bool>());
  EXPECT_EQ(a["results"], b["results"]);
  EXPECT_EQ(a["results"].size(), 10u);
}

TEST(Api, PoisGeocodeBackendsHealth) {
  const auto api = testing::desk_api();
  const ApiResponse pois = api->handle(
      "GET", "/api/pois", {{"lat", "1.2936"}, {"lon", "103.8572"}, {"radius_m", "300"}, {"category", "Hotel"}}, "");
  ASSERT_EQ(pois.status, 200);
  ASSERT_FALSE(pois.body["pois"].empty());
  for (const auto& p : pois.body["pois"]) EXPECT_EQ(p["category"], "hotel");
  const json g = call(*api, "POST", "/api/geocode", {{"name", "downtown Sydney"}}, 200);
  EXPECT_EQ(g["label"], "central Sydney");
  EXPECT_EQ(g["radius_m"], 1500.0);
  EXPECT_EQ(call(*api, "GET", "/api/backends", nullptr, 200)["default"], "rule");
  EXPECT_EQ(call(*api, "GET", "/api/health", nullptr, 200)["pois"], 360);
}

json run_alone(const std::vector<std::string>& turns) {
  const auto api = testing::desk_api();
  call(*api, "POST", "/api/sessions", nullptr, 201);
  for (const auto& t : turns) call(*api, "POST", "/api/sessions/s1/messages", {{"text", t}}, 200);
  return call(*api, "GET", "/api/sessions/s1", nullptr, 200);
}

TEST(Api, InterleavedSessionsAreIsolated) {
  const std::vector<std::string> demo(std::begin(testing::kDemoTurns), std::end(testing::kDemoTurns));
  const std::vector<std::string> other(std::begin(testing::kOtherTurns), std::end(testing::kOtherTurns));
  json alone_a = run_alone(demo), alone_b = run_alone(other);
  alone_b["session_id"] = "s2";

  const auto api = testing::desk_api();
  call(*api, "POST", "/api/sessions", nullptr, 201);
  call(*api, "POST", "/api/sessions", nullptr, 201);
  for (std::size_t i = 0; i < std::max(demo.size(), other.size()); ++i) {
    if (i < other.size()) call(*api, "POST", "/api/sessions/s2/messages", {{"text", other[i]}}, 200);
    if (i < demo.size()) call(*api, "POST", "/api/sessions/s1/messages", {{"text", demo[i]}}, 200);
  }
  EXPECT_EQ(call(*api, "GET", "/api/sessions/s1", nullptr, 200), alone_a);
  EXPECT_EQ(call(*api, "GET", "/api/sessions/s2", nullptr, 200), alone_b);
  EXPECT_NE(alone_a["draft"], alone_b["draft"]);
}

TEST(Api, PerSessionBudget) {
  llm::RegistrySpec spec;
  spec.backends["rule"].budget = 2;
  server::ApiOptions options;
  int n = 0;
  options.id_source = [&] { return "b" + std::to_string(++n); };
  const Api api(testing::desk_service(), dialogue::ChatGraph::standard(), spec,
                std::make_shared<InMemorySessionStore>(), options);
  call(api, "POST", "/api/sessions", nullptr, 201);  // greeting uses one call
  call(api, "POST", "/api/sessions/b1/messages", {{"text", testing::kDemoTurns[0]}}, 200);
  const json over = call(api, "POST", "/api/sessions/b1/messages", {{"text", "I want to add a hotel"}}, 429);
  EXPECT_EQ(over["error"]["code"], "BUDGET_EXHAUSTED");
  // A fresh session gets a fresh budget.
  call(api, "POST", "/api/sessions", nullptr, 201);
  call(api, "POST", "/api/sessions/b2/messages", {{"text", testing::kDemoTurns[0]}}, 200);
}

// ----- HTTP -----

TEST(Http, DemoOverLoopback) {
  auto server = std::make_unique<HttpServer>(testing::desk_api());
  const int port = server->bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  server->start();
  httplib::Client client("127.0.0.1", port);
  auto created = client.Post("/api/sessions", "", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  EXPECT_EQ(created->get_header_value("Content-Type"), "application/json");
  const std::string id = json::parse(created->body)["session_id"];
  json last;
  for (const char* turn : testing::kDemoTurns) {
    auto r = client.Post("/api/sessions/" + id + "/messages", json{{"text", turn}}.dump(), "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200) << r->body;
    last = json::parse(r->body);
  }
  EXPECT_EQ(last["state"], "present_results");
  EXPECT_FALSE(last["results"].empty());

  auto bad = client.Post("/api/sessions/" + id + "/messages", "{oops", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(json::parse(bad->body)["error"]["code"], "BAD_REQUEST");
  auto pois = client.Get("/api/pois?lat=-33.8688&lon=151.2093&radius_m=200");
  ASSERT_TRUE(pois);
  EXPECT_EQ(pois->status, 200);
  auto options = client.Options("/api/search");
  ASSERT_TRUE(options);
  EXPECT_EQ(options->status, 204);
  EXPECT_EQ(options->get_header_value("Access-Control-Allow-Origin"), "*");
  server->stop();
}

}  // namespace
}  // namespace seqgpt::server
