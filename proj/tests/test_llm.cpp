#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "seqgpt/dialogue/signal.hpp"
#include "seqgpt/llm/backends.hpp"
#include "seqgpt/llm/hints.hpp"
#include "support.hpp"

namespace seqgpt::llm {
namespace {

using nlohmann::json;

std::vector<ChatMessage> with_hints(const HintList& hints, std::string user = "hi") {
  return {{Role::system, compose_system_message("You are a helper.", hints)}, {Role::user, std::move(user)}};
}

// ----- hints / chat basics -----

TEST(Hints, ComposeAndParse) {
  const std::string msg = compose_system_message("Body line\nsecond", {{"state", "collect_area"}, {"note", "a\nb"}});
  EXPECT_EQ(msg, "Body line\nsecond\n@state: collect_area\n@note: a b");
  const Hints h = parse_hints(msg);
  EXPECT_EQ(h.body, "Body line\nsecond");
  EXPECT_EQ(h.get("state"), "collect_area");
  EXPECT_EQ(h.get("note"), "a b");
  EXPECT_FALSE(h.get("missing"));
  EXPECT_EQ(h.get_or("missing", "x"), "x");
  EXPECT_EQ(parse_hints("@not a hint").body, "@not a hint");
  EXPECT_EQ(compose_system_message("", {{"k", "v"}}), "@k: v");
}

TEST(Hints, FromMessages) {
  const std::vector<ChatMessage> msgs = {{Role::user, "u1"}, {Role::system, "@a: 1"}, {Role::assistant, "x"},
                                         {Role::user, "u2"}};
  EXPECT_EQ(hints_of(msgs).get("a"), "1");
  EXPECT_EQ(last_content(msgs, Role::user), "u2");
  EXPECT_EQ(last_content(msgs, Role::system), "@a: 1");
  EXPECT_TRUE(hints_of(std::span(msgs).first(1)).values.empty());
}

TEST(Chat, Roles) {
  for (Role r : {Role::system, Role::user, Role::assistant}) EXPECT_EQ(role_from_string(to_string(r)), r);
  EXPECT_THROW(role_from_string("tool"), ContractViolation);
}

TEST(Chat, TokenEstimate) {
  EXPECT_EQ(estimate_tokens(0), 0u);
  EXPECT_EQ(estimate_tokens(1), 1u);
  EXPECT_EQ(estimate_tokens(4), 1u);
  EXPECT_EQ(estimate_tokens(5), 2u);
}

TEST(Chat, BudgetAndUsage) {
  ScriptedBackend b({"one", "two", "three"}, {}, 2);
  const std::vector<ChatMessage> msgs = {{Role::user, "12345678"}};
  EXPECT_EQ(b.complete(msgs), "one");
  EXPECT_EQ(b.usage(), (Usage{1, 3}));  // (8 + 3 chars) / 4 rounded up
  EXPECT_EQ(b.complete(msgs), "two");
  try {
    b.complete(msgs);
    FAIL();
  } catch (const BudgetExhausted& e) {
    EXPECT_EQ(e.code(), "BUDGET_EXHAUSTED");
  }
  EXPECT_EQ(b.usage().requests, 2u);
  EXPECT_EQ(b.remaining(), 1u);
  EXPECT_THROW(b.complete({}), ContractViolation);
  EXPECT_THROW(ScriptedBackend({}, {}, 0), ContractViolation);
}

TEST(Chat, FailedCallsDoNotConsumeBudget) {
  ScriptedBackend b({}, {{"s", {"keyed"}}}, 1);
  EXPECT_THROW(b.complete(with_hints({{"state", "other"}})), ScriptExhausted);
  EXPECT_EQ(b.complete(with_hints({{"state", "s"}})), "keyed");
  EXPECT_THROW(b.complete(with_hints({{"state", "s"}})), BudgetExhausted);
}

// ----- scripted -----

TEST(Scripted, QueueInOrderThenExhausted) {
  ScriptedBackend b({"a", "b"});
  const std::vector<ChatMessage> msgs = {{Role::user, "x"}};
  EXPECT_EQ(b.complete(msgs), "a");
  EXPECT_EQ(b.complete(msgs), "b");
  try {
    b.complete(msgs);
    FAIL();
  } catch (const ScriptExhausted& e) {
    EXPECT_EQ(e.code(), "SCRIPT_EXHAUSTED");
  }
}

TEST(Scripted, KeyedByStateRequestAndVariant) {
  ScriptedBackend b({"fallback"}, {{"greet", {"g0", "g1", "g2"}}, {"greet#query", {"q"}}, {"greet#signal", {"s"}}});
  EXPECT_EQ(b.complete(with_hints({{"state", "greet"}, {"variant", "4"}})), "g1");
  EXPECT_EQ(b.complete(with_hints({{"state", "greet"}, {"variant", "4"}})), "g1");
  EXPECT_EQ(b.complete(with_hints({{"state", "greet"}})), "g0");
  EXPECT_EQ(b.complete(with_hints({{"state", "greet"}})), "g1");
  EXPECT_EQ(b.complete(with_hints({{"state", "greet"}, {"request", "query"}})), "q");
  EXPECT_EQ(b.complete(with_hints({{"state", "greet"}, {"request", "signal"}})), "s");
  EXPECT_EQ(b.complete(with_hints({{"state", "other"}})), "fallback");
  EXPECT_THROW(b.complete(with_hints({{"state", "other"}})), ScriptExhausted);
  EXPECT_EQ(b.complete(with_hints({{"state", "greet"}, {"variant", "2"}})), "g2");
  EXPECT_THROW(ScriptedBackend({}, {{"k", {}}}), ContractViolation);
}

TEST(Scripted, FromFile) {
  testing::TempDir dir;
  testing::write_file(dir / "arr.json", R"(["x", {"y": 1}])");
  auto a = ScriptedBackend::from_file(dir / "arr.json");
  const std::vector<ChatMessage> msgs = {{Role::user, "x"}};
  EXPECT_EQ(a->complete(msgs), "x");
  EXPECT_EQ(a->complete(msgs), R"({"y":1})");

  testing::write_file(dir / "obj.json", R"({"replies": ["r"], "keyed": {"s": ["k"]}})");
  auto o = ScriptedBackend::from_file(dir / "obj.json", 5);
  EXPECT_EQ(o->complete(with_hints({{"state", "s"}})), "k");
  EXPECT_EQ(o->complete(msgs), "r");
  EXPECT_EQ(o->budget(), 5u);

  testing::write_file(dir / "bad.json", "{oops");
  testing::write_file(dir / "num.json", "3");
  testing::write_file(dir / "keyed.json", R"({"keyed": {"s": "k"}})");
  for (const char* f : {"bad.json", "num.json", "keyed.json"}) {
    try {
      ScriptedBackend::from_file(dir / f);
      FAIL() << f;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), "INVALID_SCRIPT");
    }
  }
  EXPECT_THROW(ScriptedBackend::from_file(dir / "missing.json"), Error);
  EXPECT_TRUE(ScriptedBackend::from_file(testing::data_dir() / "synth_script.json"));
}

// ----- rule backend -----

TEST(Rule, SignalBaselineFollowsFirstAllowedTarget) {
  RuleBackend b;
  const auto ask = [&](std::string allowed) {
    return b.complete(with_hints({{"request", "signal"}, {"allowed", allowed}}));
  };
  EXPECT_EQ(ask("select_examples,stop"), "<SIG:proceed:select_examples>");
  EXPECT_EQ(ask("stop"), "<SIG:stop>");
  EXPECT_EQ(ask(""), "<SIG:stop>");
}

TEST(Rule, SynthesisRequestsAreDeterministicVariants) {
  RuleBackend b;
  auto text = [&](std::string state, std::string variant) {
    return b.complete(with_hints({{"request", "text"}, {"state", state}, {"variant", variant}, {"num", "2"}}));
  };
  auto query = [&](std::string state, std::string variant, std::string num = "2") {
    return json::parse(
        b.complete(with_hints({{"request", "query"}, {"state", state}, {"variant", variant}, {"num", num}})));
  };
  for (const char* s : {"spatial_examples", "add_example", "set_distances", "give_area"}) {
    EXPECT_EQ(text(s, "3"), text(s, "3"));
    EXPECT_FALSE(text(s, "3").empty());
    EXPECT_NE(text(s, "0").find_first_not_of(' '), std::string::npos);
  }
  const json cats = query("spatial_examples", "1", "3");
  ASSERT_TRUE(cats.is_array());
  EXPECT_EQ(cats.size(), 3u);
  EXPECT_TRUE(query("add_example", "2").contains("examples"));
  EXPECT_EQ(query("set_distances", "2", "3")["anchor_distances_m"].size(), 2u);
  EXPECT_TRUE(query("give_area", "0")["area"].contains("name"));
  // Malformed numeric hints fall back to defaults instead of throwing.
  EXPECT_NO_THROW(b.complete(with_hints({{"request", "text"}, {"state", "give_area"}, {"variant", "x"}})));
}

TEST(Rule, RuntimeReplyAlwaysEndsInSignal) {
  RuleBackend b;
  for (const char* state : {"collect_examples", "confirm_examples", "collect_area", "present_results", "bogus"}) {
    const std::string reply = b.complete(with_hints(
        {{"state", state}, {"allowed", "collect_examples,collect_area,stop"}, {"draft", "{}"}}, "hello"));
    EXPECT_NO_THROW(dialogue::split_signal(reply)) << reply;
  }
}

// ----- remote -----

class MockServer {
 public:
  explicit MockServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/v1/chat/completions", [this, handler](const httplib::Request& req, httplib::Response& res) {
      last_body = req.body;
      last_auth = req.get_header_value("Authorization");
      ++hits;
      handler(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/"; }

  std::string last_body, last_auth;
  std::atomic<int> hits{0};

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(Remote, PostsOpenAiShapedRequest) {
  MockServer mock([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"Hi! <SIG:stay>"}}],
                        "usage":{"prompt_tokens":7,"completion_tokens":5}})",
                    "application/json");
  });
  RemoteBackend b({mock.endpoint(), "test-model", 5.0, 0, std::nullopt, "secret"});
  const std::vector<ChatMessage> msgs = {{Role::system, "sys"}, {Role::user, "hello"}};
  EXPECT_EQ(b.complete(msgs, {64, 0.5, {"<END>"}}), "Hi! <SIG:stay>");
  EXPECT_EQ(b.usage(), (Usage{1, 12}));
  EXPECT_EQ(mock.last_auth, "Bearer secret");
  const json body = json::parse(mock.last_body);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["messages"][1], (json{{"role", "user"}, {"content", "hello"}}));
  EXPECT_EQ(body["max_tokens"], 64);
  EXPECT_EQ(body["temperature"], 0.5);
  EXPECT_EQ(body["stop"], json::array({"<END>"}));
}

TEST(Remote, HttpErrorsAreStructured) {
  MockServer mock([](const httplib::Request& req, httplib::Response& res) {
    const auto body = json::parse(req.body);
    const std::string mode = body["messages"][0]["content"];
    if (mode == "500") {
      res.status = 500;
      res.set_content(std::string(500, 'x'), "text/plain");
    } else if (mode == "garbage") {
      res.set_content("not json", "text/plain");
    } else {
      res.set_content(R"({"choices":[]})", "application/json");
    }
  });
  RemoteBackend b({mock.endpoint(), "m", 5.0, 3, std::nullopt, ""});
  for (const char* mode : {"500", "garbage", "shape"}) {
    try {
      b.complete(std::vector<ChatMessage>{{Role::user, mode}});
      FAIL() << mode;
    } catch (const RemoteError& e) {
      EXPECT_EQ(e.code(), "REMOTE_ERROR");
      EXPECT_LE(e.body_excerpt().size(), 203u);
      if (std::string(mode) == "500") EXPECT_EQ(e.status(), 500);
    }
  }
  EXPECT_EQ(mock.hits.load(), 3);  // HTTP errors are not retried
  EXPECT_TRUE(mock.last_auth.empty());
  EXPECT_EQ(b.usage().requests, 0u);
}

TEST(Remote, RetriesTransportFailures) {
  int port;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  RemoteBackend b({"http://127.0.0.1:" + std::to_string(port), "m", 0.2, 2, std::nullopt, ""});
  try {
    b.complete(std::vector<ChatMessage>{{Role::user, "x"}});
    FAIL();
  } catch (const RemoteError& e) {
    EXPECT_EQ(e.status(), 0);
  }
  EXPECT_EQ(b.attempts(), 3u);
}

TEST(Remote, RejectsBadOptions) {
  EXPECT_THROW(RemoteBackend({"ftp://x", "m"}), ContractViolation);
  EXPECT_THROW(RemoteBackend({"http://x", ""}), ContractViolation);
}

// ----- configuration / registry -----

TEST(Config, ParseAndValidate) {
  const auto c = backend_config_from_json(
      json::parse(R"({"kind":"scripted","script":"s.json","budget":3,"timeout_s":2})"), "/base");
  EXPECT_EQ(c.kind, BackendKind::scripted);
  EXPECT_EQ(c.script, std::filesystem::path("/base/s.json"));
  EXPECT_EQ(c.budget, 3u);
  EXPECT_EQ(backend_config_from_json(json::object()).kind, BackendKind::rule);
  for (const char* bad : {R"({"kind":"magic"})", R"({"kind":"remote","endpoint":"http://x"})", R"({"kind":"scripted"})",
                          R"({"budget":0})", R"({"timeout_s":0})", R"({"max_retries":-1})", R"({"endpoint":5})", "[]"}) {
    try {
      backend_config_from_json(json::parse(bad));
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), "INVALID_CONFIG") << bad;
    }
  }
}

TEST(Config, BackendFlag) {
  EXPECT_EQ(parse_backend_flag("rule").kind, BackendKind::rule);
  const auto s = parse_backend_flag("scripted:/tmp/x.json");
  EXPECT_EQ(s.kind, BackendKind::scripted);
  EXPECT_EQ(s.script, std::filesystem::path("/tmp/x.json"));
  EXPECT_EQ(parse_backend_flag("remote").kind, BackendKind::remote);
  EXPECT_THROW(parse_backend_flag("scripted:"), Error);
  EXPECT_THROW(parse_backend_flag("gpt"), Error);
}

TEST(Registry, BindingsAndDefault) {
  testing::TempDir dir;
  testing::write_file(dir / "s.json", R"({"keyed": {"collect_area": ["area!"]}})");
  const auto spec = RegistrySpec::from_json(json::parse(R"({
      "default": "rule",
      "backends": {"rule": {"kind": "rule"}, "script": {"kind": "scripted", "script": "s.json"}},
      "states": {"collect_area": "script"}})"),
                                            dir.path());
  auto reg = spec.instantiate();
  EXPECT_EQ(reg.ids(), (std::vector<std::string>{"rule", "script"}));
  EXPECT_EQ(reg.for_state("collect_area").kind(), "scripted");
  EXPECT_EQ(reg.for_state("collect_examples").kind(), "rule");
  EXPECT_EQ(reg.for_state("collect_area").complete(with_hints({{"state", "collect_area"}})), "area!");
  EXPECT_EQ(reg.total_usage().requests, 1u);
  // Fresh instances do not share counters.
  EXPECT_EQ(spec.instantiate().total_usage().requests, 0u);
  EXPECT_THROW(reg.get("nope"), ContractViolation);
  EXPECT_THROW(reg.bind("x", "nope"), ContractViolation);

  EXPECT_EQ(RegistrySpec::from_json(json::object()).default_id, "rule");
  EXPECT_THROW(RegistrySpec::from_json(json::parse(R"({"default": "x"})")), Error);
  EXPECT_THROW(RegistrySpec::from_json(json::parse(R"({"states": {"a": "x"}})")), Error);
  EXPECT_THROW(RegistrySpec::from_json(json::parse(R"({"backends": {}})")), Error);
}

}  // namespace
}  // namespace seqgpt::llm
