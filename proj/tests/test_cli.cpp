#include <gtest/gtest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "seqgpt/synth/generator.hpp"
#include "support.hpp"

namespace seqgpt::cli {
namespace {

using nlohmann::json;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "seq-gpt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const char* name) { return (testing::data_dir() / name).string(); }

const json kDemoQuery = {{"examples",
                          {{{"kind", "named"}, {"name", "Suntec City"}},
                           {{"kind", "named"}, {"name", "Anytime Fitness City Hall"}, {"anchor_distance_m", 461}},
                           {{"kind", "category_only"}, {"category", "hotel"}, {"anchor_distance_m", 200}}}},
                         {"area", {{"name", "downtown Sydney"}}}};

std::vector<std::string> search_args(const json& q) {
  return {"search", "--dataset", data("desk_pois.csv"), "--gazetteer", data("gazetteer.csv"), "--query-json", q.dump()};
}

TEST(Cli, HelpAndUsage) {
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_NE(run({"--help"}).out.find("search"), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"search", "--dataset", data("desk_pois.csv")}).code, 2);
  EXPECT_EQ(run({"synth", "--graph", data("synth_graph.json"), "--out", "x", "--n", "0"}).code, 2);
}

TEST(Cli, SearchCapInfMatchesOracleByteForByte) {
  auto fast = search_args(kDemoQuery);
  fast.insert(fast.end(), {"--cap", "inf"});
  auto oracle = search_args(kDemoQuery);
  oracle.push_back("--oracle");
  const CliRun a = run(fast), b = run(oracle);
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
  std::istringstream lines(a.out);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const json r = json::parse(line);
    EXPECT_EQ(r["assignment"].size(), 3u);
    ++n;
  }
  EXPECT_EQ(n, 10u);
}

TEST(Cli, SearchErrorsAreStructured) {
  json unknown = kDemoQuery;
  unknown["examples"][0]["name"] = "Nowhere Plaza";
  const CliRun a = run(search_args(unknown));
  EXPECT_EQ(a.code, 1);
  EXPECT_EQ(a.err.rfind("error: UNKNOWN_PLACE: ", 0), 0u) << a.err;

  auto bad = search_args(kDemoQuery);
  bad.back() = "{";
  const CliRun b = run(bad);
  EXPECT_EQ(b.code, 1);
  EXPECT_EQ(b.err.rfind("error: INVALID_QUERY: ", 0), 0u) << b.err;
}

TEST(Cli, IngestCheck) {
  const CliRun r = run({"ingest-check", "--dataset", data("desk_pois.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["records"], 360);
  std::size_t total = 0;
  for (const auto& [cat, n] : j["categories"].items()) total += n.get<std::size_t>();
  EXPECT_EQ(total, 360u);

  testing::TempDir dir;
  testing::write_file(dir.path() / "bad.csv", "id,name,lat,lon,category\n1,x,91,0,gym\n");
  const CliRun bad = run({"ingest-check", "--dataset", (dir.path() / "bad.csv").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("line 2"), std::string::npos) << bad.err;
}

TEST(Cli, SynthIsDeterministicForASeed) {
  testing::TempDir dir;
  const auto once = [&](const char* name) {
    const std::string out = (dir.path() / name).string();
    const CliRun r = run({"synth", "--graph", data("synth_graph.json"), "--backend",
                       "scripted:" + data("synth_script.json"), "--n", "1", "--seed", "7", "--out", out});
    EXPECT_EQ(r.code, 0) << r.err;
    return testing::read_file(out);
  };
  const std::string a = once("a.jsonl"), b = once("b.jsonl");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  const synth::SynthGraph graph = synth::SynthGraph::load(testing::data_dir() / "synth_graph.json");
  EXPECT_EQ(synth::load_dataset(dir.path() / "a.jsonl", &graph).size(), 1u);
}

TEST(Cli, SynthExportChat) {
  testing::TempDir dir;
  const std::string out = (dir.path() / "d.jsonl").string(), chat = (dir.path() / "c.jsonl").string();
  const CliRun r = run({"synth", "--graph", data("synth_graph.json"), "--backend", "scripted:" + data("synth_script.json"),
                     "--n", "3", "--out", out, "--export-chat", chat});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["written"], 3);
  std::istringstream lines(testing::read_file(chat));
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    EXPECT_TRUE(json::parse(line).contains("messages"));
    ++n;
  }
  EXPECT_EQ(n, 3u);
}

TEST(Cli, EvalSelfBleuOnIdenticalDialoguesIsOne) {
  testing::TempDir dir;
  const std::string one = (dir.path() / "one.jsonl").string();
  ASSERT_EQ(run({"synth", "--graph", data("synth_graph.json"), "--backend", "scripted:" + data("synth_script.json"),
                 "--n", "1", "--seed", "3", "--out", one})
                .code,
            0);
  json sample = json::parse(testing::read_file(one));
  std::string copies;
  for (int i = 0; i < 4; ++i) {
    sample["id"] = i;
    copies += sample.dump() + "\n";
  }
  const auto same = dir.path() / "same.jsonl";
  testing::write_file(same, copies);
  const CliRun r = run({"eval", "--dataset", same.string(), "--metric", "self-bleu"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["value"].get<double>(), 1.0);
  EXPECT_EQ(j["dialogues"], 4);
}

TEST(Cli, EvalStateAccuracyWithRuleBackend) {
  testing::TempDir dir;
  const std::string d = (dir.path() / "d.jsonl").string();
  ASSERT_EQ(run({"synth", "--graph", data("synth_graph.json"), "--backend", "scripted:" + data("synth_script.json"),
                 "--n", "5", "--out", d})
                .code,
            0);
  const CliRun r = run({"eval", "--dataset", d, "--metric", "state-acc", "--backend", "rule", "--graph",
                     data("synth_graph.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_GT(j["total"].get<int>(), 0);
  EXPECT_GE(j["value"].get<double>(), 0.0);
  EXPECT_LE(j["value"].get<double>(), 1.0);
  EXPECT_EQ(run({"eval", "--dataset", d, "--metric", "perplexity"}).code, 2);
}

TEST(Cli, BenchReportsCacheHits) {
  testing::TempDir dir;
  const auto queries = dir.path() / "q.jsonl";
  testing::write_file(queries, kDemoQuery.dump() + "\n\n" + kDemoQuery.dump() + "\n");
  const CliRun r = run({"bench", "--dataset", data("desk_pois.csv"), "--gazetteer", data("gazetteer.csv"), "--queries",
                     queries.string(), "--repeat", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::vector<json> rows;
  for (std::string line; std::getline(lines, line);) rows.push_back(json::parse(line));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0]["cache_hits"], 2);
  EXPECT_EQ(rows[1]["cache_hits"], 3);
  EXPECT_EQ(rows[2]["computations"], 1);
  EXPECT_NEAR(rows[2]["hit_ratio"].get<double>(), 5.0 / 6.0, 1e-12);
}

}  // namespace
}  // namespace seqgpt::cli
