#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "seqgpt/geo/ingest.hpp"
#include "seqgpt/llm/backends.hpp"
#include "seqgpt/match/matcher.hpp"
#include "seqgpt/match/wire.hpp"
#include "seqgpt/server/http_server.hpp"
#include "seqgpt/server/search_service.hpp"
#include "seqgpt/synth/generator.hpp"
#include "seqgpt/synth/metrics.hpp"
#include "seqgpt/text.hpp"

namespace seqgpt::cli {

namespace {

using nlohmann::json;

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& m) : Error("USAGE", m) {}
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IO_ERROR", "cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error("INVALID_JSON", path + " is not valid JSON");
  return j;
}

std::size_t parse_cap(const std::string& s) {
  if (s == "inf" || s == "unbounded") return match::kUnboundedCap;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used == s.size() && v >= 1) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw UsageError("--cap must be a positive integer or 'inf'");
}

std::shared_ptr<server::SearchService> make_service(const std::string& dataset, const std::string& gazetteer,
                                                    std::size_t cap, std::size_t cache_capacity = 256) {
  auto store = std::make_shared<const geo::PoiStore>(geo::load_pois(dataset));
  server::Gazetteer gaz = gazetteer.empty() ? server::Gazetteer() : server::Gazetteer::load(gazetteer);
  return std::make_shared<server::SearchService>(std::move(store), std::move(gaz), cache_capacity,
                                                 match::MatchConfig{cap});
}

llm::BackendConfig backend_from_flags(const std::string& flag, const std::string& endpoint,
                                      const std::string& model, std::optional<std::size_t> budget) {
  llm::BackendConfig c = llm::parse_backend_flag(flag);
  if (!endpoint.empty()) c.endpoint = endpoint;
  if (!model.empty()) c.model_name = model;
  c.budget = budget;
  c.validate();
  return c;
}

struct Options {
  // serve
  std::string config;
  // shared
  std::string dataset;
  std::string gazetteer;
  std::string graph;
  std::string backend = "rule";
  std::string endpoint;
  std::string model;
  // search
  std::string query_path;
  std::string query_json;
  bool oracle = false;
  std::string cap = "8";
  // synth
  std::size_t n = 2000;
  std::uint64_t seed = 0;
  std::string out;
  std::string export_chat;
  std::size_t jobs = 1;
  std::size_t max_len = 40;
  // eval
  std::string metric;
  int max_n = 4;
  // bench
  std::string queries;
  std::size_t repeat = 5;
};

int cmd_serve(const Options& o, std::ostream&, std::ostream& err) {
  server::run_server(server::ServerConfig::load(o.config), err);
  return 0;
}

int cmd_search(const Options& o, std::ostream& out, std::ostream&) {
  if (o.query_path.empty() == o.query_json.empty()) throw UsageError("give exactly one of --query or --query-json");
  json body;
  if (!o.query_path.empty()) {
    body = read_json_file(o.query_path);
  } else {
    body = json::parse(o.query_json, nullptr, false);
    if (body.is_discarded()) throw match::InvalidQuery("--query-json is not valid JSON");
  }
  const auto service = make_service(o.dataset, o.gazetteer, parse_cap(o.cap));
  const match::ExemplarQuery query = service->resolve(match::draft_from_json(body));
  const auto results = o.oracle ? match::brute_force_match(service->store(), query)
                                : match::match_exemplar(service->store(), query, {parse_cap(o.cap)});
  for (const auto& r : results) out << match::to_json(r).dump() << '\n';
  return 0;
}

int cmd_ingest_check(const Options& o, std::ostream& out, std::ostream&) {
  const geo::PoiStore store = geo::load_pois(o.dataset);
  std::map<std::string, std::size_t> histogram;
  for (const auto& p : store.pois()) ++histogram[p.category];
  out << json{{"records", store.size()}, {"categories", histogram}}.dump() << '\n';
  return 0;
}

int cmd_synth(const Options& o, std::ostream& out, std::ostream& err) {
  const synth::SynthGraph graph = synth::SynthGraph::load(o.graph);
  auto backend = llm::make_backend(backend_from_flags(o.backend, o.endpoint, o.model, std::nullopt));
  synth::DatasetOptions opts;
  opts.n = o.n;
  opts.seed = o.seed;
  opts.jobs = o.jobs;
  opts.generate.max_len = o.max_len;
  const auto started = std::chrono::steady_clock::now();
  const synth::GenerationReport report = synth::generate_dataset(graph, *backend, opts, std::filesystem::path(o.out));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (!o.export_chat.empty()) {
    std::ofstream chat(o.export_chat, std::ios::binary | std::ios::trunc);
    if (!chat) throw Error("IO_ERROR", "cannot write " + o.export_chat);
    for (const auto& s : synth::load_dataset(o.out)) chat << synth::training_example(s).dump() << '\n';
  }
  json r = report.to_json();
  r["out"] = o.out;
  r["backend_requests"] = backend->usage().requests;
  out << r.dump() << '\n';
  err << "wrote " << report.written << " samples in " << secs << " s\n";
  return 0;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream&) {
  std::optional<synth::SynthGraph> graph;
  if (!o.graph.empty()) graph = synth::SynthGraph::load(o.graph);
  const auto samples = synth::load_dataset(o.dataset, graph ? &*graph : nullptr);
  if (o.metric == "self-bleu") {
    const double v = synth::self_bleu(synth::user_utterances(samples), o.max_n);
    out << json{{"metric", "self-bleu"}, {"value", v}, {"dialogues", samples.size()}}.dump() << '\n';
    return 0;
  }
  auto backend = llm::make_backend(backend_from_flags(o.backend, o.endpoint, o.model, std::nullopt));
  const synth::StateAccuracy acc = synth::eval_state_accuracy(samples, *backend, graph ? &*graph : nullptr);
  out << json{{"metric", "state-acc"}, {"value", acc.accuracy()}, {"correct", acc.correct}, {"total", acc.total}}
             .dump()
      << '\n';
  return 0;
}

std::vector<json> read_queries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IO_ERROR", "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string all = buf.str();
  std::vector<json> out;
  const json whole = json::parse(all, nullptr, false);
  if (!whole.is_discarded() && whole.is_array()) return whole.get<std::vector<json>>();
  if (!whole.is_discarded() && whole.is_object()) return {whole};
  std::istringstream lines(all);
  std::string line;
  for (std::size_t n = 1; std::getline(lines, line); ++n) {
    if (text::trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw match::InvalidQuery(path + " line " + std::to_string(n) + ": not valid JSON");
    out.push_back(std::move(j));
  }
  return out;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream&) {
  if (o.repeat < 1) throw UsageError("--repeat must be at least 1");
  const auto service = make_service(o.dataset, o.gazetteer, parse_cap(o.cap));
  const auto bodies = read_queries(o.queries);
  std::uint64_t hits = 0;
  std::uint64_t runs = 0;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const match::ExemplarQuery q = service->resolve(match::draft_from_json(bodies[i]));
    std::vector<double> ms;
    std::size_t query_hits = 0;
    std::size_t result_count = 0;
    for (std::size_t r = 0; r < o.repeat; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto res = service->run(q);
      ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
      query_hits += res.hit ? 1 : 0;
      result_count = res.results.size();
    }
    std::sort(ms.begin(), ms.end());
    double sum = 0.0;
    for (double v : ms) sum += v;
    hits += query_hits;
    runs += ms.size();
    out << json{{"query", i},
                {"runs", ms.size()},
                {"results", result_count},
                {"mean_ms", sum / static_cast<double>(ms.size())},
                {"p50_ms", ms[ms.size() / 2]},
                {"min_ms", ms.front()},
                {"max_ms", ms.back()},
                {"cache_hits", query_hits}}
               .dump()
        << '\n';
  }
  const auto stats = service->cache().stats();
  out << json{{"summary", true},
              {"queries", bodies.size()},
              {"runs", runs},
              {"hit_ratio", runs ? static_cast<double>(hits) / static_cast<double>(runs) : 0.0},
              {"computations", stats.computations}}
             .dump()
      << '\n';
  return 0;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"seq-gpt: spatial exemplar search with a conversational front end", "seq-gpt"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  Options o;

  auto* serve = app.add_subcommand("serve", "Run the HTTP server until interrupted");
  serve->add_option("--config", o.config, "Server config JSON")->required()->check(CLI::ExistingFile);

  auto* search = app.add_subcommand("search", "Run one query offline; prints ranked results as JSON lines");
  search->add_option("--dataset", o.dataset, "POI dataset (.csv or GeoJSON)")->required()->check(CLI::ExistingFile);
  auto* qp = search->add_option("--query", o.query_path, "Wire-form query JSON file")->check(CLI::ExistingFile);
  auto* qj = search->add_option("--query-json", o.query_json, "Wire-form query as a JSON string");
  qp->excludes(qj);
  search->add_flag("--oracle", o.oracle, "Use the exhaustive reference matcher");
  search->add_option("--cap", o.cap, "Candidates per slot, or 'inf'")->capture_default_str();
  search->add_option("--gazetteer", o.gazetteer, "Gazetteer CSV for named areas")->check(CLI::ExistingFile);

  auto* ingest = app.add_subcommand("ingest-check", "Validate a dataset; prints record count and categories");
  ingest->add_option("--dataset", o.dataset, "POI dataset (.csv or GeoJSON)")->required()->check(CLI::ExistingFile);

  auto* syn = app.add_subcommand("synth", "Generate a synthetic dialogue dataset (JSONL); prints the report");
  syn->add_option("--graph", o.graph, "State graph JSON")->required()->check(CLI::ExistingFile);
  syn->add_option("--backend", o.backend, "rule | scripted:PATH | remote")->capture_default_str();
  syn->add_option("--endpoint", o.endpoint, "Remote endpoint base URL");
  syn->add_option("--model", o.model, "Remote model name");
  syn->add_option("--n", o.n, "Number of samples")->capture_default_str()->check(CLI::PositiveNumber);
  syn->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  syn->add_option("--out", o.out, "Output JSONL path")->required();
  syn->add_option("--jobs", o.jobs, "Parallel generation workers")->capture_default_str()->check(CLI::PositiveNumber);
  syn->add_option("--max-len", o.max_len, "Walk length before forced exit")->capture_default_str()->check(CLI::PositiveNumber);
  syn->add_option("--export-chat", o.export_chat, "Also write {\"messages\":[...]} training lines here");

  auto* ev = app.add_subcommand("eval", "Evaluate a dataset; prints the metric as JSON");
  ev->add_option("--dataset", o.dataset, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  ev->add_option("--metric", o.metric, "self-bleu | state-acc")
      ->required()
      ->check(CLI::IsMember({"self-bleu", "state-acc"}));
  ev->add_option("--backend", o.backend, "rule | scripted:PATH | remote (state-acc)")->capture_default_str();
  ev->add_option("--endpoint", o.endpoint, "Remote endpoint base URL");
  ev->add_option("--model", o.model, "Remote model name");
  ev->add_option("--graph", o.graph, "State graph JSON (validates paths; orders @allowed)")->check(CLI::ExistingFile);
  ev->add_option("--max-n", o.max_n, "Highest n-gram order for self-BLEU")->capture_default_str()->check(CLI::Range(1, 8));

  auto* bench = app.add_subcommand("bench", "Latency and cache statistics over a query file");
  bench->add_option("--dataset", o.dataset, "POI dataset")->required()->check(CLI::ExistingFile);
  bench->add_option("--queries", o.queries, "JSON array or JSONL of wire-form queries")->required()->check(CLI::ExistingFile);
  bench->add_option("--repeat", o.repeat, "Runs per query")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--cap", o.cap, "Candidates per slot, or 'inf'")->capture_default_str();
  bench->add_option("--gazetteer", o.gazetteer, "Gazetteer CSV for named areas")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*serve) return cmd_serve(o, out, err);
    if (*search) return cmd_search(o, out, err);
    if (*ingest) return cmd_ingest_check(o, out, err);
    if (*syn) return cmd_synth(o, out, err);
    if (*ev) return cmd_eval(o, out, err);
    if (*bench) return cmd_bench(o, out, err);
  } catch (const UsageError& e) {
    err << "error: USAGE: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << one_line(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: INTERNAL: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 2;
}

}  // namespace seqgpt::cli
