#include "seqgpt/synth/generator.hpp"

#include <fstream>
#include <future>
#include <random>

#include "seqgpt/dialogue/extract.hpp"
#include "seqgpt/llm/hints.hpp"
#include "seqgpt/match/wire.hpp"
#include "seqgpt/text.hpp"

namespace seqgpt::synth {

using nlohmann::json;

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::optional<std::string> try_merge(match::QueryDraft& draft, const std::string& raw) {
  const json fragment = json::parse(raw, nullptr, false);
  if (fragment.is_discarded()) return "fragment is not JSON";
  try {
    draft = merge_fragment(draft, fragment);
  } catch (const Error& e) {
    return std::string(e.what());
  }
  return std::nullopt;
}

}  // namespace

std::string render_prompt(std::string_view tmpl, std::size_t num, std::string_view state, llm::Role role) {
  std::string out(tmpl);
  replace_all(out, "{NUM}", std::to_string(num));
  replace_all(out, "{STATE}", state);
  replace_all(out, "{ROLE}", llm::to_string(role));
  return out;
}

match::QueryDraft merge_fragment(match::QueryDraft draft, const json& fragment) {
  std::vector<dialogue::ExampleEdit> edits;
  if (fragment.is_array()) {
    for (const auto& c : fragment) {
      if (!c.is_string() || text::trim(c.get<std::string>()).empty()) {
        throw InvalidSample("category list entries must be non-empty strings");
      }
      match::DraftExample ex;
      ex.category = geo::normalize_category(c.get<std::string>());
      edits.push_back(dialogue::AppendExample{std::move(ex), dialogue::EditSource::enumeration});
    }
    return dialogue::apply_edits(std::move(draft), edits);
  }
  if (!fragment.is_object()) throw InvalidSample("fragment must be an array or an object");
  for (const auto& [key, value] : fragment.items()) {
    if (key != "examples" && key != "area" && key != "anchor_distances_m") {
      throw InvalidSample("unexpected fragment key: " + key);
    }
  }
  try {
    if (auto it = fragment.find("examples"); it != fragment.end()) {
      const match::QueryDraft part = match::draft_from_json(json{{"examples", *it}});
      for (const auto& ex : part.examples) {
        edits.push_back(dialogue::AppendExample{ex, dialogue::EditSource::enumeration});
      }
    }
    if (auto it = fragment.find("anchor_distances_m"); it != fragment.end()) {
      if (!it->is_array()) throw InvalidSample("anchor_distances_m must be an array");
      dialogue::SetDistances set;
      for (const auto& d : *it) {
        if (!d.is_number() || d.get<double>() < 0.0) throw InvalidSample("distances must be numbers >= 0");
        set.meters.push_back(d.get<double>());
      }
      edits.push_back(std::move(set));
    }
    draft = dialogue::apply_edits(std::move(draft), edits);
    if (auto it = fragment.find("area"); it != fragment.end()) {
      const match::QueryDraft part = match::draft_from_json(json{{"area", *it}});
      if (!part.area && !part.area_name) throw InvalidSample("area must not be null");
      draft.area = part.area;
      draft.area_name = part.area_name;
    }
  } catch (const match::InvalidQuery& e) {
    throw InvalidSample(e.what());
  }
  return draft;
}

WalkSample generate_sample(const SynthGraph& graph, llm::ChatBackend& backend, std::uint64_t seed,
                           const GenerateOptions& options) {
  std::mt19937_64 rng(seed);
  WalkSample sample;
  sample.seed = seed;
  sample.path = random_walk(graph, rng, options.max_len);
  const std::size_t num = 2 + static_cast<std::size_t>(rng() % 2);

  match::QueryDraft draft;
  bool produced = false;
  try {
    for (const auto& name : sample.path) {
      if (name == dialogue::kStopState) break;
      const auto& st = graph.state(name);
      const std::string prompt = render_prompt(st.prompt, num, st.name, st.role);
      const std::uint64_t variant = rng() >> 1;  // fits a signed 64-bit JSON/text round trip
      if (st.role == llm::Role::system) {
        sample.dialogue.push_back({llm::Role::system, prompt});
        continue;
      }
      auto request = [&](std::string_view kind, std::uint64_t v) {
        llm::HintList hints{{"state", st.name},
                            {"role", std::string(llm::to_string(st.role))},
                            {"request", std::string(kind)},
                            {"variant", std::to_string(v)},
                            {"num", std::to_string(num)}};
        std::vector<llm::ChatMessage> messages{{llm::Role::system, llm::compose_system_message(prompt, hints)}};
        messages.insert(messages.end(), sample.dialogue.begin(), sample.dialogue.end());
        return backend.complete(messages, options.constraints);
      };

      std::string text;
      for (int attempt = 0; attempt < options.attempts && text.empty(); ++attempt) {
        text = text::trim(request("text", variant + static_cast<std::uint64_t>(attempt)));
      }
      if (text.empty()) throw SampleDiscarded("empty text at state " + st.name);
      sample.dialogue.push_back({st.role, std::move(text)});

      if (st.produces_query) {
        std::optional<std::string> problem = "no attempts";
        for (int attempt = 0; attempt < options.attempts && problem; ++attempt) {
          problem = try_merge(draft, request("query", variant + static_cast<std::uint64_t>(attempt)));
        }
        if (problem) throw SampleDiscarded("invalid query fragment at state " + st.name + ": " + *problem);
        produced = true;
      }
    }
  } catch (const llm::RemoteError& e) {
    throw SampleDiscarded(std::string("backend error: ") + e.what());
  }
  if (produced) {
    sample.query = match::to_json(draft);
    match::draft_from_json(*sample.query);  // schema self-check
  }
  return sample;
}

json GenerationReport::to_json() const {
  return {{"requested", requested},       {"written", written}, {"discarded", discarded},
          {"discard_reasons", discard_reasons}, {"visits", visits},   {"seed", master_seed}};
}

GenerationReport generate_dataset(const SynthGraph& graph, llm::ChatBackend& backend,
                                  const DatasetOptions& options, std::ostream& out) {
  if (options.n < 1) throw ContractViolation("n must be at least 1");
  GenerationReport report;
  report.requested = options.n;
  report.master_seed = options.seed;
  const std::size_t jobs = std::max<std::size_t>(1, options.jobs);
  const std::size_t give_up = 10 * options.n + 100;

  struct Attempt {
    std::optional<WalkSample> sample;
    std::string reason;
  };
  auto attempt = [&](std::uint64_t seed) {
    Attempt a;
    try {
      a.sample = generate_sample(graph, backend, seed, options.generate);
    } catch (const SampleDiscarded& e) {
      a.reason = e.reason();
    }
    return a;
  };

  std::uint64_t next_seed = options.seed;
  while (report.written < options.n) {
    if (report.discarded > give_up) {
      throw Error("GENERATION_STALLED", std::to_string(report.discarded) + " samples discarded in a row");
    }
    const std::size_t batch = jobs == 1 ? 1 : std::min(jobs * 8, options.n - report.written);
    std::vector<Attempt> results(batch);
    if (jobs == 1) {
      results[0] = attempt(next_seed);
    } else {
      std::vector<std::future<Attempt>> futures;
      for (std::size_t i = 0; i < batch; ++i) futures.push_back(std::async(std::launch::async, attempt, next_seed + i));
      for (std::size_t i = 0; i < batch; ++i) results[i] = futures[i].get();
    }
    next_seed += batch;
    for (auto& a : results) {
      if (!a.sample) {
        ++report.discarded;
        ++report.discard_reasons[a.reason];
        continue;
      }
      a.sample->id = report.written++;
      for (const auto& s : a.sample->path) ++report.visits[s];
      out << to_jsonl_line(*a.sample) << '\n';
    }
  }
  return report;
}

GenerationReport generate_dataset(const SynthGraph& graph, llm::ChatBackend& backend,
                                  const DatasetOptions& options, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IO_ERROR", "cannot write " + path.string());
  GenerationReport report = generate_dataset(graph, backend, options, out);
  out.flush();
  if (!out) throw Error("IO_ERROR", "write failed: " + path.string());
  return report;
}

json to_json(const WalkSample& s) {
  json dialogue = json::array();
  for (const auto& m : s.dialogue) dialogue.push_back({{"role", llm::to_string(m.role)}, {"content", m.content}});
  return {{"id", s.id},
          {"seed", s.seed},
          {"path", s.path},
          {"dialogue", std::move(dialogue)},
          {"query", s.query ? *s.query : json(nullptr)}};
}

std::string to_jsonl_line(const WalkSample& s) { return to_json(s).dump(); }

WalkSample sample_from_json(const json& j, const SynthGraph* graph) {
  if (!j.is_object()) throw InvalidSample("sample must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "id" && key != "seed" && key != "path" && key != "dialogue" && key != "query") {
      throw InvalidSample("unexpected key: " + key);
    }
  }
  auto field = [&](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) throw InvalidSample(std::string("missing key: ") + key);
    return *it;
  };
  WalkSample s;
  const json& id = field("id");
  const json& seed = field("seed");
  if (!id.is_number_unsigned() && !(id.is_number_integer() && id.get<std::int64_t>() >= 0)) {
    throw InvalidSample("id must be a non-negative integer");
  }
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    throw InvalidSample("seed must be a non-negative integer");
  }
  s.id = id.get<std::uint64_t>();
  s.seed = seed.get<std::uint64_t>();

  const json& path = field("path");
  if (!path.is_array() || path.empty()) throw InvalidSample("path must be a non-empty array");
  for (const auto& p : path) {
    if (!p.is_string()) throw InvalidSample("path entries must be strings");
    s.path.push_back(p.get<std::string>());
  }
  if (s.path.back() != dialogue::kStopState) throw InvalidSample("path must end at stop");

  const json& turns = field("dialogue");
  if (!turns.is_array()) throw InvalidSample("dialogue must be an array");
  for (const auto& t : turns) {
    if (!t.is_object() || t.size() != 2 || !t.contains("role") || !t.contains("content") ||
        !t["role"].is_string() || !t["content"].is_string()) {
      throw InvalidSample("dialogue turns must be {\"role\",\"content\"} strings");
    }
    try {
      s.dialogue.push_back({llm::role_from_string(t["role"].get<std::string>()), t["content"].get<std::string>()});
    } catch (const ContractViolation& e) {
      throw InvalidSample(e.what());
    }
  }
  if (s.dialogue.size() + 1 != s.path.size()) throw InvalidSample("dialogue needs one turn per non-stop state");

  const json& query = field("query");
  if (!query.is_null()) {
    try {
      match::draft_from_json(query);
    } catch (const match::InvalidQuery& e) {
      throw InvalidSample(std::string("query: ") + e.what());
    }
    s.query = query;
  }

  if (graph) {
    if (s.path.front() != graph->start()) throw InvalidSample("path does not begin at the start state");
    bool produces = false;
    for (std::size_t i = 0; i < s.path.size(); ++i) {
      const auto* st = graph->config().find(s.path[i]);
      if (!st) throw InvalidSample("unknown state in path: " + s.path[i]);
      produces = produces || st->produces_query;
      if (i + 1 < s.path.size()) {
        if (!graph->has_edge(s.path[i], s.path[i + 1])) {
          throw InvalidSample("not an edge: " + s.path[i] + " -> " + s.path[i + 1]);
        }
        if (s.dialogue[i].role != st->role) throw InvalidSample("turn role differs from state role at " + s.path[i]);
      }
    }
    if (produces != s.query.has_value()) throw InvalidSample("query presence does not match the visited states");
  }
  return s;
}

std::vector<WalkSample> load_dataset(const std::filesystem::path& path, const SynthGraph* graph) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IO_ERROR", "cannot open " + path.string());
  std::vector<WalkSample> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (text::trim(line).empty()) continue;
    const json j = json::parse(line, nullptr, false);
    try {
      if (j.is_discarded()) throw InvalidSample("not valid JSON");
      out.push_back(sample_from_json(j, graph));
    } catch (const InvalidSample& e) {
      throw InvalidSample(path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

json training_example(const WalkSample& s) {
  json messages = json::array();
  for (const auto& m : s.dialogue) messages.push_back({{"role", llm::to_string(m.role)}, {"content", m.content}});
  messages.push_back({{"role", "assistant"}, {"content", s.query ? s.query->dump() : std::string("null")}});
  return {{"messages", std::move(messages)}};
}

}  // namespace seqgpt::synth
