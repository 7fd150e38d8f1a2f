#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqgpt/llm/chat.hpp"
#include "seqgpt/match/query.hpp"
#include "seqgpt/synth/synth_graph.hpp"

namespace seqgpt::synth {

class SampleDiscarded : public Error {
 public:
  explicit SampleDiscarded(const std::string& reason) : Error("SAMPLE_DISCARDED", reason), reason_(reason) {}
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

class InvalidSample : public Error {
 public:
  explicit InvalidSample(const std::string& m) : Error("INVALID_SAMPLE", m) {}
};

struct WalkSample {
  std::uint64_t id = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> path;
  std::vector<llm::ChatMessage> dialogue;  // one turn per non-stop state
  std::optional<nlohmann::json> query;     // partial draft wire form

  friend bool operator==(const WalkSample&, const WalkSample&) = default;
};

struct GenerateOptions {
  std::size_t max_len = 40;
  int attempts = 3;  // per query fragment
  llm::Constraints constraints;
};

/// Replaces {NUM}, {STATE} and {ROLE} in a prompt template.
std::string render_prompt(std::string_view tmpl, std::size_t num, std::string_view state, llm::Role role);

/// Folds one generator query fragment into a draft. Accepted forms: an
/// array of category strings, or an object with only "examples", "area"
/// and "anchor_distances_m". Throws InvalidSample otherwise.
match::QueryDraft merge_fragment(match::QueryDraft draft, const nlohmann::json& fragment);

/// One walk plus generated turns. System-role states contribute their
/// rendered prompt verbatim; user/assistant turns come from the backend.
/// Throws SampleDiscarded after `attempts` bad fragments or on a remote
/// failure; ScriptExhausted and BudgetExhausted propagate.
WalkSample generate_sample(const SynthGraph& graph, llm::ChatBackend& backend, std::uint64_t seed,
                           const GenerateOptions& options = {});

struct GenerationReport {
  std::size_t requested = 0;
  std::size_t written = 0;
  std::size_t discarded = 0;
  std::uint64_t master_seed = 0;
  std::map<std::string, std::size_t> discard_reasons;
  std::map<std::string, std::uint64_t> visits;

  nlohmann::json to_json() const;
};

struct DatasetOptions {
  std::size_t n = 2000;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  GenerateOptions generate;
};

/// Writes `n` valid samples as JSONL, trying seeds seed, seed+1, ... in
/// order. Output order and content do not depend on `jobs`.
GenerationReport generate_dataset(const SynthGraph& graph, llm::ChatBackend& backend,
                                  const DatasetOptions& options, std::ostream& out);
GenerationReport generate_dataset(const SynthGraph& graph, llm::ChatBackend& backend,
                                  const DatasetOptions& options, const std::filesystem::path& out);

nlohmann::json to_json(const WalkSample& sample);
std::string to_jsonl_line(const WalkSample& sample);

/// Schema check of one dataset line. With a graph it also checks that the
/// path is a walk of it, that turn roles match state roles and that the
/// query is present exactly when a query-producing state was visited.
WalkSample sample_from_json(const nlohmann::json& j, const SynthGraph* graph = nullptr);

/// Loads and validates a JSONL dataset. Throws InvalidSample with the line number.
std::vector<WalkSample> load_dataset(const std::filesystem::path& path, const SynthGraph* graph = nullptr);

/// {"messages":[...]} with the query dump as a final assistant message.
nlohmann::json training_example(const WalkSample& sample);

}  // namespace seqgpt::synth
