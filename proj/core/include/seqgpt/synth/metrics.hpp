#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "seqgpt/llm/chat.hpp"
#include "seqgpt/synth/generator.hpp"

namespace seqgpt::synth {

/// Lowercased ASCII alphanumeric runs.
std::vector<std::string> bleu_tokens(std::string_view text);

/// BLEU of one hypothesis against references: clipped n-gram precisions
/// with uniform weights over 1..max_n, add-one smoothing on n > 1, brevity
/// penalty against the closest reference length (shorter wins ties); 0 when
/// no unigram matches.
double sentence_bleu(const std::vector<std::string>& hypothesis,
                     const std::vector<std::vector<std::string>>& references, int max_n = 4);

/// Mean BLEU of each dialogue's concatenated user utterances against all
/// other dialogues. Requires at least two dialogues.
double self_bleu(const std::vector<std::vector<std::string>>& dialogues, int max_n = 4);

/// User utterances of each sample, in order.
std::vector<std::vector<std::string>> user_utterances(const std::vector<WalkSample>& samples);

struct StateAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const noexcept { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

/// Asks the backend ("@request: signal") for the next state after each
/// path step, given the dialogue so far, and compares with the recorded
/// path. With a graph, "@allowed" lists the state's targets by descending
/// weight. Backend errors and unparsable replies count as wrong.
StateAccuracy eval_state_accuracy(const std::vector<WalkSample>& samples, llm::ChatBackend& backend,
                                  const SynthGraph* graph = nullptr);

}  // namespace seqgpt::synth
