#include "seqgpt/synth/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "seqgpt/dialogue/signal.hpp"
#include "seqgpt/llm/hints.hpp"

namespace seqgpt::synth {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

std::vector<std::string> bleu_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double sentence_bleu(const std::vector<std::string>& hyp, const std::vector<std::vector<std::string>>& refs,
                     int max_n) {
  if (max_n < 1) throw ContractViolation("max_n must be at least 1");
  if (refs.empty()) throw ContractViolation("BLEU needs at least one reference");
  std::vector<double> log_p;
  for (int n = 1; n <= max_n; ++n) {
    const auto hyp_counts = ngram_counts(hyp, static_cast<std::size_t>(n));
    std::map<Ngram, std::size_t> max_ref;
    for (const auto& r : refs) {
      for (const auto& [g, c] : ngram_counts(r, static_cast<std::size_t>(n))) max_ref[g] = std::max(max_ref[g], c);
    }
    std::size_t matched = 0;
    std::size_t total = 0;
    for (const auto& [g, c] : hyp_counts) {
      total += c;
      auto it = max_ref.find(g);
      if (it != max_ref.end()) matched += std::min(c, it->second);
    }
    total = std::max<std::size_t>(total, 1);
    if (n == 1 && matched == 0) return 0.0;
    const double p = n == 1 ? static_cast<double>(matched) / static_cast<double>(total)
                            : static_cast<double>(matched + 1) / static_cast<double>(total + 1);
    log_p.push_back(std::log(p) / max_n);
  }
  const double c = static_cast<double>(hyp.size());
  double r = 0.0;
  {
    std::size_t best = refs.front().size();
    for (const auto& ref : refs) {
      const auto d = [&](std::size_t len) { return len > hyp.size() ? len - hyp.size() : hyp.size() - len; };
      if (d(ref.size()) < d(best) || (d(ref.size()) == d(best) && ref.size() < best)) best = ref.size();
    }
    r = static_cast<double>(best);
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  double sum = 0.0;
  for (double v : log_p) sum += v;
  return bp * std::exp(sum);
}

double self_bleu(const std::vector<std::vector<std::string>>& dialogues, int max_n) {
  if (dialogues.size() < 2) throw ContractViolation("self-BLEU needs at least two dialogues");
  std::vector<std::vector<std::string>> tokens;
  for (const auto& d : dialogues) {
    std::vector<std::string> t;
    for (const auto& u : d) {
      auto part = bleu_tokens(u);
      t.insert(t.end(), part.begin(), part.end());
    }
    tokens.push_back(std::move(t));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::vector<std::vector<std::string>> refs;
    for (std::size_t j = 0; j < tokens.size(); ++j) {
      if (j != i) refs.push_back(tokens[j]);
    }
    sum += sentence_bleu(tokens[i], refs, max_n);
  }
  return sum / static_cast<double>(tokens.size());
}

std::vector<std::vector<std::string>> user_utterances(const std::vector<WalkSample>& samples) {
  std::vector<std::vector<std::string>> out;
  for (const auto& s : samples) {
    std::vector<std::string> u;
    for (const auto& m : s.dialogue) {
      if (m.role == llm::Role::user) u.push_back(m.content);
    }
    out.push_back(std::move(u));
  }
  return out;
}

StateAccuracy eval_state_accuracy(const std::vector<WalkSample>& samples, llm::ChatBackend& backend,
                                  const SynthGraph* graph) {
  StateAccuracy acc;
  for (const auto& s : samples) acc.total += s.path.empty() ? 0 : s.path.size() - 1;
  if (acc.total == 0) throw ContractViolation("no transitions to evaluate");

  for (const auto& s : samples) {
    for (std::size_t i = 0; i + 1 < s.path.size(); ++i) {
      const std::string& state = s.path[i];
      std::string allowed;
      std::string prompt;
      if (graph) {
        if (const auto* st = graph->config().find(state)) {
          prompt = st->prompt;
          auto transitions = st->transitions;
          std::stable_sort(transitions.begin(), transitions.end(),
                           [](const auto& a, const auto& b) { return a.weight > b.weight; });
          for (const auto& t : transitions) allowed += (allowed.empty() ? "" : ",") + t.to;
        }
      }
      llm::HintList hints{{"state", state}, {"request", "signal"}, {"variant", std::to_string(i)}};
      if (!allowed.empty()) hints.emplace_back("allowed", allowed);
      std::vector<llm::ChatMessage> messages{{llm::Role::system, llm::compose_system_message(prompt, hints)}};
      for (std::size_t t = 0; t <= i && t < s.dialogue.size(); ++t) messages.push_back(s.dialogue[t]);
      try {
        const auto token = dialogue::split_signal(backend.complete(messages)).token;
        const std::string predicted = token.kind == dialogue::SignalKind::stay ? state : token.target;
        if (predicted == s.path[i + 1]) ++acc.correct;
      } catch (const Error&) {
        // counted as wrong
      }
    }
  }
  return acc;
}

}  // namespace seqgpt::synth
