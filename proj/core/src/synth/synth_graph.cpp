#include "seqgpt/synth/synth_graph.hpp"

#include <algorithm>
#include <deque>

namespace seqgpt::synth {

using dialogue::GraphError;
using dialogue::kStopState;

SynthGraph::SynthGraph(dialogue::GraphConfig config) : config_(std::move(config)) {
  if (!config_.find(kStopState)) throw GraphError("synthesis graph needs a 'stop' state");
  const std::size_t n = config_.states.size();
  for (const auto& s : config_.states) {
    if (s.name == kStopState) continue;
    const bool positive = std::any_of(s.transitions.begin(), s.transitions.end(),
                                      [](const auto& t) { return t.weight > 0.0; });
    if (!positive) throw GraphError("state " + s.name + " has no positive outgoing weight");
  }

  // Reverse BFS from stop gives every state's distance; the exit path
  // follows the first transition (in file order) that gets one step closer.
  std::vector<std::vector<std::size_t>> incoming(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (config_.states[i].name == kStopState) continue;
    for (const auto& t : config_.states[i].transitions) {
      if (t.weight > 0.0) incoming[config_.index_of(t.to)].push_back(i);
    }
  }
  constexpr std::size_t kInf = static_cast<std::size_t>(-1);
  std::vector<std::size_t> dist(n, kInf);
  const std::size_t stop = config_.index_of(kStopState);
  dist[stop] = 0;
  std::deque<std::size_t> queue{stop};
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t u : incoming[v]) {
      if (dist[u] == kInf) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  exits_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (dist[i] == kInf) throw GraphError("stop is unreachable from state " + config_.states[i].name);
    std::size_t cur = i;
    while (cur != stop) {
      for (const auto& t : config_.states[cur].transitions) {
        const std::size_t nxt = config_.index_of(t.to);
        if (t.weight > 0.0 && dist[nxt] + 1 == dist[cur]) {
          exits_[i].push_back(t.to);
          cur = nxt;
          break;
        }
      }
    }
  }
}

SynthGraph SynthGraph::load(const std::filesystem::path& path) {
  return SynthGraph(dialogue::GraphConfig::load(path));
}

const dialogue::StateConfig& SynthGraph::state(std::string_view name) const {
  const auto* s = config_.find(name);
  if (!s) throw GraphError("unknown state: " + std::string(name));
  return *s;
}

bool SynthGraph::has_edge(std::string_view from, std::string_view to) const {
  const auto* s = config_.find(from);
  if (!s) return false;
  return std::any_of(s->transitions.begin(), s->transitions.end(), [&](const auto& t) { return t.to == to; });
}

const std::vector<std::string>& SynthGraph::shortest_exit(std::string_view from) const {
  return exits_[config_.index_of(from)];
}

double unit_draw(std::mt19937_64& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::string> random_walk(const SynthGraph& graph, std::mt19937_64& rng, std::size_t max_len) {
  if (max_len < 1) throw ContractViolation("max_len must be at least 1");
  std::vector<std::string> path{graph.start()};
  while (path.back() != kStopState) {
    if (path.size() >= max_len) {
      const auto& exit = graph.shortest_exit(path.back());
      path.insert(path.end(), exit.begin(), exit.end());
      break;
    }
    const auto& transitions = graph.state(path.back()).transitions;
    double total = 0.0;
    for (const auto& t : transitions) total += t.weight;
    const double x = unit_draw(rng) * total;
    double acc = 0.0;
    const dialogue::Transition* chosen = nullptr;
    for (const auto& t : transitions) {
      if (t.weight <= 0.0) continue;
      acc += t.weight;
      chosen = &t;
      if (x < acc) break;
    }
    path.push_back(chosen->to);
  }
  return path;
}

std::vector<std::string> random_walk(const SynthGraph& graph, std::uint64_t seed, std::size_t max_len) {
  std::mt19937_64 rng(seed);
  return random_walk(graph, rng, max_len);
}

}  // namespace seqgpt::synth
