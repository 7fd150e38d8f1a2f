#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "seqgpt/dialogue/state_graph.hpp"

namespace seqgpt::synth {

/// Graph for dialogue synthesis. On top of the structural checks of
/// GraphConfig it requires a `stop` state, a positive outgoing weight on
/// every other state and `stop` reachable (over positive edges) from every
/// state. Throws dialogue::GraphError.
class SynthGraph {
 public:
  explicit SynthGraph(dialogue::GraphConfig config);
  static SynthGraph load(const std::filesystem::path& path);

  const dialogue::GraphConfig& config() const noexcept { return config_; }
  const dialogue::StateConfig& state(std::string_view name) const;
  const std::string& start() const noexcept { return config_.start; }
  std::size_t size() const noexcept { return config_.states.size(); }

  bool has_edge(std::string_view from, std::string_view to) const;
  /// States after `from` on a shortest positive-weight path, ending in stop.
  const std::vector<std::string>& shortest_exit(std::string_view from) const;

 private:
  dialogue::GraphConfig config_;
  std::vector<std::vector<std::string>> exits_;  // by state index
};

/// Uniform double in [0, 1) from the top 53 bits of one draw, so walks are
/// identical on every platform (std distributions are not).
double unit_draw(std::mt19937_64& rng) noexcept;

/// Weighted walk from the start state until stop. Once the path holds
/// `max_len` states the shortest exit is appended.
std::vector<std::string> random_walk(const SynthGraph& graph, std::mt19937_64& rng, std::size_t max_len = 40);
std::vector<std::string> random_walk(const SynthGraph& graph, std::uint64_t seed, std::size_t max_len = 40);

}  // namespace seqgpt::synth
