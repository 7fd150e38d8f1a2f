#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "seqgpt/geo/poi_store.hpp"
#include "seqgpt/match/query.hpp"

namespace seqgpt::match {

inline constexpr std::size_t kUnboundedCap = std::numeric_limits<std::size_t>::max();

struct MatchConfig {
  /// Candidates kept per non-anchor slot (closest ring deviation first).
  std::size_t cap = 8;
};

class InstanceTooLarge : public Error {
 public:
  explicit InstanceTooLarge(double product)
      : Error("INSTANCE_TOO_LARGE",
              "brute-force candidate product " + std::to_string(product) + " exceeds 1e7") {}
};

inline constexpr double kBruteForceLimit = 1e7;

/// Mean absolute deviation between the realized distances from
/// assignment[0] and the query's anchor distances; 0 for a single slot.
double score(const ExemplarQuery& query, std::span<const geo::Poi> assignment);

/// Ranking order: ascending score, then lexicographic id tuple.
bool ranks_before(const MatchResult& a, const MatchResult& b);

/// Finds up to k location sets inside the query area. For every anchor
/// candidate, slot i candidates come from a ring query around it, trimmed
/// to `config.cap` per slot; all injective combinations are scored.
std::vector<MatchResult> match_exemplar(const geo::PoiStore& store, const ExemplarQuery& query,
                                        const MatchConfig& config = {});

/// Process-wide count of match_exemplar calls (for cache instrumentation).
std::uint64_t match_invocations() noexcept;

/// Exhaustive reference for small instances. Throws InstanceTooLarge when the
/// per-slot candidate product exceeds kBruteForceLimit.
std::vector<MatchResult> brute_force_match(const geo::PoiStore& store, const ExemplarQuery& query);

}  // namespace seqgpt::match
