#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seqgpt/geo/poi.hpp"

namespace seqgpt::match {

enum class ExampleKind { named, category_only };

std::string_view to_string(ExampleKind kind) noexcept;

/// One resolved example slot. Slot 1 always has anchor distance 0.
struct ExampleSpec {
  ExampleKind kind = ExampleKind::category_only;
  std::optional<std::string> name;
  std::string category;
  double anchor_distance_m = 0.0;

  friend bool operator==(const ExampleSpec&, const ExampleSpec&) = default;
};

inline constexpr std::size_t kDefaultK = 10;
inline constexpr double kDefaultEpsM = 500.0;

struct ExemplarQuery {
  std::vector<ExampleSpec> examples;
  geo::Circle area;
  std::size_t k = kDefaultK;
  double eps_m = kDefaultEpsM;

  /// Throws ContractViolation when an invariant does not hold.
  void validate() const;

  friend bool operator==(const ExemplarQuery&, const ExemplarQuery&) = default;
};

/// An example slot as collected from a user: names may be unresolved,
/// categories unknown, distances not yet stated.
struct DraftExample {
  ExampleKind kind = ExampleKind::category_only;
  std::optional<std::string> name;
  std::string category;
  std::optional<double> anchor_distance_m;

  friend bool operator==(const DraftExample&, const DraftExample&) = default;
};

/// A partially built query. The area may be a resolved circle, a name still
/// awaiting geocoding, or absent.
struct QueryDraft {
  std::vector<DraftExample> examples;
  std::optional<geo::Circle> area;
  std::optional<std::string> area_name;
  std::size_t k = kDefaultK;
  double eps_m = kDefaultEpsM;

  friend bool operator==(const QueryDraft&, const QueryDraft&) = default;
};

struct MatchResult {
  std::vector<geo::Poi> assignment;
  double score_m = 0.0;
  double similarity = 1.0;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Maps a mean distance deviation to (0, 1]: 1 / (1 + score / 100 m).
double similarity_from_score(double score_m) noexcept;

}  // namespace seqgpt::match
