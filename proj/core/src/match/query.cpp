#include "seqgpt/match/query.hpp"

#include <cmath>

namespace seqgpt::match {

std::string_view to_string(ExampleKind kind) noexcept {
  return kind == ExampleKind::named ? "named" : "category_only";
}

void ExemplarQuery::validate() const {
  if (examples.empty()) throw ContractViolation("query needs at least one example");
  if (k == 0) throw ContractViolation("k must be positive");
  if (!std::isfinite(eps_m) || eps_m <= 0.0) throw ContractViolation("eps_m must be positive");
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const ExampleSpec& e = examples[i];
    const std::string slot = "slot " + std::to_string(i + 1);
    if (e.category.empty()) throw ContractViolation(slot + ": empty category");
    if (e.kind == ExampleKind::named && (!e.name || e.name->empty())) {
      throw ContractViolation(slot + ": named example without a name");
    }
    if (!std::isfinite(e.anchor_distance_m) || e.anchor_distance_m < 0.0) {
      throw ContractViolation(slot + ": anchor distance must be finite and >= 0");
    }
    if (i == 0 && e.anchor_distance_m != 0.0) {
      throw ContractViolation("slot 1 must have anchor distance 0");
    }
  }
}

double similarity_from_score(double score_m) noexcept { return 1.0 / (1.0 + score_m / 100.0); }

}  // namespace seqgpt::match
