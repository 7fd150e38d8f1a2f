#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "seqgpt/match/query.hpp"

// Rule-based extractors for the runtime dialogue. They return edits; the
// session decides how to merge them into its draft.
namespace seqgpt::dialogue {

enum class EditSource { enumeration, add, any_within };

struct AppendExample {
  match::DraftExample example;
  EditSource source = EditSource::enumeration;

  friend bool operator==(const AppendExample&, const AppendExample&) = default;
};

/// Distances for slots 2.. in list order.
struct SetDistances {
  std::vector<double> meters;

  friend bool operator==(const SetDistances&, const SetDistances&) = default;
};

using ExampleEdit = std::variant<AppendExample, SetDistances>;

/// Recognizes:
///   "... places like 1. X and 2. Y"  /  "... places like a X and a Y"
///   "add a C" / "add an C" / "add \"Name\"" / "add Name"
///   "any C within N meters"
///   "the distance(s) ... is/are N[, M ...] meters"
/// Items that are capitalized or quoted become named examples.
std::vector<ExampleEdit> extract_examples(std::string_view text);

struct AreaSpec {
  std::optional<geo::Circle> circle;  // explicit "lat .. lon .. radius .."
  std::optional<std::string> name;    // "in/at/near/around PLACE"

  bool empty() const noexcept { return !circle && !name; }
};

/// `allow_bare_name` also accepts a short capitalized reply ("Sydney") as a
/// place name; used where the area is the expected answer.
AreaSpec extract_area(std::string_view text, bool allow_bare_name = false);

struct Intent {
  bool affirm = false;
  bool negate = false;
  bool finish = false;
  bool search = false;

  friend bool operator==(const Intent&, const Intent&) = default;
};

Intent classify_intent(std::string_view text);

/// Appends keep user order. A category-only append with a distance fills a
/// trailing same-category slot that still lacks one (the "add a hotel" then
/// "any hotel within 200 meters" pattern); a named append replaces such a
/// placeholder. Slot 1 is always at distance 0.
match::QueryDraft apply_edits(match::QueryDraft draft, const std::vector<ExampleEdit>& edits);

/// Trailing category-only example that still needs a distance (or a name)
/// while every earlier slot is complete, e.g. after "add a hotel" to two
/// placed examples.
const match::DraftExample* pending_example(const match::QueryDraft& draft) noexcept;

/// True when every slot has a distance (slot 1 implicitly 0) and there is at
/// least one example.
bool examples_complete(const match::QueryDraft& draft) noexcept;

/// Parses "461", "461 m", "461 meters", "1.5 km" -> meters.
std::optional<double> parse_meters(std::string_view number, std::string_view unit);

}  // namespace seqgpt::dialogue
