#include "seqgpt/dialogue/extract.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

#include "seqgpt/text.hpp"

namespace seqgpt::dialogue {

using namespace seqgpt::text;

namespace {

using std::regex_constants::icase;

constexpr const char* kNumber = R"((\d+(?:\.\d+)?))";
constexpr const char* kUnit = R"((km|kilometers?|kilometres?|meters?|metres?|m)\b)";

struct Span {
  std::size_t begin;
  std::size_t end;
};

bool overlaps(const std::vector<Span>& used, std::size_t b, std::size_t e) {
  return std::any_of(used.begin(), used.end(), [&](const Span& s) { return b < s.end && s.begin < e; });
}

std::string strip_quotes(std::string s) {
  auto unquote = [&](std::string_view open, std::string_view close) {
    if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
      s = s.substr(open.size(), s.size() - open.size() - close.size());
      return true;
    }
    return false;
  };
  if (unquote("\"", "\"") || unquote("'", "'") || unquote("“", "”")) return trim(s);
  return s;
}

bool is_quoted(std::string_view s) {
  return (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) ||
         (s.starts_with("“") && s.ends_with("”"));
}

// Strips punctuation and dangling conjunctions left over from splitting.
std::string clean_item(std::string s) {
  s = trim(s);
  for (bool changed = true; changed && !s.empty();) {
    changed = false;
    while (!s.empty() && (s.back() == ',' || s.back() == ';' || s.back() == ':')) {
      s.pop_back();
      changed = true;
    }
    s = trim(s);
    for (std::string_view tail : {" and", " or", " &"}) {
      if (s.size() > tail.size() && to_lower(s).ends_with(tail)) {
        s.resize(s.size() - tail.size());
        s = trim(s);
        changed = true;
      }
    }
  }
  return s;
}

const std::regex& any_within_re() {
  static const std::regex re(std::string(R"(\bany\s+([A-Za-z][A-Za-z '\-]*?)\s+within\s+)") + kNumber +
                                 R"(\s*)" + kUnit,
                             icase);
  return re;
}

std::optional<match::DraftExample> classify_item(std::string item) {
  item = clean_item(std::move(item));
  if (item.empty()) return std::nullopt;
  match::DraftExample ex;
  std::smatch m;
  if (std::regex_search(item, m, any_within_re()) && m.position(0) == 0) {
    ex.kind = match::ExampleKind::category_only;
    ex.category = geo::normalize_category(m[1].str());
    ex.anchor_distance_m = parse_meters(m[2].str(), m[3].str());
    return ex;
  }
  if (is_quoted(item)) {
    ex.kind = match::ExampleKind::named;
    ex.name = strip_quotes(item);
    return ex;
  }
  static const std::regex article(R"(^(?:a|an|the|some|any)\s+)", icase);
  std::string rest = std::regex_replace(item, article, "", std::regex_constants::format_first_only);
  rest = trim(rest);
  if (rest.empty()) return std::nullopt;
  if (is_quoted(rest) || starts_with_upper(rest)) {
    ex.kind = match::ExampleKind::named;
    ex.name = strip_quotes(rest);
  } else {
    ex.kind = match::ExampleKind::category_only;
    ex.category = geo::normalize_category(rest);
  }
  return ex;
}

std::size_t sentence_end(const std::string& s, std::size_t from) {
  auto pos = s.find_first_of(".?!", from);
  return pos == std::string::npos ? s.size() : pos;
}

// "places like ..." enumerations. Returns the consumed span.
std::optional<Span> extract_enumeration(const std::string& text,
                                        std::vector<std::pair<std::size_t, ExampleEdit>>& out) {
  static const std::regex lead(R"(\bplaces?\s+(?:like|such\s+as)\s+)", icase);
  std::smatch m;
  if (!std::regex_search(text, m, lead)) return std::nullopt;
  const std::size_t seg_begin = static_cast<std::size_t>(m.position(0) + m.length(0));

  static const std::regex marker(R"((?:^|\s)(\d+)\s*[.)]\s+)");
  std::vector<std::pair<std::size_t, std::size_t>> marks;  // [marker start, item start)
  const std::string seg_full = text.substr(seg_begin);
  for (auto it = std::sregex_iterator(seg_full.begin(), seg_full.end(), marker); it != std::sregex_iterator();
       ++it) {
    marks.emplace_back(static_cast<std::size_t>(it->position(0)),
                       static_cast<std::size_t>(it->position(0) + it->length(0)));
  }

  std::vector<std::string> items;
  std::size_t seg_end = 0;
  if (!marks.empty() && trim(seg_full.substr(0, marks[0].first)).empty()) {
    for (std::size_t i = 0; i < marks.size(); ++i) {
      const std::size_t b = marks[i].second;
      std::size_t e = i + 1 < marks.size() ? marks[i + 1].first : std::string::npos;
      if (e == std::string::npos) {
        e = sentence_end(seg_full, b);
      } else {
        // A sentence break before the next marker ends the enumeration.
        const std::size_t stop = sentence_end(seg_full, b);
        if (stop < e && !trim(seg_full.substr(stop + 1, e - stop - 1)).empty()) {
          items.push_back(seg_full.substr(b, stop - b));
          seg_end = stop;
          marks.clear();
          break;
        }
      }
      items.push_back(seg_full.substr(b, e - b));
      seg_end = e;
    }
  } else {
    seg_end = sentence_end(seg_full, 0);
    static const std::regex sep(R"(\s*,\s*(?:and\s+|or\s+)?|\s+and\s+|\s+or\s+|\s*&\s*)", icase);
    const std::string seg = seg_full.substr(0, seg_end);
    for (auto it = std::sregex_token_iterator(seg.begin(), seg.end(), sep, -1);
         it != std::sregex_token_iterator(); ++it) {
      items.push_back(it->str());
    }
  }

  for (auto& item : items) {
    if (auto ex = classify_item(item)) {
      out.emplace_back(seg_begin, AppendExample{std::move(*ex), EditSource::enumeration});
    }
  }
  return Span{static_cast<std::size_t>(m.position(0)), seg_begin + seg_end};
}

void extract_adds(const std::string& text, std::vector<Span>& used,
                  std::vector<std::pair<std::size_t, ExampleEdit>>& out) {
  static const std::regex add_re(
      R"(\badd(?:ing)?\s+(?:(a|an|another|one\s+more|some|any)\s+)?(.+?)(?=\s+(?:within|at|about|around|that|which|near|to|as|with|from|please)\b|[.?!,;]|$))",
      icase);
  static const std::regex dist_re(std::string(R"(^[^.?!]*?(?:within|about|around|at|,)?\s*)") + kNumber +
                                      R"(\s*)" + kUnit,
                                  icase);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), add_re); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const auto b = static_cast<std::size_t>(m.position(0));
    std::size_t e = b + static_cast<std::size_t>(m.length(0));
    if (overlaps(used, b, e)) continue;
    const std::string article = m[1].str();
    std::string phrase = clean_item(m[2].str());
    if (phrase.empty()) continue;
    match::DraftExample ex;
    if (is_quoted(phrase) || starts_with_upper(phrase)) {
      ex.kind = match::ExampleKind::named;
      ex.name = strip_quotes(phrase);
    } else {
      ex.kind = match::ExampleKind::category_only;
      ex.category = geo::normalize_category(phrase);
    }
    const std::string rest = text.substr(e, sentence_end(text, e) - e);
    std::smatch d;
    if (std::regex_search(rest, d, dist_re)) {
      ex.anchor_distance_m = parse_meters(d[1].str(), d[2].str());
      e += static_cast<std::size_t>(d.position(0) + d.length(0));
    }
    used.push_back({b, e});
    out.emplace_back(b, AppendExample{std::move(ex), EditSource::add});
  }
}

void extract_any_within(const std::string& text, std::vector<Span>& used,
                        std::vector<std::pair<std::size_t, ExampleEdit>>& out) {
  for (auto it = std::sregex_iterator(text.begin(), text.end(), any_within_re()); it != std::sregex_iterator();
       ++it) {
    const auto& m = *it;
    const auto b = static_cast<std::size_t>(m.position(0));
    const auto e = b + static_cast<std::size_t>(m.length(0));
    if (overlaps(used, b, e)) continue;
    match::DraftExample ex;
    ex.kind = match::ExampleKind::category_only;
    ex.category = geo::normalize_category(m[1].str());
    ex.anchor_distance_m = parse_meters(m[2].str(), m[3].str());
    used.push_back({b, e});
    out.emplace_back(b, AppendExample{std::move(ex), EditSource::any_within});
  }
}

void extract_distances(const std::string& text, std::vector<Span>& used,
                       std::vector<std::pair<std::size_t, ExampleEdit>>& out) {
  static const std::regex list_re(
      std::string(R"(\bdistances?\b[^.?!]*?\b(?:is|are)\s+((?:)") + kNumber + R"((?:\s*)" + kUnit +
          R"()?(?:\s*,\s*|\s+and\s+|\s*&\s*)?)+))",
      icase);
  static const std::regex num_re(std::string(kNumber) + R"((?:\s*)" + kUnit + R"()?)", icase);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), list_re); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const auto b = static_cast<std::size_t>(m.position(0));
    const auto e = b + static_cast<std::size_t>(m.length(0));
    if (overlaps(used, b, e)) continue;
    SetDistances set;
    const std::string list = m[1].str();
    for (auto n = std::sregex_iterator(list.begin(), list.end(), num_re); n != std::sregex_iterator(); ++n) {
      if (auto v = parse_meters((*n)[1].str(), (*n)[2].str())) set.meters.push_back(*v);
    }
    if (set.meters.empty()) continue;
    used.push_back({b, e});
    out.emplace_back(b, std::move(set));
  }
}

bool has_word(const std::set<std::string>& words, std::initializer_list<std::string_view> any) {
  return std::any_of(any.begin(), any.end(), [&](std::string_view w) { return words.contains(std::string(w)); });
}

}  // namespace

std::optional<double> parse_meters(std::string_view number, std::string_view unit) {
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(std::string(number), &used);
    if (used != number.size()) return std::nullopt;
  } catch (const std::exception&) {
    return std::nullopt;
  }
  const std::string u = to_lower(unit);
  if (u.starts_with("k")) v *= 1000.0;
  return v;
}

std::vector<ExampleEdit> extract_examples(std::string_view input) {
  const std::string text(input);
  std::vector<std::pair<std::size_t, ExampleEdit>> found;
  std::vector<Span> used;
  if (auto span = extract_enumeration(text, found)) used.push_back(*span);
  extract_adds(text, used, found);
  extract_any_within(text, used, found);
  extract_distances(text, used, found);
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<ExampleEdit> edits;
  edits.reserve(found.size());
  for (auto& [pos, edit] : found) edits.push_back(std::move(edit));
  return edits;
}

AreaSpec extract_area(std::string_view input, bool allow_bare_name) {
  const std::string text = trim(input);
  AreaSpec spec;

  static const std::regex explicit_re(
      std::string(R"(\blat(?:itude)?\s*[:=]?\s*(-?\d+(?:\.\d+)?)\s*,?\s*(?:lon|lng|long|longitude)\s*[:=]?\s*(-?\d+(?:\.\d+)?)\s*,?\s*radius\s*[:=]?\s*)") +
          kNumber + R"((?:\s*)" + kUnit + ")?",
      icase);
  std::smatch m;
  if (std::regex_search(text, m, explicit_re)) {
    try {
      const double lat = std::stod(m[1].str());
      const double lon = std::stod(m[2].str());
      const auto radius = parse_meters(m[3].str(), m[4].str());
      if (radius) spec.circle = geo::Circle(geo::GeoPoint(lat, lon), *radius);
    } catch (const std::exception&) {
      // Out-of-range coordinates: not an area.
    }
    return spec;
  }

  static const std::regex prep_re(R"((?:^|[\s,])(in|at|near|around)\s+([^.?!,;]+))", icase);
  static const std::regex trailer(R"(\s+(?:please|thanks|thank you)\s*$)", icase);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), prep_re); it != std::sregex_iterator(); ++it) {
    std::string phrase = trim(std::regex_replace((*it)[2].str(), trailer, ""));
    if (phrase.empty() || std::isdigit(static_cast<unsigned char>(phrase[0]))) continue;
    const bool at_start = it->position(0) == 0;
    const auto words = split_words(phrase);
    const bool capitalized = std::any_of(words.begin(), words.end(), [](const std::string& w) {
      return starts_with_upper(w);
    });
    if (!at_start && !capitalized) continue;
    spec.name = strip_quotes(phrase);
    return spec;
  }

  if (allow_bare_name && !text.empty()) {
    std::string bare = text;
    while (!bare.empty() && std::ispunct(static_cast<unsigned char>(bare.back()))) bare.pop_back();
    const auto words = split_words(bare);
    const bool alphabetic = std::all_of(words.begin(), words.end(), [](const std::string& w) {
      return std::all_of(w.begin(), w.end(), [](char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '\'' || c == '-';
      });
    });
    const Intent intent = classify_intent(bare);
    if (!words.empty() && words.size() <= 4 && alphabetic && starts_with_upper(bare) &&
        !(intent.affirm || intent.negate || intent.finish || intent.search)) {
      spec.name = bare;
    }
  }
  return spec;
}

Intent classify_intent(std::string_view text) {
  std::set<std::string> words;
  std::string cur;
  for (char c : to_lower(text)) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      words.insert(std::exchange(cur, {}));
    }
  }
  if (!cur.empty()) words.insert(cur);
  const std::string norm = " " + normalize(text) + " ";
  auto phrase = [&](std::string_view p) { return norm.find(p) != std::string::npos; };

  Intent in;
  in.affirm = has_word(words, {"yes", "yeah", "yep", "yup", "sure", "ok", "okay", "correct", "right", "confirm",
                               "confirmed", "continue", "proceed", "acknowledge", "acknowledged", "perfect",
                               "fine"}) ||
              phrase(" go ahead") || phrase(" sounds good") || phrase(" looks good");
  in.negate = has_word(words, {"no", "nope", "nah", "wrong", "incorrect", "not", "cancel", "change"});
  in.finish = has_word(words, {"bye", "goodbye", "done", "quit", "exit", "stop", "thanks", "thank"}) ||
              phrase(" that's all") || phrase(" that is all");
  in.search = has_word(words, {"search", "find", "run", "start", "go"});
  return in;
}

const match::DraftExample* pending_example(const match::QueryDraft& draft) noexcept {
  const auto& ex = draft.examples;
  if (ex.size() < 3) return nullptr;
  const auto& last = ex.back();
  if (last.kind != match::ExampleKind::category_only || last.anchor_distance_m) return nullptr;
  for (std::size_t i = 1; i + 1 < ex.size(); ++i) {
    if (!ex[i].anchor_distance_m) return nullptr;
  }
  return &last;
}

bool examples_complete(const match::QueryDraft& draft) noexcept {
  if (draft.examples.empty()) return false;
  for (std::size_t i = 1; i < draft.examples.size(); ++i) {
    if (!draft.examples[i].anchor_distance_m) return false;
  }
  return true;
}

match::QueryDraft apply_edits(match::QueryDraft draft, const std::vector<ExampleEdit>& edits) {
  for (const auto& edit : edits) {
    if (const auto* set = std::get_if<SetDistances>(&edit)) {
      for (std::size_t i = 0; i < set->meters.size() && i + 1 < draft.examples.size(); ++i) {
        draft.examples[i + 1].anchor_distance_m = set->meters[i];
      }
      continue;
    }
    const auto& append = std::get<AppendExample>(edit);
    match::DraftExample ex = append.example;
    if (draft.examples.size() >= 2) {
      const auto& last = draft.examples.back();
      const bool fills = ex.kind == match::ExampleKind::category_only && ex.anchor_distance_m &&
                         last.kind == match::ExampleKind::category_only && !last.anchor_distance_m &&
                         ex.category == last.category;
      if (fills || (ex.kind == match::ExampleKind::named && pending_example(draft))) {
        draft.examples.back() = std::move(ex);
        continue;
      }
    }
    if (draft.examples.empty()) ex.anchor_distance_m = 0.0;
    draft.examples.push_back(std::move(ex));
  }
  if (!draft.examples.empty()) draft.examples.front().anchor_distance_m = 0.0;
  return draft;
}

}  // namespace seqgpt::dialogue
