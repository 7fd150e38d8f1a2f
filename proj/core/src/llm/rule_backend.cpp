#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>

#include "seqgpt/dialogue/extract.hpp"
#include "seqgpt/dialogue/signal.hpp"
#include "seqgpt/llm/backends.hpp"
#include "seqgpt/llm/hints.hpp"
#include "seqgpt/match/wire.hpp"
#include "seqgpt/text.hpp"

namespace seqgpt::llm {

namespace {

namespace dlg = seqgpt::dialogue;
using match::DraftExample;
using match::ExampleKind;
using match::QueryDraft;

// ----- runtime replies -------------------------------------------------------

constexpr std::string_view kAreaPrompt =
    "Now I need you to provide a general search area to look within, like a neighborhood, city, region, or "
    "even a specific landmark.";
constexpr std::string_view kSearching = "I'm at hard work to find the best match!";
constexpr std::string_view kAskExamples =
    "Please describe a few places you have in mind, for example: I want to search for places like "
    "1. Suntec City and 2. a gym. The distance in meters of each place from the first place is 400 meters.";
constexpr std::string_view kAskDistances =
    "How far is each place from the first one? For example: The distances from the first place are 300 and "
    "500 meters.";
constexpr std::string_view kGoodbye = "Glad I could help. Goodbye!";

std::string meters(double m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f", std::round(m));
  return buf;
}

std::string label(const DraftExample& e) {
  if (e.kind == ExampleKind::named && e.name) return *e.name;
  return "any " + e.category;
}

std::string short_label(const DraftExample& e) {
  if (e.kind == ExampleKind::named && e.name) return *e.name;
  return "the " + e.category;
}

// "a and b" / "a, b, and c"
std::string oxford(const std::vector<std::string>& items) {
  if (items.size() == 1) return items[0];
  if (items.size() == 2) return items[0] + " and " + items[1];
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    if (i + 1 == items.size()) out += "and ";
    out += items[i];
  }
  return out;
}

std::string picked(const QueryDraft& d) {
  const auto& ex = d.examples;
  std::string out;
  for (std::size_t i = 0; i < ex.size(); ++i) {
    if (i) out += (ex.size() == 2 ? " and " : ", ");
    out += std::to_string(i + 1) + ". " + label(ex[i]);
  }
  return "You have picked " + out + ".";
}

std::string summary(const QueryDraft& d) {
  const auto& ex = d.examples;
  std::string out = picked(d);
  if (ex.size() >= 2) {
    std::vector<std::string> parts;
    for (std::size_t i = 1; i < ex.size(); ++i) {
      parts.push_back(ex[i].anchor_distance_m ? meters(*ex[i].anchor_distance_m) + " meters to " + label(ex[i])
                                              : "an unknown distance to " + label(ex[i]));
    }
    std::string joined;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) joined += (i + 1 == parts.size() ? ", and " : ", ");
      joined += parts[i];
    }
    out += " From " + label(ex[0]) + ", the distance" + (parts.size() > 1 ? "s are " : " is ") + joined + ".";
  }
  return out;
}

std::string pending_prompt(const DraftExample& p) {
  return "Please provide the name of the " + p.category +
         " you'd like to add, along with its distance in meters from the first place.";
}

std::string chosen(const QueryDraft& d) {
  std::vector<std::string> names;
  for (const auto& e : d.examples) names.push_back(short_label(e));
  return names.empty() ? "none yet" : oxford(names);
}

struct RuntimeView {
  std::string state;
  std::vector<std::string> allowed;
  QueryDraft draft;
  std::size_t edits = 0;
  std::optional<std::string> error;
  std::string area_status;
  std::string area_label;
  std::optional<std::string> area_note;
  std::optional<std::size_t> results;
  dlg::Intent intent;

  bool allows(std::string_view s) const {
    return std::find(allowed.begin(), allowed.end(), s) != allowed.end();
  }
};

std::string reply(std::string text, dlg::SignalToken token, const RuntimeView& v) {
  if ((token.kind == dlg::SignalKind::proceed || token.kind == dlg::SignalKind::back) && !v.allows(token.target)) {
    token = dlg::stay();
  }
  if (token.kind == dlg::SignalKind::stop && !v.allows(dlg::kStopState)) token = dlg::stay();
  if (!text.empty()) text += ' ';
  return text + dlg::format_signal(token);
}

std::string area_valid(const RuntimeView& v) {
  std::string out = "Your search area is valid, which is " + v.area_label + ", and the examples chosen are " +
                    chosen(v.draft) + ".";
  if (v.area_note) out += " (" + *v.area_note + ")";
  return out;
}

std::string area_unknown(const RuntimeView& v) {
  return "I couldn't find \"" + v.area_label +
         "\". Please give a neighborhood, city, region or landmark I know, or coordinates such as: lat 1.29 "
         "lon 103.85 radius 2000.";
}

std::string error_text(const RuntimeView& v) {
  return "I couldn't use that: " + v.error.value_or("unknown problem") +
         ". Could you check the name, or describe the place by its category instead?";
}

std::string updated(const RuntimeView& v) {
  std::string out = "I've updated your query. " + summary(v.draft);
  if (v.draft.area) out += " The search area is " + (v.area_label.empty() ? std::string("unchanged") : v.area_label) + ".";
  return out + " Shall I search again?";
}

std::string runtime_reply(const RuntimeView& v) {
  using dlg::back_to;
  using dlg::proceed_to;
  const dlg::Handler h = dlg::handler_for(v.state);
  const auto* pending = dlg::pending_example(v.draft);
  const bool complete = dlg::examples_complete(v.draft);
  const bool area_ok = v.area_status == "ok";
  const bool area_bad = v.area_status == "unknown" || v.area_status == "unresolved";

  switch (h) {
    case dlg::Handler::greet:
      return reply(
          "Hi! I can help you find groups of places that resemble places you already know. Tell me about a few "
          "example places and how far apart they are.",
          proceed_to("collect_examples"), v);

    case dlg::Handler::collect_examples:
      if (v.error) return reply(error_text(v), dlg::stay(), v);
      if (v.edits == 0 && v.intent.finish) return reply(kGoodbye.data(), dlg::stop(), v);
      if (pending) return reply(pending_prompt(*pending), dlg::stay(), v);
      if (v.draft.examples.empty()) return reply(std::string(kAskExamples), dlg::stay(), v);
      if (!complete) {
        if (v.edits == 0) return reply(std::string(kAskDistances), dlg::stay(), v);
        return reply(picked(v.draft) + " " + std::string(kAskDistances), proceed_to("confirm_examples"), v);
      }
      return reply(summary(v.draft) + " Do you want to continue and acknowledge the selection?",
                   proceed_to("confirm_examples"), v);

    case dlg::Handler::confirm_examples:
      if (v.error) return reply(error_text(v), dlg::stay(), v);
      if (pending) return reply(pending_prompt(*pending), back_to("collect_examples"), v);
      if (v.edits > 0) {
        if (!complete) return reply(std::string(kAskDistances), back_to("collect_examples"), v);
        return reply(summary(v.draft) + " Do you want to continue and acknowledge the selection?", dlg::stay(), v);
      }
      if (v.intent.negate) {
        return reply("No problem. Tell me which places you'd like to add or change.", back_to("collect_examples"), v);
      }
      if (v.intent.affirm) {
        if (!complete) return reply(std::string(kAskDistances), dlg::stay(), v);
        return reply(std::string(kAreaPrompt), proceed_to("collect_area"), v);
      }
      if (v.intent.finish) return reply(kGoodbye.data(), dlg::stop(), v);
      return reply("Do you want to continue with these examples, or add another place?", dlg::stay(), v);

    case dlg::Handler::collect_area:
      if (area_ok) return reply(area_valid(v), proceed_to("confirm_query"), v);
      if (area_bad) return reply(area_unknown(v), dlg::stay(), v);
      if (v.intent.finish) return reply(kGoodbye.data(), dlg::stop(), v);
      return reply(std::string(kAreaPrompt), dlg::stay(), v);

    case dlg::Handler::confirm_query:
      if (!complete) {
        return reply(v.draft.examples.empty() ? std::string(kAskExamples) : std::string(kAskDistances),
                     back_to("collect_examples"), v);
      }
      if (!v.draft.area) return reply(std::string(kAreaPrompt), back_to("collect_area"), v);
      return reply(std::string(kSearching), proceed_to("execute_search"), v);

    case dlg::Handler::execute_search:
      if (v.error || !v.results) {
        return reply("I couldn't run the search: " + v.error.value_or("no results were produced") + ".",
                     proceed_to("error_recovery"), v);
      }
      if (*v.results == 0) {
        return reply(
            "I couldn't find any matching places in that area. You can change the area, adjust the distances, "
            "or say done.",
            proceed_to("present_results"), v);
      }
      return reply("I found " + std::to_string(*v.results) +
                       " matching location sets, ranked by similarity to your examples. You can refine the "
                       "query or say done.",
                   proceed_to("present_results"), v);

    case dlg::Handler::present_results:
    case dlg::Handler::refine: {
      const bool refine = h == dlg::Handler::refine;
      if (v.error) return reply(error_text(v), dlg::stay(), v);
      if (pending) return reply(pending_prompt(*pending), back_to("collect_examples"), v);
      if (area_bad) return reply(area_unknown(v), dlg::stay(), v);
      if (v.edits > 0 || area_ok) {
        if (!complete) return reply(std::string(kAskDistances), back_to("collect_examples"), v);
        return reply(updated(v), refine ? dlg::stay() : proceed_to("refine"), v);
      }
      if (v.intent.finish && !v.intent.search) return reply(kGoodbye.data(), dlg::stop(), v);
      if (refine && (v.intent.affirm || v.intent.search)) {
        if (!v.draft.area) return reply(std::string(kAreaPrompt), back_to("collect_area"), v);
        return reply(std::string(kSearching), proceed_to("execute_search"), v);
      }
      if (refine) return reply("Shall I run the search with the updated query?", dlg::stay(), v);
      return reply("You can add or change examples, pick a different area, or say done when you're finished.",
                   dlg::stay(), v);
    }

    case dlg::Handler::error_recovery:
      if (v.intent.finish && v.edits == 0 && !area_ok) return reply(kGoodbye.data(), dlg::stop(), v);
      if (v.error) return reply(error_text(v), dlg::stay(), v);
      if (pending) return reply(pending_prompt(*pending), proceed_to("collect_examples"), v);
      if (v.draft.examples.empty()) return reply(std::string(kAskExamples), proceed_to("collect_examples"), v);
      if (!complete) return reply(std::string(kAskDistances), proceed_to("collect_examples"), v);
      if (v.edits > 0) {
        return reply(summary(v.draft) + " Do you want to continue and acknowledge the selection?",
                     proceed_to("confirm_examples"), v);
      }
      if (area_ok) return reply(area_valid(v), proceed_to("confirm_query"), v);
      if (area_bad) return reply(area_unknown(v), dlg::stay(), v);
      if (!v.draft.area) return reply(std::string(kAreaPrompt), proceed_to("collect_area"), v);
      return reply("Let's pick up where we left off.", proceed_to("confirm_query"), v);

    case dlg::Handler::stop:
      return reply(kGoodbye.data(), dlg::stop(), v);

    case dlg::Handler::generic:
      break;
  }
  if (!v.allowed.empty()) return reply("Okay.", proceed_to(v.allowed.front()), v);
  return reply("Okay.", dlg::stay(), v);
}

RuntimeView runtime_view(const Hints& hints, std::span<const ChatMessage> messages) {
  RuntimeView v;
  v.state = hints.get_or("state", "");
  for (auto& a : text::split_words([&] {
         std::string s = hints.get_or("allowed", "");
         std::replace(s.begin(), s.end(), ',', ' ');
         return s;
       }())) {
    v.allowed.push_back(std::move(a));
  }
  if (auto d = hints.get("draft")) {
    auto j = nlohmann::json::parse(*d, nullptr, false);
    if (!j.is_discarded()) {
      try {
        v.draft = match::draft_from_json(j);
      } catch (const Error&) {
      }
    }
  }
  try {
    v.edits = std::stoul(hints.get_or("edits", "0"));
  } catch (const std::exception&) {
  }
  v.error = hints.get("error");
  v.area_status = hints.get_or("area_status", "");
  v.area_label = hints.get_or("area_label", "");
  v.area_note = hints.get("area_note");
  if (auto r = hints.get("results")) {
    try {
      v.results = std::stoul(*r);
    } catch (const std::exception&) {
    }
  }
  if (v.area_label.empty() && v.draft.area_name) v.area_label = *v.draft.area_name;
  v.intent = dlg::classify_intent(last_content(messages, Role::user));
  return v;
}

// ----- synthesis text ----------------------------------------------------------

// 13 categories: any step in 1..12 visits distinct entries.
constexpr std::array<std::string_view, 13> kCategories = {
    "gym",  "station", "hotel",  "cafe",     "mall",     "restaurant", "park",
    "school", "hospital", "library", "supermarket", "museum", "pharmacy"};

constexpr std::array<std::string_view, 4> kAreas = {"downtown Sydney", "Marina Bay", "Darling Harbour",
                                                    "Melbourne"};

std::vector<std::string> pick_categories(std::uint64_t variant, std::size_t num) {
  const std::size_t n = kCategories.size();
  const std::size_t start = variant % n;
  const std::size_t step = 1 + (variant / n) % (n - 1);
  std::vector<std::string> out;
  for (std::size_t j = 0; j < std::min(num, n); ++j) out.emplace_back(kCategories[(start + j * step) % n]);
  return out;
}

std::string with_article(const std::string& c) {
  const bool vowel = !c.empty() && std::string_view("aeiou").find(c[0]) != std::string_view::npos;
  return (vowel ? "an " : "a ") + c;
}

std::vector<double> pick_distances(std::uint64_t variant, std::size_t count) {
  std::vector<double> out;
  for (std::size_t j = 0; j < count; ++j) out.push_back(100.0 * static_cast<double>(1 + (variant * 7 + j * 5) % 15));
  return out;
}

std::string distances_text(const std::vector<double>& d) {
  std::vector<std::string> parts;
  for (double x : d) parts.push_back(meters(x));
  return oxford(parts);
}

template <std::size_t N>
std::string_view choose(const std::array<std::string_view, N>& options, std::uint64_t variant) {
  return options[variant % N];
}

std::string synth_text(const std::string& state, std::uint64_t variant, std::size_t num) {
  if (state == "spatial_examples") {
    std::vector<std::string> items;
    for (const auto& c : pick_categories(variant, num)) items.push_back(with_article(c));
    static constexpr std::array<std::string_view, 3> lead = {"I want to look for places like ",
                                                             "Can you find places like ",
                                                             "I'm searching for places like "};
    const std::string_view l = choose(lead, variant / 7);
    return std::string(l) + oxford(items) + (l.starts_with("Can") ? "?" : ".");
  }
  if (state == "add_example") {
    const std::string c = std::string(kCategories[(variant * 3 + 5) % kCategories.size()]);
    static constexpr std::array<std::string_view, 3> forms = {"I want to add ", "Please add ", "Could you also add "};
    return std::string(choose(forms, variant / 5)) + with_article(c) + (variant % 2 ? " too." : "");
  }
  if (state == "set_distances") {
    const auto d = pick_distances(variant, num > 1 ? num - 1 : 1);
    return std::string(d.size() > 1 ? "The distances from the first place are " : "The distance from the first place is ") +
           distances_text(d) + " meters.";
  }
  if (state == "give_area") {
    static constexpr std::array<std::string_view, 3> forms = {"In ", "Somewhere around ", "Near "};
    return std::string(choose(forms, variant / 4)) + std::string(kAreas[variant % kAreas.size()]);
  }
  static const std::map<std::string, std::vector<std::string_view>, std::less<>> fixed = {
      {"greet",
       {"Hi! I can help you find groups of places that resemble places you already know.",
        "Hello! Tell me about some places you like and I'll find similar spots."}},
      {"ask_examples",
       {"Which places do you have in mind? You can name them or just give their categories.",
        "Could you give me a few example places to start with?"}},
      {"select_examples",
       {"Got it. Do you want to add another place or tell me the distances?",
        "Thanks, I have noted those places. Anything to add?"}},
      {"confirm_examples",
       {"Here are your examples. Do you want to continue and acknowledge the selection?",
        "Shall we continue with these examples?"}},
      {"ask_area", {kAreaPrompt, "Where should I search? A city, neighborhood or landmark works."}},
      {"confirm_area",
       {"Your search area is valid. I'm at hard work to find the best match!",
        "That area works. Starting the search now."}},
      {"clarify", {"Could you clarify that for me?", "Sorry, could you say that another way?"}},
      {"error_recovery",
       {"Sorry, something went wrong. Let's try that step again.", "I couldn't process that. Let's retry."}},
      {"farewell", {"Glad I could help. Goodbye!", "Happy exploring. Bye!"}},
  };
  if (auto it = fixed.find(state); it != fixed.end()) return std::string(it->second[variant % it->second.size()]);
  return "Let's continue.";
}

std::string synth_query(const std::string& state, std::uint64_t variant, std::size_t num) {
  using nlohmann::json;
  if (state == "spatial_examples") return json(pick_categories(variant, num)).dump();
  if (state == "add_example") {
    const std::string c = std::string(kCategories[(variant * 3 + 5) % kCategories.size()]);
    return json{{"examples", json::array({{{"kind", "category_only"}, {"category", c}, {"anchor_distance_m", nullptr}}})}}
        .dump();
  }
  if (state == "set_distances") return json{{"anchor_distances_m", pick_distances(variant, num > 1 ? num - 1 : 1)}}.dump();
  if (state == "give_area") return json{{"area", {{"name", kAreas[variant % kAreas.size()]}}}}.dump();
  return "[]";
}

std::string signal_baseline(const Hints& hints) {
  std::string allowed = hints.get_or("allowed", "");
  const std::string first = allowed.substr(0, allowed.find(','));
  if (first.empty() || first == dlg::kStopState) return dlg::format_signal(dlg::stop());
  return dlg::format_signal(dlg::proceed_to(first));
}

}  // namespace

ChatBackend::Completion RuleBackend::do_complete(std::span<const ChatMessage> messages, const Constraints&) {
  const Hints hints = hints_of(messages);
  const std::string request = hints.get_or("request", "chat");
  std::uint64_t variant = 0;
  std::size_t num = 2;
  try {
    variant = std::stoull(hints.get_or("variant", "0"));
    num = std::stoul(hints.get_or("num", "2"));
  } catch (const std::exception&) {
  }
  const std::string state = hints.get_or("state", "");
  if (request == "text") return {synth_text(state, variant, num), std::nullopt};
  if (request == "query") return {synth_query(state, variant, num), std::nullopt};
  if (request == "signal") return {signal_baseline(hints), std::nullopt};
  return {runtime_reply(runtime_view(hints, messages)), std::nullopt};
}

}  // namespace seqgpt::llm
