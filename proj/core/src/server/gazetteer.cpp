#include "seqgpt/server/gazetteer.hpp"

#include <algorithm>
#include <fstream>

#include "seqgpt/geo/ingest.hpp"
#include "seqgpt/text.hpp"

namespace seqgpt::server {

namespace {

class GazetteerError : public Error {
 public:
  explicit GazetteerError(const std::string& m) : Error("INVALID_GAZETTEER", m) {}
};

std::string key_of(std::string_view name) {
  std::string k = text::normalize(name);
  while (!k.empty() && (k.back() == '.' || k.back() == '!' || k.back() == '?' || k.back() == ',')) k.pop_back();
  for (std::string_view lead : {"in ", "at ", "near ", "around ", "the "}) {
    if (k.starts_with(lead)) k.erase(0, lead.size());
  }
  return text::trim(k);
}

// The last `n` words of the caller's text, in the caller's casing.
std::string tail_words(std::string_view name, std::size_t n) {
  auto words = text::split_words(name);
  while (!words.empty()) {
    auto& w = words.back();
    while (!w.empty() && (w.back() == '.' || w.back() == '!' || w.back() == '?' || w.back() == ',')) w.pop_back();
    if (!w.empty()) break;
    words.pop_back();
  }
  std::string out;
  for (std::size_t i = words.size() - std::min(n, words.size()); i < words.size(); ++i) {
    out += (out.empty() ? "" : " ") + words[i];
  }
  return out;
}

}  // namespace

Gazetteer::Gazetteer(std::vector<GazetteerEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    std::string k = text::normalize(e.name);
    if (k.empty()) throw GazetteerError("empty area name");
    if (std::find(keys_.begin(), keys_.end(), k) != keys_.end()) throw GazetteerError("duplicate area: " + e.name);
    keys_.push_back(std::move(k));
  }
}

Gazetteer Gazetteer::parse_csv(std::istream& in) {
  std::vector<std::string> fields;
  std::size_t line = 0;
  if (!geo::read_csv_record(in, fields, line)) throw GazetteerError("empty gazetteer");
  if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF")) fields[0].erase(0, 3);
  std::vector<std::string> header;
  for (const auto& f : fields) header.push_back(text::normalize(f));
  if (header != std::vector<std::string>{"name", "lat", "lon", "radius_m"}) {
    throw GazetteerError("gazetteer header must be name,lat,lon,radius_m");
  }
  std::vector<GazetteerEntry> entries;
  while (geo::read_csv_record(in, fields, line)) {
    if (fields.size() == 1 && text::trim(fields[0]).empty()) continue;
    const std::string where = "gazetteer line " + std::to_string(line);
    if (fields.size() != 4) throw GazetteerError(where + ": expected 4 fields");
    try {
      std::size_t used = 0;
      auto num = [&](const std::string& s) {
        const std::string t = text::trim(s);
        const double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(s);
        return v;
      };
      entries.push_back({text::trim(fields[0]), geo::Circle(geo::GeoPoint(num(fields[1]), num(fields[2])), num(fields[3]))});
    } catch (const geo::GeoError& e) {
      throw GazetteerError(where + ": " + e.what());
    } catch (const std::exception&) {
      throw GazetteerError(where + ": malformed number");
    }
  }
  return Gazetteer(std::move(entries));
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IO_ERROR", "cannot open gazetteer: " + path.string());
  return parse_csv(in);
}

const GazetteerEntry* Gazetteer::find(const std::string& k) const {
  auto it = std::find(keys_.begin(), keys_.end(), k);
  return it == keys_.end() ? nullptr : &entries_[static_cast<std::size_t>(it - keys_.begin())];
}

dialogue::GeocodeResult Gazetteer::geocode(std::string_view name) const {
  const std::string k = key_of(name);
  if (k.empty()) throw UnknownArea(std::string(name));
  const auto words = text::split_words(k);
  if (const auto* e = find(k)) return {e->circle, tail_words(name, words.size()), std::nullopt};

  for (std::size_t cut = 1; cut < words.size(); ++cut) {
    std::string suffix;
    for (std::size_t i = cut; i < words.size(); ++i) suffix += (suffix.empty() ? "" : " ") + words[i];
    const auto* e = find(suffix);
    if (!e) continue;
    bool halve = false;
    std::vector<std::string> ignored;
    for (std::size_t i = 0; i < cut; ++i) {
      if (words[i] == "downtown" || words[i] == "central") {
        halve = true;
      } else {
        ignored.push_back(words[i]);
      }
    }
    dialogue::GeocodeResult r{e->circle, tail_words(name, words.size() - cut), std::nullopt};
    if (halve) {
      r.circle = geo::Circle(e->circle.center(), e->circle.radius_m() / 2.0);
      r.label = "central " + r.label;
    }
    if (!ignored.empty()) {
      std::string w;
      for (const auto& s : ignored) w += (w.empty() ? "" : " ") + s;
      r.note = "I ignored \"" + w + "\" in the area name";
    }
    return r;
  }
  throw UnknownArea(std::string(name));
}

}  // namespace seqgpt::server
