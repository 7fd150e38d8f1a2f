#include "seqgpt/geo/ingest.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "seqgpt/text.hpp"

namespace seqgpt::geo {

IngestError::IngestError(std::string location, std::string field, const std::string& detail)
    : Error("INGEST_ERROR", location + ": field '" + field + "': " + detail),
      location_(std::move(location)),
      field_(std::move(field)) {}

bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  std::string buf;
  if (!std::getline(in, buf)) return false;
  ++line;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i >= buf.size()) {
      if (quoted) {
        std::string next;
        if (!std::getline(in, next)) {
          throw IngestError("line " + std::to_string(line), "record", "unterminated quote");
        }
        ++line;
        field.push_back('\n');
        buf = std::move(next);
        i = 0;
        continue;
      }
      break;
    }
    const char c = buf[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < buf.size() && buf[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r' || i + 1 != buf.size()) {
      field.push_back(c);
    }
    ++i;
  }
  fields.push_back(std::move(field));
  return true;
}

namespace {


double parse_coord(const std::string& raw, const std::string& where, const std::string& field) {
  const std::string s = text::trim(raw);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw IngestError(where, field, "not a number: '" + raw + "'");
  }
  return v;
}

GeoPoint make_point(double lat, double lon, const std::string& where) {
  if (!(lat >= -90.0 && lat <= 90.0)) {
    throw IngestError(where, "lat", "out of range [-90, 90]: " + std::to_string(lat));
  }
  if (!(lon >= -180.0 && lon <= 180.0)) {
    throw IngestError(where, "lon", "out of range [-180, 180]: " + std::to_string(lon));
  }
  return GeoPoint(lat, lon);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_field(std::ostream& out, const std::string& v) {
  if (v.find_first_of(",\"\n\r") == std::string::npos) {
    out << v;
    return;
  }
  out << '"';
  for (char c : v) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void check_unique(const std::vector<Poi>& pois) {
  std::set<std::string> seen;
  for (const Poi& p : pois) {
    if (!seen.insert(p.id).second) throw DuplicatePoiId(p.id);
  }
}

}  // namespace

std::vector<Poi> parse_csv(std::istream& in) {
  std::vector<std::string> fields;
  std::size_t line = 0;
  if (!read_csv_record(in, fields, line)) return {};
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);

  const std::vector<std::string> required{"id", "name", "lat", "lon", "category"};
  std::vector<std::size_t> col(required.size(), SIZE_MAX);
  std::vector<std::pair<std::size_t, std::string>> tag_cols;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string h = text::trim(fields[i]);
    bool known = false;
    for (std::size_t r = 0; r < required.size(); ++r) {
      if (h == required[r]) {
        col[r] = i;
        known = true;
      }
    }
    if (!known && !h.empty()) tag_cols.emplace_back(i, h);
  }
  for (std::size_t r = 0; r < required.size(); ++r) {
    if (col[r] == SIZE_MAX) throw IngestError("line 1", required[r], "missing header column");
  }

  const std::size_t width = fields.size();
  std::vector<Poi> pois;
  while (true) {
    const std::size_t start = line + 1;
    if (!read_csv_record(in, fields, line)) break;
    if (fields.size() == 1 && text::trim(fields[0]).empty()) continue;
    const std::string where = "line " + std::to_string(start);
    if (fields.size() > width) {
      throw IngestError(where, "", std::to_string(fields.size()) + " fields, header has " + std::to_string(width));
    }
    auto get = [&](std::size_t r) -> const std::string& {
      if (col[r] >= fields.size()) throw IngestError(where, required[r], "missing value");
      return fields[col[r]];
    };
    std::string id = text::trim(get(0));
    if (id.empty()) throw IngestError(where, "id", "empty");
    std::string name = text::trim(get(1));
    if (name.empty()) throw IngestError(where, "name", "empty");
    const double lat = parse_coord(get(2), where, "lat");
    const double lon = parse_coord(get(3), where, "lon");
    std::string category = normalize_category(get(4));
    if (category.empty()) throw IngestError(where, "category", "empty");
    Poi poi{std::move(id), std::move(name), std::move(category), make_point(lat, lon, where), {}};
    for (const auto& [i, key] : tag_cols) {
      if (i < fields.size() && !fields[i].empty()) poi.tags[key] = fields[i];
    }
    pois.push_back(std::move(poi));
  }
  check_unique(pois);
  return pois;
}

std::vector<Poi> parse_geojson(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection") {
    throw IngestError("document", "type", "expected a FeatureCollection");
  }
  auto fit = doc.find("features");
  if (fit == doc.end() || !fit->is_array()) {
    throw IngestError("document", "features", "missing or not an array");
  }
  std::vector<Poi> pois;
  std::size_t n = 0;
  for (const auto& f : *fit) {
    const std::string where = "feature " + std::to_string(++n);
    if (!f.is_object()) throw IngestError(where, "feature", "not an object");
    auto id_it = f.find("id");
    std::string id;
    if (id_it != f.end() && id_it->is_string()) {
      id = id_it->get<std::string>();
    } else if (id_it != f.end() && id_it->is_number_integer()) {
      id = std::to_string(id_it->get<long long>());
    }
    if (text::trim(id).empty()) throw IngestError(where, "id", "missing");

    auto geom = f.find("geometry");
    if (geom == f.end() || !geom->is_object() || geom->value("type", "") != "Point") {
      throw IngestError(where, "geometry", "expected a Point geometry");
    }
    auto coords = geom->find("coordinates");
    if (coords == geom->end() || !coords->is_array() || coords->size() < 2 ||
        !(*coords)[0].is_number() || !(*coords)[1].is_number()) {
      throw IngestError(where, "geometry.coordinates", "expected [lon, lat]");
    }
    const double lon = (*coords)[0].get<double>();
    const double lat = (*coords)[1].get<double>();

    auto props = f.find("properties");
    if (props == f.end() || !props->is_object()) {
      throw IngestError(where, "properties", "missing");
    }
    auto str_prop = [&](const char* key) {
      auto it = props->find(key);
      if (it == props->end() || !it->is_string() || text::trim(it->get<std::string>()).empty()) {
        throw IngestError(where, std::string("properties.") + key, "missing or not a string");
      }
      return text::trim(it->get<std::string>());
    };
    Poi poi{text::trim(id), str_prop("name"), normalize_category(str_prop("category")),
            make_point(lat, lon, where), {}};
    for (const auto& [key, value] : props->items()) {
      if (key == "name" || key == "category") continue;
      if (value.is_string()) {
        poi.tags[key] = value.get<std::string>();
      } else if (value.is_number() || value.is_boolean()) {
        poi.tags[key] = value.dump();
      }
    }
    pois.push_back(std::move(poi));
  }
  check_unique(pois);
  return pois;
}

PoiStore load_pois(const std::filesystem::path& path, PoiFormat format, double cell_m) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IO_ERROR", "cannot open dataset: " + path.string());
  if (format == PoiFormat::automatic) {
    if (path.extension() == ".csv") {
      format = PoiFormat::csv;
    } else {
      char c = 0;
      while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {
      }
      format = (c == '{') ? PoiFormat::geojson : PoiFormat::csv;
      in.clear();
      in.seekg(0);
    }
  }
  if (format == PoiFormat::csv) return PoiStore(parse_csv(in), cell_m);

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IngestError("document", "json", e.what());
  }
  return PoiStore(parse_geojson(doc), cell_m);
}

void write_csv(std::span<const Poi> pois, std::ostream& out) {
  std::set<std::string> tag_keys;
  for (const Poi& p : pois) {
    for (const auto& kv : p.tags) tag_keys.insert(kv.first);
  }
  out << "id,name,lat,lon,category";
  for (const auto& k : tag_keys) {
    out << ',';
    write_field(out, k);
  }
  out << '\n';
  for (const Poi& p : pois) {
    write_field(out, p.id);
    out << ',';
    write_field(out, p.name);
    out << ',' << format_double(p.point.lat()) << ',' << format_double(p.point.lon()) << ',';
    write_field(out, p.category);
    for (const auto& k : tag_keys) {
      out << ',';
      auto it = p.tags.find(k);
      if (it != p.tags.end()) write_field(out, it->second);
    }
    out << '\n';
  }
}

nlohmann::json to_geojson(std::span<const Poi> pois) {
  nlohmann::json features = nlohmann::json::array();
  for (const Poi& p : pois) {
    nlohmann::json props = {{"name", p.name}, {"category", p.category}};
    for (const auto& [k, v] : p.tags) props[k] = v;
    features.push_back({{"type", "Feature"},
                        {"id", p.id},
                        {"geometry",
                         {{"type", "Point"}, {"coordinates", {p.point.lon(), p.point.lat()}}}},
                        {"properties", std::move(props)}});
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

}  // namespace seqgpt::geo
