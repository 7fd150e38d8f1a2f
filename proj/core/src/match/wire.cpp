#include "seqgpt/match/wire.hpp"

#include <cmath>

namespace seqgpt::match {

using nlohmann::json;

namespace {

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InvalidQuery(where + ": missing \"" + key + "\"");
  return *it;
}

double number(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) throw InvalidQuery(where + ": \"" + key + "\" must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InvalidQuery(where + ": \"" + key + "\" must be finite");
  return d;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw InvalidQuery(where + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw InvalidQuery(where + ": expected an object");
}

ExampleKind parse_kind(const json& e, const std::string& where) {
  const std::string kind = string_field(e, "kind", where);
  if (kind == "named") return ExampleKind::named;
  if (kind == "category_only") return ExampleKind::category_only;
  throw InvalidQuery(where + ": unknown kind \"" + kind + "\"");
}

std::size_t parse_k(const json& j) {
  auto it = j.find("k");
  if (it == j.end() || it->is_null()) return kDefaultK;
  if (!it->is_number_integer() || it->get<long long>() < 1) {
    throw InvalidQuery("\"k\" must be a positive integer");
  }
  return static_cast<std::size_t>(it->get<long long>());
}

double parse_eps(const json& j) {
  auto it = j.find("eps_m");
  if (it == j.end() || it->is_null()) return kDefaultEpsM;
  if (!it->is_number() || !(it->get<double>() > 0.0) || !std::isfinite(it->get<double>())) {
    throw InvalidQuery("\"eps_m\" must be a positive number");
  }
  return it->get<double>();
}

template <class Fn>
auto guard_geometry(Fn&& fn) {
  try {
    return fn();
  } catch (const geo::GeoError& e) {
    throw InvalidQuery(e.what());
  }
}

}  // namespace

json to_json(const geo::GeoPoint& p) { return {{"lat", p.lat()}, {"lon", p.lon()}}; }

json to_json(const geo::Circle& c) {
  return {{"center", to_json(c.center())}, {"radius_m", c.radius_m()}};
}

json to_json(const geo::Poi& p) {
  json j = {{"id", p.id},
            {"name", p.name},
            {"category", p.category},
            {"lat", p.point.lat()},
            {"lon", p.point.lon()}};
  if (!p.tags.empty()) j["tags"] = p.tags;
  return j;
}

json to_json(const ExemplarQuery& q) {
  json examples = json::array();
  for (const ExampleSpec& e : q.examples) {
    json je = {{"kind", to_string(e.kind)},
               {"category", e.category},
               {"anchor_distance_m", e.anchor_distance_m}};
    if (e.name) je["name"] = *e.name;
    examples.push_back(std::move(je));
  }
  return {{"examples", std::move(examples)},
          {"area", to_json(q.area)},
          {"k", q.k},
          {"eps_m", q.eps_m}};
}

json to_json(const QueryDraft& d) {
  json examples = json::array();
  for (const DraftExample& e : d.examples) {
    json je = {{"kind", to_string(e.kind)}, {"category", e.category}};
    je["anchor_distance_m"] = e.anchor_distance_m ? json(*e.anchor_distance_m) : json(nullptr);
    if (e.name) je["name"] = *e.name;
    examples.push_back(std::move(je));
  }
  json area = nullptr;
  if (d.area) {
    area = to_json(*d.area);
    if (d.area_name) area["name"] = *d.area_name;
  } else if (d.area_name) {
    area = {{"name", *d.area_name}};
  }
  return {{"examples", std::move(examples)}, {"area", std::move(area)}, {"k", d.k},
          {"eps_m", d.eps_m}};
}

json to_json(const MatchResult& r) {
  json assignment = json::array();
  for (const geo::Poi& p : r.assignment) assignment.push_back(to_json(p));
  return {{"assignment", std::move(assignment)}, {"score_m", r.score_m},
          {"similarity", r.similarity}};
}

json to_json(const std::vector<MatchResult>& results) {
  json arr = json::array();
  for (const MatchResult& r : results) arr.push_back(to_json(r));
  return arr;
}

geo::Circle circle_from_json(const json& j) {
  require_object(j, "area");
  const json& c = field(j, "center", "area");
  require_object(c, "area.center");
  const double lat = number(c, "lat", "area.center");
  const double lon = number(c, "lon", "area.center");
  const double r = number(j, "radius_m", "area");
  return guard_geometry([&] { return geo::Circle(geo::GeoPoint(lat, lon), r); });
}

ExemplarQuery query_from_json(const json& j) {
  require_object(j, "query");
  const json& arr = field(j, "examples", "query");
  if (!arr.is_array() || arr.empty()) throw InvalidQuery("\"examples\" must be a non-empty array");
  std::vector<ExampleSpec> examples;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "examples[" + std::to_string(i) + "]";
    const json& e = arr[i];
    require_object(e, where);
    ExampleSpec spec;
    spec.kind = parse_kind(e, where);
    if (spec.kind == ExampleKind::named) spec.name = string_field(e, "name", where);
    spec.category = geo::normalize_category(string_field(e, "category", where));
    spec.anchor_distance_m = number(e, "anchor_distance_m", where);
    examples.push_back(std::move(spec));
  }
  ExemplarQuery q{std::move(examples), circle_from_json(field(j, "area", "query")), parse_k(j),
                  parse_eps(j)};
  try {
    q.validate();
  } catch (const ContractViolation& e) {
    throw InvalidQuery(e.what());
  }
  return q;
}

QueryDraft draft_from_json(const json& j) {
  require_object(j, "query");
  QueryDraft d;
  auto ex = j.find("examples");
  if (ex != j.end() && !ex->is_null()) {
    if (!ex->is_array()) throw InvalidQuery("\"examples\" must be an array");
    for (std::size_t i = 0; i < ex->size(); ++i) {
      const std::string where = "examples[" + std::to_string(i) + "]";
      const json& e = (*ex)[i];
      require_object(e, where);
      DraftExample de;
      de.kind = parse_kind(e, where);
      if (de.kind == ExampleKind::named) {
        de.name = string_field(e, "name", where);
        if (de.name->empty()) throw InvalidQuery(where + ": empty name");
      }
      auto cat = e.find("category");
      if (cat != e.end() && !cat->is_null()) {
        if (!cat->is_string()) throw InvalidQuery(where + ": \"category\" must be a string");
        de.category = geo::normalize_category(cat->get<std::string>());
      }
      if (de.kind == ExampleKind::category_only && de.category.empty()) {
        throw InvalidQuery(where + ": category_only example needs a category");
      }
      auto dist = e.find("anchor_distance_m");
      if (dist != e.end() && !dist->is_null()) {
        de.anchor_distance_m = number(e, "anchor_distance_m", where);
        if (*de.anchor_distance_m < 0.0) throw InvalidQuery(where + ": negative distance");
      }
      d.examples.push_back(std::move(de));
    }
  }
  auto area = j.find("area");
  if (area != j.end() && !area->is_null()) {
    require_object(*area, "area");
    if (area->contains("center")) d.area = circle_from_json(*area);
    auto name = area->find("name");
    if (name != area->end()) {
      if (!name->is_string() || name->get<std::string>().empty()) {
        throw InvalidQuery("area.name must be a non-empty string");
      }
      d.area_name = name->get<std::string>();
    }
    if (!d.area && !d.area_name) throw InvalidQuery("area needs a center or a name");
  }
  d.k = parse_k(j);
  d.eps_m = parse_eps(j);
  return d;
}

}  // namespace seqgpt::match
