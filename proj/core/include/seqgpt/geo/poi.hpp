#pragma once

#include <map>
#include <string>
#include <string_view>

#include "seqgpt/geo/geo_point.hpp"

namespace seqgpt::geo {

/// Categories compare as trimmed, lowercased strings.
std::string normalize_category(std::string_view category);

struct Poi {
  std::string id;
  std::string name;
  std::string category;  // normalized
  GeoPoint point;
  std::map<std::string, std::string> tags;

  friend bool operator==(const Poi&, const Poi&) = default;
};

}  // namespace seqgpt::geo
