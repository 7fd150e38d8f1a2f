#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "seqgpt/dialogue/orchestrator.hpp"

namespace seqgpt::server {

class UnknownArea : public Error {
 public:
  explicit UnknownArea(const std::string& name) : Error("UNKNOWN_AREA", "unknown area: " + name), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

struct GazetteerEntry {
  std::string name;  // display form; lookups compare normalized names
  geo::Circle circle;
};

/// Local name -> area table. Lookup is case-insensitive, drops a leading
/// "in/at/near/around" and "the", and falls back to the longest known
/// suffix ("downtown sydney" -> "sydney"). Leftover words are qualifiers:
/// "downtown" and "central" halve the radius, anything else is ignored and
/// reported in the result note.
class Gazetteer {
 public:
  Gazetteer() = default;
  explicit Gazetteer(std::vector<GazetteerEntry> entries);

  /// CSV with header `name,lat,lon,radius_m`.
  static Gazetteer parse_csv(std::istream& in);
  static Gazetteer load(const std::filesystem::path& path);

  dialogue::GeocodeResult geocode(std::string_view name) const;

  const std::vector<GazetteerEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  const GazetteerEntry* find(const std::string& normalized) const;

  std::vector<GazetteerEntry> entries_;
  std::vector<std::string> keys_;  // normalized, parallel to entries_
};

}  // namespace seqgpt::server
