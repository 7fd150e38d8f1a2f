#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqgpt/geo/poi_store.hpp"

namespace seqgpt::geo {

/// Malformed input record. `location()` is "line N" for CSV and "feature N"
/// for GeoJSON (both 1-based); `field()` names the offending column/property.
class IngestError : public Error {
 public:
  IngestError(std::string location, std::string field, const std::string& detail);
  const std::string& location() const noexcept { return location_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string location_;
  std::string field_;
};

/// Reads one CSV record (RFC 4180 quoting), possibly spanning lines.
/// Returns false at end of input; `line` is advanced past consumed lines.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line);

enum class PoiFormat { automatic, csv, geojson };

std::vector<Poi> parse_csv(std::istream& in);
std::vector<Poi> parse_geojson(const nlohmann::json& doc);

/// Loads a dataset file. With `automatic`, `.csv` selects CSV and anything
/// else is sniffed (a leading `{` means GeoJSON).
PoiStore load_pois(const std::filesystem::path& path, PoiFormat format = PoiFormat::automatic,
                   double cell_m = PoiStore::kDefaultCellM);

void write_csv(std::span<const Poi> pois, std::ostream& out);
nlohmann::json to_geojson(std::span<const Poi> pois);

}  // namespace seqgpt::geo
