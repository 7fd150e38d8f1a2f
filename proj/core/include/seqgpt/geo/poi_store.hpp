#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqgpt/geo/poi.hpp"

namespace seqgpt::geo {

class DuplicatePoiId : public Error {
 public:
  explicit DuplicatePoiId(const std::string& id)
      : Error("DUPLICATE_ID", "duplicate poi id: " + id), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

/// Uniform lat/lon grid over a subset of a store's POIs. Longitude wraps at
/// the antimeridian; circles touching a pole scan every longitude column.
class GridIndex {
 public:
  GridIndex() = default;
  GridIndex(std::span<const Poi> pois, std::vector<std::size_t> members, double cell_deg);

  /// Indices of members whose cell may intersect `area`. A superset of the
  /// exact answer; callers filter by distance.
  void candidates(const Circle& area, std::vector<std::size_t>& out) const;

 private:
  std::uint64_t key(std::int64_t row, std::int64_t col) const noexcept;
  std::int64_t row_of(double lat) const noexcept;
  std::int64_t col_of(double lon) const noexcept;

  double cell_deg_ = 1.0;
  std::int64_t rows_ = 1;
  std::int64_t cols_ = 1;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
  std::vector<std::size_t> members_;
};

/// Immutable POI collection with spatial and name lookups. Every store gets a
/// process-unique generation number, so caches can tell reloads apart.
class PoiStore {
 public:
  static constexpr double kDefaultCellM = 500.0;

  explicit PoiStore(std::vector<Poi> pois, double cell_m = kDefaultCellM);

  std::span<const Poi> pois() const noexcept { return pois_; }
  std::size_t size() const noexcept { return pois_.size(); }
  std::uint64_t generation() const noexcept { return generation_; }
  const Poi* find_id(std::string_view id) const;

  std::vector<Poi> within(const Circle& area) const;

  /// POIs of `category` whose distance from `center` is within `eps_m` of `d_m`.
  std::vector<Poi> ring_query(const GeoPoint& center, double d_m, double eps_m,
                              std::string_view category) const;

  std::vector<Poi> find_by_name(std::string_view name,
                                const std::optional<Circle>& area = std::nullopt) const;

  std::vector<std::string> categories() const;

 private:
  std::vector<Poi> pois_;
  double cell_deg_;
  std::uint64_t generation_;
  GridIndex all_;
  std::unordered_map<std::string, GridIndex> by_category_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_name_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace seqgpt::geo
