#include "seqgpt/geo/poi_store.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <set>

#include "seqgpt/text.hpp"

namespace seqgpt::geo {

std::string normalize_category(std::string_view category) {
  return text::to_lower(text::trim(category));
}

namespace {

constexpr double kMetersPerDegree = kEarthRadiusM * std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::atomic<std::uint64_t> g_next_generation{1};

}  // namespace

GridIndex::GridIndex(std::span<const Poi> pois, std::vector<std::size_t> members, double cell_deg)
    : cell_deg_(cell_deg),
      rows_(static_cast<std::int64_t>(std::ceil(180.0 / cell_deg))),
      cols_(static_cast<std::int64_t>(std::ceil(360.0 / cell_deg))),
      members_(std::move(members)) {
  for (std::size_t idx : members_) {
    const GeoPoint& p = pois[idx].point;
    cells_[key(row_of(p.lat()), col_of(p.lon()))].push_back(idx);
  }
}

std::uint64_t GridIndex::key(std::int64_t row, std::int64_t col) const noexcept {
  return static_cast<std::uint64_t>(row) * static_cast<std::uint64_t>(cols_) +
         static_cast<std::uint64_t>(col);
}

std::int64_t GridIndex::row_of(double lat) const noexcept {
  const auto r = static_cast<std::int64_t>(std::floor((lat + 90.0) / cell_deg_));
  return std::clamp<std::int64_t>(r, 0, rows_ - 1);
}

std::int64_t GridIndex::col_of(double lon) const noexcept {
  const auto c = static_cast<std::int64_t>(std::floor((lon + 180.0) / cell_deg_));
  return ((c % cols_) + cols_) % cols_;
}

void GridIndex::candidates(const Circle& area, std::vector<std::size_t>& out) const {
  const double delta = area.radius_m() / kEarthRadiusM;
  const double lat = area.center().lat();
  const double lon = area.center().lon();
  const double dlat = delta * kRadToDeg;

  bool all_cols = delta >= std::numbers::pi / 2 || lat + dlat >= 90.0 || lat - dlat <= -90.0;
  double dlon = 180.0;
  if (!all_cols) {
    const double s = std::sin(delta) / std::cos(lat * std::numbers::pi / 180.0);
    if (s >= 1.0) {
      all_cols = true;
    } else {
      dlon = std::asin(s) * kRadToDeg;
    }
  }

  const std::int64_t r0 = std::max<std::int64_t>(0, row_of(lat - dlat) - 1);
  const std::int64_t r1 = std::min<std::int64_t>(rows_ - 1, row_of(lat + dlat) + 1);
  std::int64_t c0 = 0;
  std::int64_t c1 = cols_ - 1;
  if (!all_cols) {
    c0 = static_cast<std::int64_t>(std::floor((lon - dlon + 180.0) / cell_deg_)) - 1;
    c1 = static_cast<std::int64_t>(std::floor((lon + dlon + 180.0) / cell_deg_)) + 1;
    if (c1 - c0 + 1 >= cols_) {
      c0 = 0;
      c1 = cols_ - 1;
    }
  }

  const auto visits = static_cast<double>(r1 - r0 + 1) * static_cast<double>(c1 - c0 + 1);
  if (visits >= static_cast<double>(cells_.size())) {
    // Sparse grid: scanning the occupied cells is cheaper than probing.
    out.insert(out.end(), members_.begin(), members_.end());
    return;
  }
  for (std::int64_t r = r0; r <= r1; ++r) {
    for (std::int64_t c = c0; c <= c1; ++c) {
      const std::int64_t wrapped = ((c % cols_) + cols_) % cols_;
      auto it = cells_.find(key(r, wrapped));
      if (it != cells_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
}

PoiStore::PoiStore(std::vector<Poi> pois, double cell_m)
    : pois_(std::move(pois)), generation_(g_next_generation.fetch_add(1)) {
  if (!std::isfinite(cell_m) || cell_m <= 0.0) {
    throw ContractViolation("grid cell size must be positive");
  }
  cell_deg_ = std::min(cell_m / kMetersPerDegree, 90.0);

  std::vector<std::size_t> every(pois_.size());
  std::unordered_map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < pois_.size(); ++i) {
    Poi& p = pois_[i];
    p.category = normalize_category(p.category);
    if (p.id.empty()) throw ContractViolation("poi id must be non-empty");
    if (text::trim(p.name).empty()) throw ContractViolation("poi " + p.id + ": empty name");
    if (p.category.empty()) throw ContractViolation("poi " + p.id + ": empty category");
    if (!by_id_.emplace(p.id, i).second) throw DuplicatePoiId(p.id);
    every[i] = i;
    members[p.category].push_back(i);
    by_name_[text::normalize(p.name)].push_back(i);
  }
  all_ = GridIndex(pois_, std::move(every), cell_deg_);
  for (auto& [category, idx] : members) {
    by_category_.emplace(category, GridIndex(pois_, std::move(idx), cell_deg_));
  }
}

const Poi* PoiStore::find_id(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &pois_[it->second];
}

std::vector<Poi> PoiStore::within(const Circle& area) const {
  std::vector<std::size_t> cand;
  all_.candidates(area, cand);
  std::sort(cand.begin(), cand.end());
  std::vector<Poi> out;
  for (std::size_t i : cand) {
    if (area.contains(pois_[i].point)) out.push_back(pois_[i]);
  }
  return out;
}

std::vector<Poi> PoiStore::ring_query(const GeoPoint& center, double d_m, double eps_m,
                                      std::string_view category) const {
  if (!(d_m >= 0.0) || !(eps_m >= 0.0)) {
    throw ContractViolation("ring_query requires d >= 0 and eps >= 0");
  }
  auto it = by_category_.find(normalize_category(category));
  if (it == by_category_.end()) return {};
  std::vector<std::size_t> cand;
  it->second.candidates(Circle(center, std::max(d_m + eps_m, 1e-6)), cand);
  std::sort(cand.begin(), cand.end());
  std::vector<Poi> out;
  for (std::size_t i : cand) {
    if (std::abs(haversine_m(center, pois_[i].point) - d_m) <= eps_m) out.push_back(pois_[i]);
  }
  return out;
}

std::vector<Poi> PoiStore::find_by_name(std::string_view name,
                                        const std::optional<Circle>& area) const {
  std::vector<Poi> out;
  auto it = by_name_.find(text::normalize(name));
  if (it == by_name_.end()) return out;
  for (std::size_t i : it->second) {
    if (!area || area->contains(pois_[i].point)) out.push_back(pois_[i]);
  }
  return out;
}

std::vector<std::string> PoiStore::categories() const {
  std::set<std::string> cats;
  for (const auto& kv : by_category_) cats.insert(kv.first);
  return {cats.begin(), cats.end()};
}

}  // namespace seqgpt::geo
