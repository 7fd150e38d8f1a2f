#pragma once

#include "seqgpt/error.hpp"

namespace seqgpt::geo {

inline constexpr double kEarthRadiusM = 6'371'000.0;

class GeoError : public Error {
 public:
  explicit GeoError(const std::string& message) : Error("INVALID_GEOMETRY", message) {}
};

/// Latitude/longitude in degrees. Always finite and in range; the
/// constructor throws GeoError otherwise.
class GeoPoint {
 public:
  GeoPoint(double lat, double lon);

  double lat() const noexcept { return lat_; }
  double lon() const noexcept { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_;
  double lon_;
};

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double haversine_m(const GeoPoint& a, const GeoPoint& b) noexcept;

class Circle {
 public:
  Circle(GeoPoint center, double radius_m);

  const GeoPoint& center() const noexcept { return center_; }
  double radius_m() const noexcept { return radius_m_; }

  bool contains(const GeoPoint& p) const noexcept {
    return haversine_m(center_, p) <= radius_m_;
  }

  friend bool operator==(const Circle&, const Circle&) = default;

 private:
  GeoPoint center_;
  double radius_m_;
};

}  // namespace seqgpt::geo
