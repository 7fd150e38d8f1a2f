#include "seqgpt/geo/geo_point.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace seqgpt::geo {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

GeoPoint::GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
  if (!std::isfinite(lat) || lat < -90.0 || lat > 90.0) {
    throw GeoError("latitude out of range [-90, 90]: " + std::to_string(lat));
  }
  if (!std::isfinite(lon) || lon < -180.0 || lon > 180.0) {
    throw GeoError("longitude out of range [-180, 180]: " + std::to_string(lon));
  }
}

double haversine_m(const GeoPoint& a, const GeoPoint& b) noexcept {
  if (a == b) return 0.0;
  const double phi1 = a.lat() * kDegToRad;
  const double phi2 = b.lat() * kDegToRad;
  const double dphi = (b.lat() - a.lat()) * kDegToRad;
  const double dlambda = (b.lon() - a.lon()) * kDegToRad;
  const double s1 = std::sin(dphi / 2);
  const double s2 = std::sin(dlambda / 2);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

Circle::Circle(GeoPoint center, double radius_m) : center_(center), radius_m_(radius_m) {
  if (!std::isfinite(radius_m) || radius_m <= 0.0) {
    throw GeoError("circle radius must be positive and finite: " + std::to_string(radius_m));
  }
}

}  // namespace seqgpt::geo
