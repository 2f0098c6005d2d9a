#include "geo.hpp"

#include <algorithm>
#include <cmath>

namespace geoinfer {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

double hav(double delta_rad) noexcept {
  double s = std::sin(0.5 * delta_rad);
  return s * s;
}

}  // namespace

bool point_valid(const GeoPoint& p) noexcept {
  return std::isfinite(p.lat) && std::isfinite(p.lon) &&
         p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

GeoPoint make_point(double lat, double lon) {
  GeoPoint p{lat, lon};
  if (!point_valid(p)) {
    raise(Errc::invalid_argument,
          "coordinates out of range: lat=" + std::to_string(lat) +
              " lon=" + std::to_string(lon));
  }
  return p;
}

BoundingBox make_box(double min_lat, double max_lat, double min_lon, double max_lon) {
  if (!std::isfinite(min_lat) || !std::isfinite(max_lat) ||
      !std::isfinite(min_lon) || !std::isfinite(max_lon) ||
      min_lat > max_lat || min_lon > max_lon) {
    raise(Errc::invalid_argument, "invalid bounding box");
  }
  return BoundingBox{min_lat, max_lat, min_lon, max_lon};
}

bool bbox_contains(const BoundingBox& box, const GeoPoint& p, EdgeRule rule) noexcept {
  if (p.lat < box.min_lat || p.lon < box.min_lon) return false;
  if (rule == EdgeRule::closed) {
    return p.lat <= box.max_lat && p.lon <= box.max_lon;
  }
  return p.lat < box.max_lat && p.lon < box.max_lon;
}

std::array<BoundingBox, 4> bbox_quadrants(const BoundingBox& box) {
  if (!(box.max_lat > box.min_lat) || !(box.max_lon > box.min_lon)) {
    raise(Errc::degenerate_box, "cannot split a box with zero extent");
  }
  const double mlat = box.mid_lat();
  const double mlon = box.mid_lon();
  return {
      BoundingBox{mlat, box.max_lat, box.min_lon, mlon},  // NW
      BoundingBox{mlat, box.max_lat, mlon, box.max_lon},  // NE
      BoundingBox{box.min_lat, mlat, box.min_lon, mlon},  // SW
      BoundingBox{box.min_lat, mlat, mlon, box.max_lon},  // SE
  };
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept {
  const double lat1 = a.lat * kDegToRad;
  const double lat2 = b.lat * kDegToRad;
  const double dlat = std::fabs(lat1 - lat2);
  const double dlon = std::fabs(a.lon - b.lon) * kDegToRad;
  double h = hav(dlat) + std::cos(lat1) * std::cos(lat2) * hav(dlon);
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

GeoPoint centroid(std::span<const GeoPoint> points) {
  if (points.empty()) raise(Errc::empty_input, "centroid of an empty point set");
  double lat = 0.0, lon = 0.0;
  for (const GeoPoint& p : points) {
    lat += p.lat;
    lon += p.lon;
  }
  const double n = static_cast<double>(points.size());
  return GeoPoint{lat / n, lon / n};
}

double min_distance_km(const BoundingBox& box, const GeoPoint& p) noexcept {
  // Lower-bounds each haversine term independently: the latitude gap to the
  // box's latitude range, the smallest wrapped longitude gap to its
  // longitude range, and the smallest cosine the box latitude can
  // contribute.
  double dlat = 0.0;
  if (p.lat < box.min_lat) dlat = box.min_lat - p.lat;
  else if (p.lat > box.max_lat) dlat = p.lat - box.max_lat;

  double hav_lon = 0.0;
  if (p.lon < box.min_lon || p.lon > box.max_lon) {
    // hav() wraps at 360 degrees, so a raw gap past 180 means the far edge
    // can be the angularly nearer one; both edges are candidates.
    hav_lon = std::min(hav(std::fabs(p.lon - box.min_lon) * kDegToRad),
                       hav(std::fabs(p.lon - box.max_lon) * kDegToRad));
  }

  const double abs_lat = std::max(std::fabs(box.min_lat), std::fabs(box.max_lat));
  const double cos_box = std::cos(std::min(abs_lat, 90.0) * kDegToRad);
  const double cos_p = std::cos(p.lat * kDegToRad);

  double h = hav(dlat * kDegToRad) + std::max(cos_p, 0.0) * std::max(cos_box, 0.0) * hav_lon;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

double km_to_miles(double km) noexcept { return km * kMilesPerKm; }

}  // namespace geoinfer
