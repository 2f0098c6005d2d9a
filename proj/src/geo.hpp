#pragma once

#include <array>
#include <span>

#include "error.hpp"

namespace geoinfer {

// IUGG mean Earth radius.
inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr double kMilesPerKm = 0.621371;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

bool point_valid(const GeoPoint& p) noexcept;

// Validated constructor; throws on non-finite or out-of-range coordinates.
GeoPoint make_point(double lat, double lon);

// Axis-aligned lat/lon rectangle. Does not model antimeridian wrap; all
// callers in this library work with boxes that stay inside [-180, 180].
struct BoundingBox {
  double min_lat = 0.0;
  double max_lat = 0.0;
  double min_lon = 0.0;
  double max_lon = 0.0;

  double mid_lat() const noexcept { return 0.5 * (min_lat + max_lat); }
  double mid_lon() const noexcept { return 0.5 * (min_lon + max_lon); }
};

BoundingBox make_box(double min_lat, double max_lat, double min_lon, double max_lon);

// Interior boxes are half-open on both axes so that a point on a shared
// split line lives in exactly one sibling. A tree root closes its max
// edges instead, which is what the `closed` rule is for.
enum class EdgeRule { half_open, closed };

bool bbox_contains(const BoundingBox& box, const GeoPoint& p,
                   EdgeRule rule = EdgeRule::half_open) noexcept;

// Quadrants split at the axis midpoints, ordered NW, NE, SW, SE.
// Throws degenerate_box when either axis has zero extent.
std::array<BoundingBox, 4> bbox_quadrants(const BoundingBox& box);

// Great-circle distance in km. Symmetric by construction (bitwise).
double haversine_km(const GeoPoint& a, const GeoPoint& b) noexcept;

// Planar mean of coordinates; throws empty_input on an empty span.
GeoPoint centroid(std::span<const GeoPoint> points);

// Lower bound on the haversine distance from p to any point inside box.
// Exact for the common clamp case, conservative otherwise, so it is safe
// to prune a search region whenever this exceeds the query radius.
double min_distance_km(const BoundingBox& box, const GeoPoint& p) noexcept;

double km_to_miles(double km) noexcept;

}  // namespace geoinfer
