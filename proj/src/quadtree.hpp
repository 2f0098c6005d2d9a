#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geo.hpp"

namespace geoinfer {

struct IndexedPoint {
  uint32_t record_id = 0;
  GeoPoint point;
};

struct QuadtreeLeaf {
  int32_t leaf_id = -1;
  BoundingBox box;
  int32_t depth = 0;
  std::vector<uint32_t> point_ids;  // record ids of the points in this leaf
  GeoPoint centroid;
};

struct LeafStats {
  int32_t leaf_id = -1;
  int64_t count = 0;
  int32_t depth = 0;
  BoundingBox box;
  GeoPoint centroid;
};

// Point-region quadtree over lat/lon. A node holding more points than
// `capacity` splits at its box midpoints into NW/NE/SW/SE children until
// `max_depth`, which caps recursion when many records share a coordinate.
// Empty children are never materialized; leaf ids are dense 0..L-1 in
// depth-first NW,NE,SW,SE order.
class QuadtreePartition {
 public:
  static constexpr int32_t kDefaultMaxDepth = 20;

  static QuadtreePartition build(std::span<const IndexedPoint> points,
                                 const BoundingBox& bounds,
                                 int32_t capacity,
                                 int32_t max_depth = kDefaultMaxDepth);

  // Leaf containing p. Descending into a region that holds no points falls
  // back to the nearest leaf centroid by haversine distance (ties go to the
  // lower leaf id). Throws out_of_bounds when p lies outside the root box,
  // whose max edges are closed.
  int32_t locate(const GeoPoint& p) const;

  // locate() extended to arbitrary valid points: anything outside the root
  // box is also assigned to the nearest leaf centroid.
  int32_t locate_nearest(const GeoPoint& p) const;

  // Record ids of all indexed points within radius_km of center (<=, so a
  // zero radius matches only exact coordinate hits). Equivalent to a linear
  // scan over the indexed points.
  std::vector<uint32_t> radius_query(const GeoPoint& center, double radius_km) const;

  std::vector<LeafStats> leaf_stats() const;

  const std::vector<QuadtreeLeaf>& leaves() const noexcept { return leaves_; }
  const BoundingBox& bounds() const noexcept { return bounds_; }
  int32_t capacity() const noexcept { return capacity_; }
  int32_t max_depth() const noexcept { return max_depth_; }
  int64_t size() const noexcept { return total_points_; }
  int32_t leaf_count() const noexcept { return static_cast<int32_t>(leaves_.size()); }

  // FeatureCollection with one Polygon per leaf box and one Point per leaf
  // centroid; both carry {leaf_id, count, depth} properties.
  std::string to_geojson(const std::string& fingerprint = {}) const;

 private:
  struct Node {
    BoundingBox box;
    int32_t depth = 0;
    std::array<int32_t, 4> child{{-1, -1, -1, -1}};  // NW, NE, SW, SE
    int32_t leaf_id = -1;                            // >= 0 iff leaf
  };

  QuadtreePartition() = default;

  int32_t build_node(const BoundingBox& box, int32_t depth,
                     std::vector<uint32_t>&& positions);
  static int quadrant_of(const BoundingBox& box, const GeoPoint& p) noexcept;
  int32_t nearest_leaf_by_centroid(const GeoPoint& p) const;

  std::vector<Node> nodes_;
  std::vector<QuadtreeLeaf> leaves_;
  std::vector<std::vector<uint32_t>> leaf_positions_;  // indices into points_
  BoundingBox bounds_;
  int32_t capacity_ = 0;
  int32_t max_depth_ = kDefaultMaxDepth;
  int64_t total_points_ = 0;
  std::vector<GeoPoint> points_;      // coordinates by input position
  std::vector<uint32_t> record_ids_;  // record id by input position
};

}  // namespace geoinfer
