#include "quadtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "json.hpp"

namespace geoinfer {

QuadtreePartition QuadtreePartition::build(std::span<const IndexedPoint> points,
                                           const BoundingBox& bounds,
                                           int32_t capacity,
                                           int32_t max_depth) {
  if (capacity < 1 || max_depth < 0) {
    raise(Errc::invalid_argument, "capacity must be >= 1 and max_depth >= 0");
  }
  if (!(bounds.max_lat >= bounds.min_lat) || !(bounds.max_lon >= bounds.min_lon)) {
    raise(Errc::invalid_argument, "invalid bounds");
  }
  if (points.empty()) raise(Errc::empty_input, "cannot partition zero points");

  QuadtreePartition qt;
  qt.bounds_ = bounds;
  qt.capacity_ = capacity;
  qt.max_depth_ = max_depth;
  qt.total_points_ = static_cast<int64_t>(points.size());

  qt.points_.reserve(points.size());
  qt.record_ids_.reserve(points.size());
  std::vector<uint32_t> positions(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const IndexedPoint& ip = points[i];
    if (!point_valid(ip.point)) {
      raise(Errc::point_out_of_bounds,
            "record " + std::to_string(ip.record_id) + " has invalid coordinates");
    }
    if (!bbox_contains(bounds, ip.point, EdgeRule::closed)) {
      raise(Errc::point_out_of_bounds,
            "record " + std::to_string(ip.record_id) + " lies outside the root box");
    }
    qt.points_.push_back(ip.point);
    qt.record_ids_.push_back(ip.record_id);
    positions[i] = static_cast<uint32_t>(i);
  }

  qt.build_node(bounds, 0, std::move(positions));
  return qt;
}

int QuadtreePartition::quadrant_of(const BoundingBox& box, const GeoPoint& p) noexcept {
  const bool north = p.lat >= box.mid_lat();
  const bool east = p.lon >= box.mid_lon();
  if (north) return east ? 1 : 0;  // NE : NW
  return east ? 3 : 2;             // SE : SW
}

int32_t QuadtreePartition::build_node(const BoundingBox& box, int32_t depth,
                                      std::vector<uint32_t>&& positions) {
  const int32_t node_index = static_cast<int32_t>(nodes_.size());
  nodes_.push_back(Node{box, depth, {{-1, -1, -1, -1}}, -1});

  const bool splittable = box.max_lat > box.min_lat && box.max_lon > box.min_lon;
  if (static_cast<int32_t>(positions.size()) > capacity_ && depth < max_depth_ && splittable) {
    std::array<std::vector<uint32_t>, 4> buckets;
    for (uint32_t pos : positions) {
      buckets[quadrant_of(box, points_[pos])].push_back(pos);
    }
    positions.clear();
    const auto quads = bbox_quadrants(box);
    for (int q = 0; q < 4; ++q) {
      if (buckets[q].empty()) continue;  // empty quadrants are pruned
      const int32_t child = build_node(quads[q], depth + 1, std::move(buckets[q]));
      nodes_[node_index].child[q] = child;
    }
    return node_index;
  }

  const int32_t leaf_id = static_cast<int32_t>(leaves_.size());
  nodes_[node_index].leaf_id = leaf_id;

  QuadtreeLeaf leaf;
  leaf.leaf_id = leaf_id;
  leaf.box = box;
  leaf.depth = depth;
  std::vector<GeoPoint> pts;
  pts.reserve(positions.size());
  leaf.point_ids.reserve(positions.size());
  for (uint32_t pos : positions) {
    pts.push_back(points_[pos]);
    leaf.point_ids.push_back(record_ids_[pos]);
  }
  if (!pts.empty()) leaf.centroid = centroid(pts);
  leaves_.push_back(std::move(leaf));
  leaf_positions_.push_back(std::move(positions));
  return node_index;
}

int32_t QuadtreePartition::nearest_leaf_by_centroid(const GeoPoint& p) const {
  int32_t best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const QuadtreeLeaf& leaf : leaves_) {
    const double d = haversine_km(p, leaf.centroid);
    if (d < best_dist) {  // strict: equal distances keep the lower leaf id
      best_dist = d;
      best = leaf.leaf_id;
    }
  }
  if (best < 0) raise(Errc::internal, "partition has no leaves");
  return best;
}

int32_t QuadtreePartition::locate(const GeoPoint& p) const {
  if (!point_valid(p)) raise(Errc::invalid_argument, "invalid query point");
  if (!bbox_contains(bounds_, p, EdgeRule::closed)) {
    raise(Errc::out_of_bounds, "query point lies outside the root box");
  }
  int32_t node = 0;
  while (nodes_[node].leaf_id < 0) {
    const int32_t child = nodes_[node].child[quadrant_of(nodes_[node].box, p)];
    if (child < 0) return nearest_leaf_by_centroid(p);
    node = child;
  }
  return nodes_[node].leaf_id;
}

int32_t QuadtreePartition::locate_nearest(const GeoPoint& p) const {
  if (!point_valid(p)) raise(Errc::invalid_argument, "invalid query point");
  if (!bbox_contains(bounds_, p, EdgeRule::closed)) {
    return nearest_leaf_by_centroid(p);
  }
  return locate(p);
}

std::vector<uint32_t> QuadtreePartition::radius_query(const GeoPoint& center,
                                                      double radius_km) const {
  if (!point_valid(center) || !(radius_km >= 0.0)) {
    raise(Errc::invalid_argument, "radius query needs a valid center and radius >= 0");
  }
  std::vector<uint32_t> hits;
  if (nodes_.empty()) return hits;

  std::vector<int32_t> stack{0};
  while (!stack.empty()) {
    const int32_t index = stack.back();
    stack.pop_back();
    const Node& node = nodes_[index];
    if (min_distance_km(node.box, center) > radius_km) continue;
    if (node.leaf_id >= 0) {
      for (uint32_t pos : leaf_positions_[node.leaf_id]) {
        if (haversine_km(points_[pos], center) <= radius_km) {
          hits.push_back(record_ids_[pos]);
        }
      }
      continue;
    }
    for (int q = 3; q >= 0; --q) {
      if (node.child[q] >= 0) stack.push_back(node.child[q]);
    }
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

std::vector<LeafStats> QuadtreePartition::leaf_stats() const {
  std::vector<LeafStats> stats;
  stats.reserve(leaves_.size());
  for (const QuadtreeLeaf& leaf : leaves_) {
    stats.push_back(LeafStats{leaf.leaf_id, static_cast<int64_t>(leaf.point_ids.size()),
                              leaf.depth, leaf.box, leaf.centroid});
  }
  return stats;
}

std::string QuadtreePartition::to_geojson(const std::string& fingerprint) const {
  nlohmann::json features = nlohmann::json::array();
  for (const QuadtreeLeaf& leaf : leaves_) {
    nlohmann::json props = {
        {"leaf_id", leaf.leaf_id},
        {"count", leaf.point_ids.size()},
        {"depth", leaf.depth},
    };
    const BoundingBox& b = leaf.box;
    nlohmann::json ring = nlohmann::json::array({
        nlohmann::json::array({b.min_lon, b.min_lat}),
        nlohmann::json::array({b.max_lon, b.min_lat}),
        nlohmann::json::array({b.max_lon, b.max_lat}),
        nlohmann::json::array({b.min_lon, b.max_lat}),
        nlohmann::json::array({b.min_lon, b.min_lat}),
    });
    features.push_back({
        {"type", "Feature"},
        {"geometry", {{"type", "Polygon"}, {"coordinates", nlohmann::json::array({ring})}}},
        {"properties", props},
    });
    features.push_back({
        {"type", "Feature"},
        {"geometry",
         {{"type", "Point"},
          {"coordinates", nlohmann::json::array({leaf.centroid.lon, leaf.centroid.lat})}}},
        {"properties", props},
    });
  }
  nlohmann::json doc = {
      {"type", "FeatureCollection"},
      {"features", features},
  };
  if (!fingerprint.empty()) doc["config_fingerprint"] = fingerprint;
  return doc.dump(2) + "\n";
}

}  // namespace geoinfer
