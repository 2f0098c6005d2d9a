#pragma once

// Deterministic corpus and point generators shared by the test suites and
// the acceptance harness.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "geo.hpp"
#include "quadtree.hpp"
#include "textproc.hpp"

namespace geoinfer::synth {

inline std::vector<IndexedPoint> random_points(size_t n, const BoundingBox& box,
                                               uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ulat(box.min_lat, box.max_lat);
  std::uniform_real_distribution<double> ulon(box.min_lon, box.max_lon);
  std::vector<IndexedPoint> points;
  points.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    points.push_back(IndexedPoint{static_cast<uint32_t>(i), {ulat(rng), ulon(rng)}});
  }
  return points;
}

struct ClusterSpec {
  GeoPoint center;
  double lat_spread = 0.2;  // half extent in degrees
  double lon_spread = 0.2;
  int vocab_size = 50;
  std::string prefix;  // distinct per cluster keeps vocabularies disjoint
};

// One record per (cluster, i): a point uniform in the cluster's box and
// `tokens_per_record` tokens, each a shared noise token with probability
// noise_frac and a cluster-vocabulary token otherwise.
inline std::vector<Record> cluster_corpus(const std::vector<ClusterSpec>& clusters,
                                          size_t per_cluster, int tokens_per_record,
                                          double noise_frac, int noise_vocab,
                                          uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Record> records;
  records.reserve(clusters.size() * per_cluster);
  for (size_t c = 0; c < clusters.size(); ++c) {
    const ClusterSpec& spec = clusters[c];
    std::uniform_real_distribution<double> ulat(spec.center.lat - spec.lat_spread,
                                                spec.center.lat + spec.lat_spread);
    std::uniform_real_distribution<double> ulon(spec.center.lon - spec.lon_spread,
                                                spec.center.lon + spec.lon_spread);
    for (size_t i = 0; i < per_cluster; ++i) {
      Record r;
      r.record_id = static_cast<uint32_t>(records.size());
      r.user_id = "u" + std::to_string(c) + "_" + std::to_string(i);
      r.point = GeoPoint{ulat(rng), ulon(rng)};
      for (int t = 0; t < tokens_per_record; ++t) {
        if (t > 0) r.text += ' ';
        if (noise_vocab > 0 && unit(rng) < noise_frac) {
          r.text += "noise" + std::to_string(rng() % noise_vocab);
        } else {
          r.text += spec.prefix + std::to_string(rng() % spec.vocab_size);
        }
      }
      records.push_back(std::move(r));
    }
  }
  return records;
}

inline std::vector<ClusterSpec> four_city_clusters(int vocab_size = 50) {
  return {
      {{33.45, -112.07}, 0.2, 0.2, vocab_size, "phx"},
      {{40.71, -74.01}, 0.2, 0.2, vocab_size, "nyc"},
      {{47.61, -122.33}, 0.2, 0.2, vocab_size, "sea"},
      {{29.76, -95.37}, 0.2, 0.2, vocab_size, "hou"},
  };
}

inline std::vector<ClusterSpec> grid_clusters(int rows, int cols, double lat0, double lat_step,
                                              double lon0, double lon_step,
                                              int vocab_size = 30) {
  std::vector<ClusterSpec> clusters;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      ClusterSpec spec;
      spec.center = GeoPoint{lat0 + r * lat_step, lon0 + c * lon_step};
      spec.lat_spread = 0.15;
      spec.lon_spread = 0.15;
      spec.vocab_size = vocab_size;
      spec.prefix = "g" + std::to_string(r) + "x" + std::to_string(c) + "t";
      clusters.push_back(std::move(spec));
    }
  }
  return clusters;
}

inline std::string to_tsv(const std::vector<Record>& records) {
  std::string out;
  char buf[64];
  for (const Record& r : records) {
    out += r.user_id;
    out += '\t';
    std::snprintf(buf, sizeof(buf), "%.8f", r.point.lat);
    out += buf;
    out += '\t';
    std::snprintf(buf, sizeof(buf), "%.8f", r.point.lon);
    out += buf;
    out += '\t';
    out += r.text;
    out += '\n';
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

// Fresh unique directory under the system temp dir.
inline std::string temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "%016llx",
                  static_cast<unsigned long long>(rng()));
    const auto dir = base / ("geoinfer_" + tag + "_" + suffix);
    if (std::filesystem::create_directory(dir)) return dir.string();
  }
}

}  // namespace geoinfer::synth
