#include "geoinfer/geoinfer.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "pipeline.hpp"
#include "quadtree.hpp"

using namespace geoinfer;

struct geoinfer_config {
  PipelineConfig impl;
};
struct geoinfer_corpus {
  std::vector<Record> records;
  IngestReport report;
};
struct geoinfer_partition {
  QuadtreePartition impl;
};
struct geoinfer_bundle {
  ModelBundle impl;
};

namespace {

thread_local std::string g_last_error;

geoinfer_status status_from(const Error& e) {
  g_last_error = e.what();
  switch (error_category(e.code())) {
    case 1:
      return GEOINFER_ERR_ARGUMENT;
    case 2:
      return GEOINFER_ERR_DATA;
    default:
      return GEOINFER_ERR_INTERNAL;
  }
}

template <typename Fn>
geoinfer_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return GEOINFER_OK;
  } catch (const Error& e) {
    return status_from(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GEOINFER_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return GEOINFER_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

geoinfer_status require(bool ok, const char* message) {
  if (ok) return GEOINFER_OK;
  g_last_error = message;
  return GEOINFER_ERR_ARGUMENT;
}

void fill_report(const IngestReport& in, geoinfer_ingest_report* out) {
  if (!out) return;
  out->read = in.read;
  out->parsed = in.parsed;
  out->malformed = in.malformed;
  out->deduped = in.deduped;
  out->kept = in.kept;
}

}  // namespace

extern "C" {

const char* geoinfer_version(void) { return "0.1.0"; }

const char* geoinfer_last_error(void) { return g_last_error.c_str(); }

void geoinfer_string_free(char* s) { std::free(s); }

geoinfer_config* geoinfer_config_new(void) { return new (std::nothrow) geoinfer_config(); }

void geoinfer_config_free(geoinfer_config* cfg) { delete cfg; }

geoinfer_status geoinfer_config_set(geoinfer_config* cfg, const char* key,
                                    const char* value) {
  if (auto st = require(cfg && key && value, "null argument")) return st;
  return guarded([&] { cfg->impl.set(key, value); });
}

geoinfer_status geoinfer_config_load_file(geoinfer_config* cfg, const char* path) {
  if (auto st = require(cfg && path, "null argument")) return st;
  return guarded([&] { cfg->impl.load_file(path); });
}

geoinfer_status geoinfer_config_fingerprint(const geoinfer_config* cfg, char** out) {
  if (auto st = require(cfg && out, "null argument")) return st;
  return guarded([&] {
    *out = dup_string(cfg->impl.fingerprint());
    if (!*out) raise(Errc::internal, "allocation failed");
  });
}

geoinfer_status geoinfer_corpus_load(const geoinfer_config* cfg, const char* path,
                                     geoinfer_corpus** out) {
  if (auto st = require(cfg && path && out, "null argument")) return st;
  return guarded([&] {
    auto [records, report] = load_corpus(path, cfg->impl);
    auto* corpus = new geoinfer_corpus();
    corpus->records = std::move(records);
    corpus->report = report;
    *out = corpus;
  });
}

void geoinfer_corpus_free(geoinfer_corpus* corpus) { delete corpus; }

geoinfer_status geoinfer_corpus_report(const geoinfer_corpus* corpus,
                                       geoinfer_ingest_report* out) {
  if (auto st = require(corpus && out, "null argument")) return st;
  fill_report(corpus->report, out);
  return GEOINFER_OK;
}

int64_t geoinfer_corpus_size(const geoinfer_corpus* corpus) {
  return corpus ? static_cast<int64_t>(corpus->records.size()) : 0;
}

geoinfer_status geoinfer_partition_build(const geoinfer_corpus* corpus,
                                         const geoinfer_config* cfg,
                                         geoinfer_partition** out) {
  if (auto st = require(corpus && cfg && out, "null argument")) return st;
  return guarded([&] {
    std::vector<IndexedPoint> points;
    points.reserve(corpus->records.size());
    BoundingBox bounds{90.0, -90.0, 180.0, -180.0};
    for (const Record& r : corpus->records) {
      points.push_back(IndexedPoint{r.record_id, r.point});
      bounds.min_lat = std::min(bounds.min_lat, r.point.lat);
      bounds.max_lat = std::max(bounds.max_lat, r.point.lat);
      bounds.min_lon = std::min(bounds.min_lon, r.point.lon);
      bounds.max_lon = std::max(bounds.max_lon, r.point.lon);
    }
    *out = new geoinfer_partition{
        QuadtreePartition::build(points, bounds, cfg->impl.capacity, cfg->impl.max_depth)};
  });
}

void geoinfer_partition_free(geoinfer_partition* partition) { delete partition; }

int32_t geoinfer_partition_leaf_count(const geoinfer_partition* partition) {
  return partition ? static_cast<int32_t>(partition->impl.leaves().size()) : 0;
}

geoinfer_status geoinfer_partition_leaf_info(const geoinfer_partition* partition,
                                             int32_t leaf_id, geoinfer_leaf_info* out) {
  if (auto st = require(partition && out, "null argument")) return st;
  const auto& leaves = partition->impl.leaves();
  if (leaf_id < 0 || static_cast<size_t>(leaf_id) >= leaves.size()) {
    g_last_error = "leaf_id out of range";
    return GEOINFER_ERR_ARGUMENT;
  }
  const QuadtreeLeaf& leaf = leaves[leaf_id];
  out->leaf_id = leaf.leaf_id;
  out->depth = leaf.depth;
  out->count = static_cast<int64_t>(leaf.point_ids.size());
  out->min_lat = leaf.box.min_lat;
  out->max_lat = leaf.box.max_lat;
  out->min_lon = leaf.box.min_lon;
  out->max_lon = leaf.box.max_lon;
  out->centroid_lat = leaf.centroid.lat;
  out->centroid_lon = leaf.centroid.lon;
  return GEOINFER_OK;
}

geoinfer_status geoinfer_partition_locate(const geoinfer_partition* partition, double lat,
                                          double lon, int32_t* out_leaf) {
  if (auto st = require(partition && out_leaf, "null argument")) return st;
  return guarded([&] { *out_leaf = partition->impl.locate(GeoPoint{lat, lon}); });
}

geoinfer_status geoinfer_partition_locate_nearest(const geoinfer_partition* partition,
                                                  double lat, double lon,
                                                  int32_t* out_leaf) {
  if (auto st = require(partition && out_leaf, "null argument")) return st;
  return guarded([&] { *out_leaf = partition->impl.locate_nearest(GeoPoint{lat, lon}); });
}

geoinfer_status geoinfer_partition_geojson(const geoinfer_partition* partition,
                                           const char* fingerprint, char** out) {
  if (auto st = require(partition && out, "null argument")) return st;
  return guarded([&] {
    *out = dup_string(partition->impl.to_geojson(fingerprint ? fingerprint : ""));
    if (!*out) raise(Errc::internal, "allocation failed");
  });
}

geoinfer_status geoinfer_bundle_train(const geoinfer_corpus* corpus,
                                      const geoinfer_config* cfg, geoinfer_bundle** out) {
  if (auto st = require(corpus && cfg && out, "null argument")) return st;
  return guarded([&] {
    *out = new geoinfer_bundle{train_bundle(corpus->records, cfg->impl)};
  });
}

geoinfer_status geoinfer_bundle_save(const geoinfer_bundle* bundle, const char* path) {
  if (auto st = require(bundle && path, "null argument")) return st;
  return guarded([&] { save_bundle(bundle->impl, path); });
}

geoinfer_status geoinfer_bundle_load(const char* path, geoinfer_bundle** out) {
  if (auto st = require(path && out, "null argument")) return st;
  return guarded([&] { *out = new geoinfer_bundle{load_bundle(path)}; });
}

void geoinfer_bundle_free(geoinfer_bundle* bundle) { delete bundle; }

geoinfer_status geoinfer_bundle_predict_json(const geoinfer_bundle* bundle,
                                             const char* text, char** out) {
  if (auto st = require(bundle && text && out, "null argument")) return st;
  return guarded([&] {
    *out = dup_string(bundle_predict_json(bundle->impl, text));
    if (!*out) raise(Errc::internal, "allocation failed");
  });
}

geoinfer_status geoinfer_run_partition(const geoinfer_config* cfg,
                                       geoinfer_ingest_report* out) {
  if (auto st = require(cfg != nullptr, "null argument")) return st;
  return guarded([&] { fill_report(cmd_partition(cfg->impl), out); });
}

geoinfer_status geoinfer_run_train(const geoinfer_config* cfg,
                                   geoinfer_ingest_report* out) {
  if (auto st = require(cfg != nullptr, "null argument")) return st;
  return guarded([&] { fill_report(cmd_train(cfg->impl), out); });
}

geoinfer_status geoinfer_run_evaluate(const geoinfer_config* cfg,
                                      geoinfer_ingest_report* out) {
  if (auto st = require(cfg != nullptr, "null argument")) return st;
  return guarded([&] { fill_report(cmd_evaluate(cfg->impl, nullptr), out); });
}

double geoinfer_haversine_km(double lat1, double lon1, double lat2, double lon2) {
  const GeoPoint a{lat1, lon1};
  const GeoPoint b{lat2, lon2};
  if (!point_valid(a) || !point_valid(b)) return std::nan("");
  return haversine_km(a, b);
}

}  // extern "C"
