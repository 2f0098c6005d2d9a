#pragma once

#include <string>
#include <vector>

#include "classify.hpp"
#include "config.hpp"
#include "embedding.hpp"
#include "eval.hpp"
#include "quadtree.hpp"
#include "textproc.hpp"

namespace geoinfer {

struct IngestReport {
  int64_t read = 0;      // physical lines in the file
  int64_t parsed = 0;    // lines that yielded a valid record
  int64_t malformed = 0; // skipped lines
  int64_t deduped = 0;   // records dropped as duplicate text
  int64_t kept = 0;      // records remaining after deduplication
};

// Reads a TSV corpus (user id, latitude, longitude, text by default; column
// indices are configurable). Malformed lines are skipped and counted;
// exact-duplicate texts keep their first occurrence. Throws file_not_found
// and, when nothing parses, no_valid_records.
std::pair<std::vector<Record>, IngestReport> load_corpus(const std::string& path,
                                                         const PipelineConfig& cfg);

// Everything needed to serve predictions: the leaf table of the partition,
// the vocabulary (with merge aliases folded in), the merge map itself, and
// one fitted classifier bound to the vocabulary by content hash.
struct ModelBundle {
  std::string config_fingerprint;
  TokenizerConfig tokenizer;
  int32_t capacity = 0;
  int32_t max_depth = 0;
  std::vector<QuadtreeLeaf> leaves;
  Vocabulary vocab;
  MergeMap merges;
  std::string classifier;  // "mnb" or "logit"
  MnbModel mnb;
  LogitModel logit;
};

ModelBundle train_bundle(const std::vector<Record>& records, const PipelineConfig& cfg);
void save_bundle(const ModelBundle& bundle, const std::string& path);
// Verifies the stored classifier's vocabulary hash against the stored
// vocabulary; throws vocabulary_mismatch when they disagree.
ModelBundle load_bundle(const std::string& path);

struct PredictOutput {
  int32_t leaf_id = -1;
  GeoPoint point;          // centroid of the predicted leaf
  double confidence = 0.0;
  bool low_evidence = false;  // no in-vocabulary token in the input
};

PredictOutput bundle_predict(const ModelBundle& bundle, std::string_view text);
// One-line JSON object {leaf_id, lat, lon, confidence, low_evidence, fingerprint}.
std::string bundle_predict_json(const ModelBundle& bundle, std::string_view text);

// Partition the corpus and write partition.geojson plus leaf_stats.csv
// under cfg.output_dir.
IngestReport cmd_partition(const PipelineConfig& cfg);

// Train one classifier on the full corpus and write bundle.json.
IngestReport cmd_train(const PipelineConfig& cfg);

// Cross-validate every (capacity, classifier) combination and write
// metrics.csv, report.json, per-combination diagnostics CSVs and a
// timing.log sidecar under cfg.output_dir.
IngestReport cmd_evaluate(const PipelineConfig& cfg, const TestHook* hook = nullptr);

// Serialization helpers shared by commands and tests.
std::string metrics_csv(const std::vector<EvalReport>& reports);
std::string report_json(const std::vector<EvalReport>& reports);
std::string diagnostics_csv(const EvalReport& report);
std::string leaf_stats_csv(const QuadtreePartition& partition, const std::string& fingerprint);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace geoinfer
