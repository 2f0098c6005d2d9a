#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "classify.hpp"
#include "embedding.hpp"
#include "textproc.hpp"

namespace geoinfer {

// Every knob of the pipeline, settable from a key=value config file and
// overridable per key. All randomness downstream derives from `seed`.
struct PipelineConfig {
  enum class EmbeddingSource { train, load, off };

  // corpus
  std::string corpus_path;
  int col_user = 0;
  int col_lat = 1;
  int col_lon = 2;
  int col_text = 3;

  // partition
  int32_t capacity = 5000;
  std::vector<int32_t> capacities;  // evaluation sweep; empty means {capacity}
  int32_t max_depth = 20;
  bool global_partition = false;  // one tree on the full dataset instead of per fold

  // text features
  TokenizerConfig tokenizer;
  int64_t min_df = 5;

  // embeddings and vocabulary reduction
  EmbeddingSource embedding = EmbeddingSource::train;
  std::string embedding_path;
  double cos_threshold = 0.85;
  double jac_threshold = 0.80;
  int ngram_n = 2;
  CbowOptions cbow;  // cbow.seed is overridden by `seed`

  // classifiers
  std::vector<std::string> classifiers = {"logit"};
  double alpha = 1.0;
  LogitOptions logit;

  // evaluation
  int k_folds = 10;
  uint64_t seed = 42;
  bool bias_train = false;   // leaf-frequency weights as training sample weights
  bool bias_report = false;  // leaf-frequency weights folded into reported metrics
  bool record_timing = false;  // emit wall-clock numbers inside CSV/JSON artifacts
  std::string output_dir = ".";

  // Applies one key=value pair; throws invalid_argument on unknown keys or
  // unparsable values.
  void set(const std::string& key, const std::string& value);

  // Reads a file of key=value lines ('#' starts a comment).
  void load_file(const std::string& path);

  // Complains about out-of-range combinations before a run starts.
  void validate() const;

  // Sorted key=value serialization of every setting; input to fingerprint().
  std::string canonical_string() const;

  // 16 hex chars identifying this exact configuration.
  std::string fingerprint() const;

  std::vector<int32_t> capacity_list() const {
    return capacities.empty() ? std::vector<int32_t>{capacity} : capacities;
  }
};

uint64_t fnv1a_64(std::string_view bytes);
std::string to_hex(uint64_t value);

}  // namespace geoinfer
