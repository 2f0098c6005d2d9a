#pragma once

#include <optional>
#include <vector>

#include "config.hpp"
#include "embedding.hpp"
#include "textproc.hpp"

namespace geoinfer {

// Vocabulary plus the merge map and embedding table that shaped it. Built
// from training documents only, so evaluation folds never leak test text.
struct FeatureSpace {
  Vocabulary vocab;
  MergeMap merges;
  std::optional<EmbeddingTable> table;
};

// Vocabulary from the documents, then (unless embeddings are off) a trained
// or loaded embedding table drives two-pass vocabulary reduction.
FeatureSpace build_feature_space(const std::vector<std::vector<std::string>>& docs,
                                 const PipelineConfig& cfg);

}  // namespace geoinfer
