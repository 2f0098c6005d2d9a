#include "featurize.hpp"

namespace geoinfer {

FeatureSpace build_feature_space(const std::vector<std::vector<std::string>>& docs,
                                 const PipelineConfig& cfg) {
  FeatureSpace fs;
  fs.vocab = Vocabulary::build(docs, cfg.min_df);
  if (cfg.embedding == PipelineConfig::EmbeddingSource::off) return fs;

  if (cfg.embedding == PipelineConfig::EmbeddingSource::train) {
    CbowOptions opt = cfg.cbow;
    opt.seed = cfg.seed;
    fs.table = train_cbow(docs, opt);
  } else {
    fs.table = load_embeddings(cfg.embedding_path);
  }
  fs.merges = reduce_vocabulary(fs.vocab, *fs.table, cfg.cos_threshold,
                                cfg.jac_threshold, cfg.ngram_n);
  if (fs.merges.merge_count() > 0) {
    fs.vocab = apply_merge_map(fs.vocab, fs.merges);
  }
  return fs;
}

}  // namespace geoinfer
