#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "textproc.hpp"

namespace geoinfer {

// Cosine of the angle between two same-length vectors. Throws zero_vector
// when either has zero norm and dimension_mismatch on length disagreement.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(std::span<const float> a, std::span<const float> b);

// |A n B| / |A u B|; two empty sets are identical, so 1.0.
double jaccard_similarity(const std::set<std::string>& a, const std::set<std::string>& b);

// Contiguous character n-grams of "^word$". Repeated grams are kept
// distinct by tagging later occurrences ("oo", "oo#2", ...), so comparing
// two of these sets with jaccard_similarity respects multiplicity. A word
// shorter than n yields the single padded gram.
std::set<std::string> char_ngram_set(std::string_view word, int n);

struct CbowOptions {
  int dim = 100;
  int window = 5;
  int epochs = 5;
  int negatives = 5;
  uint64_t seed = 42;
  double learning_rate = 0.05;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(int dim) : dim_(dim) {}

  int dim() const noexcept { return dim_; }
  int32_t size() const noexcept { return static_cast<int32_t>(tokens_.size()); }

  int32_t index_of(std::string_view token) const;
  const std::string& token_at(int32_t index) const;
  std::span<const float> vector_at(int32_t index) const;
  // nullopt when the token is absent.
  std::optional<std::span<const float>> vector_of(std::string_view token) const;

  void add(std::string token, std::vector<float> values);

  CbowOptions meta;  // provenance of trained tables (window/epochs/seed)

 private:
  int dim_ = 0;
  std::vector<std::string> tokens_;
  std::vector<float> values_;  // size() * dim_, row per token
  std::unordered_map<std::string, int32_t> index_;
};

// Continuous bag-of-words with negative sampling, single threaded and fully
// determined by opt.seed. Context vectors are averaged to predict the
// center token; the returned table holds the input-side vectors.
EmbeddingTable train_cbow(const std::vector<std::vector<std::string>>& corpus,
                          const CbowOptions& opt = {});

// Token whose vector is most cosine-similar to vec(b) - vec(a) + vec(c),
// never one of a, b, c or `exclude`. Throws unknown_token when a, b or c is
// not in the table.
std::string linear_analogy(const EmbeddingTable& table, const std::string& a,
                           const std::string& b, const std::string& c,
                           const std::set<std::string>& exclude = {});

// Token -> canonical-token rewrites produced by vocabulary reduction.
// Lookups are idempotent: canonical targets always map to themselves.
class MergeMap {
 public:
  enum class Source { jaccard, cosine };

  // Records that `from` now canonicalizes to `to`. `to` must not itself be
  // a merged token.
  void add(const std::string& from, const std::string& to, Source source);

  const std::string& canonical(const std::string& token) const;
  bool is_merged(const std::string& token) const;
  size_t merge_count() const noexcept { return entries_.size(); }

  // Merged token -> (canonical, source), ordered by token.
  const std::map<std::string, std::pair<std::string, Source>>& entries() const noexcept {
    return entries_;
  }

  std::string to_tsv() const;
  static MergeMap from_tsv(std::string_view tsv);

 private:
  std::map<std::string, std::pair<std::string, Source>> entries_;
};

// Two-pass vocabulary reduction. Pass 1 merges likely misspellings: token
// pairs sharing at least one character n-gram whose padded n-gram sets have
// Jaccard similarity >= jac_threshold. Pass 2 merges likely synonyms among
// the survivors: pairs that are top-k cosine neighbors in the embedding
// table with similarity >= cos_threshold. Both passes fold the lower
// document-frequency token into the higher (ties go to the
// lexicographically smaller token). Thresholds must lie in (0, 1].
MergeMap reduce_vocabulary(const Vocabulary& vocab, const EmbeddingTable& table,
                           double cos_threshold = 0.85, double jac_threshold = 0.80,
                           int ngram_n = 2, int top_k = 10);

// Rebuilds the vocabulary with canonical tokens only (dense ids in original
// order) and alias entries for every merged spelling.
Vocabulary apply_merge_map(const Vocabulary& vocab, const MergeMap& merges);

// Text format: optional "<count> <dim>" header, then one "token v1 .. vd"
// line per token.
void save_embeddings(const EmbeddingTable& table, const std::string& path);
EmbeddingTable load_embeddings(const std::string& path);

}  // namespace geoinfer
