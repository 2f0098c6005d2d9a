#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geo.hpp"

namespace geoinfer {

struct TokenizerConfig {
  int min_len = 2;
  bool remove_urls = true;
  bool remove_mentions = true;
  bool remove_stopwords = false;
};

// Lowercases, drops URLs and @mentions, strips '#', then splits on
// non-alphanumeric bytes and keeps tokens of at least min_len characters.
// Bytes >= 0x80 are kept verbatim inside tokens so multi-byte UTF-8
// sequences survive intact.
std::vector<std::string> normalize_tokenize(std::string_view text,
                                            const TokenizerConfig& cfg = {});

bool is_stopword(std::string_view token);

struct Record {
  uint32_t record_id = 0;
  std::string user_id;
  GeoPoint point;
  std::string text;
};

// Keeps the first record for each exact text string, preserving order.
std::vector<Record> dedup_corpus(const std::vector<Record>& records);

// Sparse count vector, entries sorted by feature id, counts >= 1.
struct FeatureVector {
  std::vector<std::pair<int32_t, int32_t>> entries;

  int64_t total() const noexcept {
    int64_t t = 0;
    for (const auto& [id, count] : entries) t += count;
    return t;
  }
  bool empty() const noexcept { return entries.empty(); }
};

// Token -> dense feature id table with document frequencies. After a merge
// map is applied (see embedding.hpp) the lookup table also carries alias
// entries pointing merged spellings at their canonical feature id.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Features are tokens whose document frequency is >= min_df; ids follow
  // first-seen order in the corpus. Throws empty_vocabulary when no token
  // survives.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          int64_t min_df);

  // Reassembles a vocabulary from stored parts (bundle loading, merges).
  static Vocabulary from_parts(std::vector<std::string> tokens,
                               std::vector<int64_t> doc_freq,
                               std::vector<std::pair<std::string, int32_t>> aliases);

  int32_t id_of(std::string_view token) const;  // -1 when out of vocabulary
  const std::string& token_of(int32_t id) const;
  int64_t doc_freq(int32_t id) const;
  int32_t size() const noexcept { return static_cast<int32_t>(tokens_.size()); }

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::vector<int64_t>& doc_freqs() const noexcept { return doc_freq_; }
  // Alias entries (merged token -> canonical feature id), sorted by token.
  std::vector<std::pair<std::string, int32_t>> aliases_sorted() const;

  // Stable content hash over tokens, ids, frequencies and aliases; used to
  // bind persisted classifiers to the vocabulary they were trained on.
  uint64_t hash() const;

 private:
  std::vector<std::string> tokens_;
  std::vector<int64_t> doc_freq_;
  std::unordered_map<std::string, int32_t> index_;  // canonical tokens + aliases
};

// Count vector over vocabulary features; out-of-vocabulary tokens are
// ignored, merged spellings count toward their canonical feature.
FeatureVector vectorize(std::span<const std::string> tokens, const Vocabulary& vocab);

}  // namespace geoinfer
