#include "textproc.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_set>

namespace geoinfer {

namespace {

bool is_space_byte(unsigned char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool starts_with_nocase(std::string_view s, std::string_view prefix) noexcept {
  if (s.size() < prefix.size()) return false;
  for (size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

bool looks_like_url(std::string_view chunk) noexcept {
  return starts_with_nocase(chunk, "http://") || starts_with_nocase(chunk, "https://") ||
         starts_with_nocase(chunk, "www.");
}

const std::unordered_set<std::string_view>& stopword_set() {
  static const std::unordered_set<std::string_view> words = {
      "a",    "an",   "and",  "are",  "as",   "at",   "be",   "but",  "by",
      "for",  "from", "had",  "has",  "have", "he",   "her",  "his",  "i",
      "if",   "in",   "is",   "it",   "its",  "me",   "my",   "no",   "not",
      "of",   "on",   "or",   "our",  "she",  "so",   "that", "the",  "their",
      "them", "then", "there", "they", "this", "to",   "was",  "we",   "were",
      "what", "when", "where", "which", "who", "will", "with", "you",  "your",
  };
  return words;
}

}  // namespace

bool is_stopword(std::string_view token) {
  return stopword_set().count(token) != 0;
}

std::vector<std::string> normalize_tokenize(std::string_view text,
                                            const TokenizerConfig& cfg) {
  std::vector<std::string> out;
  std::string tok;
  const auto flush = [&] {
    if (static_cast<int>(tok.size()) >= cfg.min_len &&
        !(cfg.remove_stopwords && is_stopword(tok))) {
      out.push_back(tok);
    }
    tok.clear();
  };

  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    while (i < n && is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
    size_t j = i;
    while (j < n && !is_space_byte(static_cast<unsigned char>(text[j]))) ++j;
    const std::string_view chunk = text.substr(i, j - i);
    i = j;
    if (chunk.empty()) continue;
    if (cfg.remove_mentions && chunk.front() == '@') continue;
    if (cfg.remove_urls && looks_like_url(chunk)) continue;
    for (unsigned char c : chunk) {
      if (c >= 0x80) {
        tok.push_back(static_cast<char>(c));
      } else if (std::isalnum(c)) {
        tok.push_back(static_cast<char>(std::tolower(c)));
      } else {
        flush();  // '#' and all other punctuation separate tokens
      }
    }
    flush();
  }
  return out;
}

std::vector<Record> dedup_corpus(const std::vector<Record>& records) {
  std::vector<Record> kept;
  std::unordered_set<std::string_view> seen;
  seen.reserve(records.size());
  for (const Record& r : records) {
    if (seen.insert(r.text).second) kept.push_back(r);
  }
  return kept;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus,
                             int64_t min_df) {
  if (min_df < 1) raise(Errc::invalid_argument, "min_df must be >= 1");

  // First-seen order and document frequencies in one pass over the corpus.
  std::unordered_map<std::string_view, int64_t> df;
  std::vector<std::string_view> order;
  std::unordered_set<std::string_view> in_doc;
  for (const auto& doc : corpus) {
    in_doc.clear();
    for (const std::string& tok : doc) {
      if (!in_doc.insert(tok).second) continue;
      auto [it, inserted] = df.emplace(tok, 0);
      if (inserted) order.push_back(tok);
      ++it->second;
    }
  }

  Vocabulary v;
  for (std::string_view tok : order) {
    const int64_t freq = df[tok];
    if (freq < min_df) continue;
    const int32_t id = static_cast<int32_t>(v.tokens_.size());
    v.tokens_.emplace_back(tok);
    v.doc_freq_.push_back(freq);
    v.index_.emplace(v.tokens_.back(), id);
  }
  if (v.tokens_.empty()) {
    raise(Errc::empty_vocabulary, "no token reaches min_df=" + std::to_string(min_df));
  }
  return v;
}

Vocabulary Vocabulary::from_parts(std::vector<std::string> tokens,
                                  std::vector<int64_t> doc_freq,
                                  std::vector<std::pair<std::string, int32_t>> aliases) {
  if (tokens.empty()) raise(Errc::empty_vocabulary, "vocabulary has no tokens");
  if (tokens.size() != doc_freq.size()) {
    raise(Errc::invalid_argument, "token and frequency lists differ in length");
  }
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.doc_freq_ = std::move(doc_freq);
  for (size_t id = 0; id < v.tokens_.size(); ++id) {
    if (!v.index_.emplace(v.tokens_[id], static_cast<int32_t>(id)).second) {
      raise(Errc::invalid_argument, "duplicate vocabulary token: " + v.tokens_[id]);
    }
  }
  for (auto& [tok, id] : aliases) {
    if (id < 0 || id >= v.size()) {
      raise(Errc::invalid_argument, "alias points at unknown feature id");
    }
    if (!v.index_.emplace(std::move(tok), id).second) {
      raise(Errc::invalid_argument, "alias collides with an existing token");
    }
  }
  return v;
}

int32_t Vocabulary::id_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

const std::string& Vocabulary::token_of(int32_t id) const {
  if (id < 0 || id >= size()) raise(Errc::invalid_argument, "feature id out of range");
  return tokens_[id];
}

int64_t Vocabulary::doc_freq(int32_t id) const {
  if (id < 0 || id >= size()) raise(Errc::invalid_argument, "feature id out of range");
  return doc_freq_[id];
}

std::vector<std::pair<std::string, int32_t>> Vocabulary::aliases_sorted() const {
  std::vector<std::pair<std::string, int32_t>> out;
  for (const auto& [tok, id] : index_) {
    if (tok != tokens_[id]) out.emplace_back(tok, id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

uint64_t Vocabulary::hash() const {
  // FNV-1a over the canonical token list and the sorted alias table.
  uint64_t h = 1469598103934665603ull;
  const auto mix = [&h](std::string_view bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0x1f;
    h *= 1099511628211ull;
  };
  for (size_t id = 0; id < tokens_.size(); ++id) {
    mix(tokens_[id]);
    mix(std::to_string(doc_freq_[id]));
  }
  for (const auto& [tok, id] : aliases_sorted()) {
    mix(tok);
    mix(std::to_string(id));
  }
  return h;
}

FeatureVector vectorize(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::map<int32_t, int32_t> counts;
  for (const std::string& tok : tokens) {
    const int32_t id = vocab.id_of(tok);
    if (id >= 0) ++counts[id];
  }
  FeatureVector x;
  x.entries.assign(counts.begin(), counts.end());
  return x;
}

}  // namespace geoinfer
