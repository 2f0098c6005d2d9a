#include "embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace geoinfer {

namespace {

template <typename T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    raise(Errc::dimension_mismatch, "vectors differ in length: " +
                                        std::to_string(a.size()) + " vs " +
                                        std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    na += static_cast<double>(a[i]) * static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
  }
  if (na == 0.0 || nb == 0.0) raise(Errc::zero_vector, "cosine of a zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double sigmoid(double x) noexcept {
  if (x > 30.0) return 1.0;
  if (x < -30.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  return cosine_impl(a, b);
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  return cosine_impl(a, b);
}

double jaccard_similarity(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else { ++inter; ++ia; ++ib; }
  }
  const size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::set<std::string> char_ngram_set(std::string_view word, int n) {
  if (n < 1) raise(Errc::invalid_argument, "n-gram size must be >= 1");
  std::string padded = "^";
  padded += word;
  padded += "$";
  std::set<std::string> grams;
  if (static_cast<int>(word.size()) < n) {
    grams.insert(padded);
    return grams;
  }
  std::map<std::string, int> seen;
  for (size_t i = 0; i + n <= padded.size(); ++i) {
    std::string g = padded.substr(i, n);
    const int occurrence = ++seen[g];
    if (occurrence > 1) g += "#" + std::to_string(occurrence);
    grams.insert(std::move(g));
  }
  return grams;
}

int32_t EmbeddingTable::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

const std::string& EmbeddingTable::token_at(int32_t index) const {
  if (index < 0 || index >= size()) raise(Errc::invalid_argument, "embedding index out of range");
  return tokens_[index];
}

std::span<const float> EmbeddingTable::vector_at(int32_t index) const {
  if (index < 0 || index >= size()) raise(Errc::invalid_argument, "embedding index out of range");
  return {values_.data() + static_cast<size_t>(index) * dim_, static_cast<size_t>(dim_)};
}

std::optional<std::span<const float>> EmbeddingTable::vector_of(std::string_view token) const {
  const int32_t idx = index_of(token);
  if (idx < 0) return std::nullopt;
  return vector_at(idx);
}

void EmbeddingTable::add(std::string token, std::vector<float> values) {
  if (dim_ == 0) dim_ = static_cast<int>(values.size());
  if (static_cast<int>(values.size()) != dim_ || dim_ == 0) {
    raise(Errc::dimension_mismatch, "vector length does not match table dimension");
  }
  for (float v : values) {
    if (!std::isfinite(v)) raise(Errc::invalid_argument, "non-finite embedding value");
  }
  if (index_.count(token)) raise(Errc::invalid_argument, "duplicate embedding token: " + token);
  const int32_t idx = size();
  index_.emplace(token, idx);
  tokens_.push_back(std::move(token));
  values_.insert(values_.end(), values.begin(), values.end());
}

EmbeddingTable train_cbow(const std::vector<std::vector<std::string>>& corpus,
                          const CbowOptions& opt) {
  if (opt.dim < 1 || opt.window < 1 || opt.epochs < 1 || opt.negatives < 0 ||
      !(opt.learning_rate > 0.0)) {
    raise(Errc::invalid_argument, "bad CBOW options");
  }

  // Corpus vocabulary in first-seen order, with raw occurrence counts.
  std::vector<std::string> tokens;
  std::unordered_map<std::string, int32_t> index;
  std::vector<int64_t> counts;
  std::vector<std::vector<int32_t>> docs;
  docs.reserve(corpus.size());
  int64_t total_tokens = 0;
  for (const auto& doc : corpus) {
    std::vector<int32_t> ids;
    ids.reserve(doc.size());
    for (const std::string& tok : doc) {
      auto it = index.find(tok);
      int32_t id;
      if (it == index.end()) {
        id = static_cast<int32_t>(tokens.size());
        tokens.push_back(tok);
        index.emplace(tok, id);
        counts.push_back(0);
      } else {
        id = it->second;
      }
      ++counts[id];
      ids.push_back(id);
      ++total_tokens;
    }
    if (!ids.empty()) docs.push_back(std::move(ids));
  }
  if (docs.empty()) raise(Errc::empty_corpus, "no tokens to train on");

  const int32_t vocab = static_cast<int32_t>(tokens.size());
  const int dim = opt.dim;

  std::mt19937_64 rng(opt.seed);

  // Input vectors start small and random, output vectors at zero.
  std::vector<float> syn0(static_cast<size_t>(vocab) * dim);
  std::vector<float> syn1(static_cast<size_t>(vocab) * dim, 0.0f);
  for (float& v : syn0) {
    const double u = static_cast<double>(rng()) / static_cast<double>(std::mt19937_64::max());
    v = static_cast<float>((u - 0.5) / dim);
  }

  // Unigram table raised to the 3/4 power for negative sampling.
  std::vector<int32_t> unigram;
  if (opt.negatives > 0) {
    const size_t table_size = 1u << 20;
    unigram.resize(table_size);
    double norm = 0.0;
    for (int64_t c : counts) norm += std::pow(static_cast<double>(c), 0.75);
    size_t filled = 0;
    double cum = 0.0;
    for (int32_t w = 0; w < vocab && filled < table_size; ++w) {
      cum += std::pow(static_cast<double>(counts[w]), 0.75) / norm;
      const size_t until = std::min(table_size, static_cast<size_t>(cum * table_size) + 1);
      while (filled < until) unigram[filled++] = w;
    }
    while (filled < table_size) unigram[filled++] = vocab - 1;
  }

  const double lr0 = opt.learning_rate;
  const int64_t planned = static_cast<int64_t>(opt.epochs) * total_tokens;
  int64_t processed = 0;
  std::vector<double> neu1(dim), neu1e(dim);

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    for (const auto& doc : docs) {
      const int len = static_cast<int>(doc.size());
      for (int pos = 0; pos < len; ++pos) {
        const double progress = static_cast<double>(processed) / static_cast<double>(planned);
        const double lr = std::max(lr0 * (1.0 - progress), lr0 * 1e-4);
        ++processed;

        const int shrink = static_cast<int>(rng() % static_cast<uint64_t>(opt.window));
        const int span = opt.window - shrink;
        std::fill(neu1.begin(), neu1.end(), 0.0);
        std::fill(neu1e.begin(), neu1e.end(), 0.0);
        int context = 0;
        for (int off = -span; off <= span; ++off) {
          if (off == 0) continue;
          const int p = pos + off;
          if (p < 0 || p >= len) continue;
          const float* row = syn0.data() + static_cast<size_t>(doc[p]) * dim;
          for (int d = 0; d < dim; ++d) neu1[d] += row[d];
          ++context;
        }
        if (context == 0) continue;
        for (int d = 0; d < dim; ++d) neu1[d] /= context;

        const int32_t center = doc[pos];
        for (int k = 0; k <= opt.negatives; ++k) {
          int32_t target;
          double label;
          if (k == 0) {
            target = center;
            label = 1.0;
          } else {
            if (unigram.empty()) break;
            target = unigram[rng() % unigram.size()];
            if (target == center) continue;
            label = 0.0;
          }
          float* out = syn1.data() + static_cast<size_t>(target) * dim;
          double f = 0.0;
          for (int d = 0; d < dim; ++d) f += neu1[d] * out[d];
          const double g = (label - sigmoid(f)) * lr;
          for (int d = 0; d < dim; ++d) {
            neu1e[d] += g * out[d];
            out[d] += static_cast<float>(g * neu1[d]);
          }
        }
        for (int off = -span; off <= span; ++off) {
          if (off == 0) continue;
          const int p = pos + off;
          if (p < 0 || p >= len) continue;
          float* row = syn0.data() + static_cast<size_t>(doc[p]) * dim;
          for (int d = 0; d < dim; ++d) row[d] += static_cast<float>(neu1e[d]);
        }
      }
    }
  }

  EmbeddingTable table(dim);
  table.meta = opt;
  std::vector<float> row(dim);
  for (int32_t w = 0; w < vocab; ++w) {
    std::copy_n(syn0.begin() + static_cast<size_t>(w) * dim, dim, row.begin());
    table.add(tokens[w], row);
  }
  return table;
}

std::string linear_analogy(const EmbeddingTable& table, const std::string& a,
                           const std::string& b, const std::string& c,
                           const std::set<std::string>& exclude) {
  const auto va = table.vector_of(a);
  const auto vb = table.vector_of(b);
  const auto vc = table.vector_of(c);
  if (!va || !vb || !vc) {
    raise(Errc::unknown_token, "analogy over a token missing from the table");
  }
  std::vector<double> query(table.dim());
  double query_norm = 0.0;
  for (int d = 0; d < table.dim(); ++d) {
    query[d] = static_cast<double>((*vb)[d]) - static_cast<double>((*va)[d]) +
               static_cast<double>((*vc)[d]);
    query_norm += query[d] * query[d];
  }
  if (query_norm == 0.0) raise(Errc::zero_vector, "analogy query vector is zero");
  query_norm = std::sqrt(query_norm);

  int32_t best = -1;
  double best_cos = -2.0;
  for (int32_t i = 0; i < table.size(); ++i) {
    const std::string& tok = table.token_at(i);
    if (tok == a || tok == b || tok == c || exclude.count(tok)) continue;
    const auto vec = table.vector_at(i);
    double dot = 0.0, norm = 0.0;
    for (int d = 0; d < table.dim(); ++d) {
      dot += query[d] * vec[d];
      norm += static_cast<double>(vec[d]) * vec[d];
    }
    if (norm == 0.0) continue;  // zero vectors cannot be ranked
    const double cos = dot / (query_norm * std::sqrt(norm));
    if (cos > best_cos) {
      best_cos = cos;
      best = i;
    }
  }
  if (best < 0) raise(Errc::empty_input, "no candidate token for the analogy");
  return table.token_at(best);
}

MergeMap reduce_vocabulary(const Vocabulary& vocab, const EmbeddingTable& table,
                           double cos_threshold, double jac_threshold, int ngram_n,
                           int top_k) {
  if (!(cos_threshold > 0.0) || cos_threshold > 1.0 || !(jac_threshold > 0.0) ||
      jac_threshold > 1.0) {
    raise(Errc::invalid_threshold, "thresholds must lie in (0, 1]");
  }
  if (ngram_n < 1 || top_k < 1) raise(Errc::invalid_argument, "bad reduction parameters");

  const int32_t n = vocab.size();
  std::vector<int32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&parent](int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::vector<std::optional<MergeMap::Source>> merged_by(n);
  // Folds the lower-df root into the higher-df root; equal frequencies keep
  // the lexicographically smaller token as canonical.
  const auto unite = [&](int32_t x, int32_t y, MergeMap::Source source) {
    int32_t rx = find(x), ry = find(y);
    if (rx == ry) return;
    const int64_t fx = vocab.doc_freq(rx), fy = vocab.doc_freq(ry);
    int32_t keep = rx, drop = ry;
    if (fx < fy || (fx == fy && vocab.token_of(ry) < vocab.token_of(rx))) {
      keep = ry;
      drop = rx;
    }
    parent[drop] = keep;
    merged_by[drop] = source;
  };

  // Pass 1: misspellings by padded n-gram overlap. Candidate pairs must
  // share at least one gram, found through an inverted index.
  std::vector<std::set<std::string>> grams(n);
  std::unordered_map<std::string, std::vector<int32_t>> by_gram;
  for (int32_t i = 0; i < n; ++i) {
    grams[i] = char_ngram_set(vocab.token_of(i), ngram_n);
    for (const std::string& g : grams[i]) by_gram[g].push_back(i);
  }
  for (int32_t i = 0; i < n; ++i) {
    std::vector<int32_t> candidates;
    for (const std::string& g : grams[i]) {
      for (int32_t j : by_gram[g]) {
        if (j > i) candidates.push_back(j);
      }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (int32_t j : candidates) {
      if (find(i) == find(j)) continue;
      if (jaccard_similarity(grams[i], grams[j]) >= jac_threshold) {
        unite(i, j, MergeMap::Source::jaccard);
      }
    }
  }

  // Pass 2: synonyms among surviving tokens that have embeddings. Candidate
  // pairs are limited to each survivor's top-k cosine neighbors.
  std::vector<int32_t> survivors;
  std::vector<int32_t> embed_index;
  for (int32_t i = 0; i < n; ++i) {
    if (find(i) != i) continue;
    const int32_t e = table.index_of(vocab.token_of(i));
    if (e < 0) continue;
    survivors.push_back(i);
    embed_index.push_back(e);
  }
  const size_t m = survivors.size();
  for (size_t si = 0; si < m; ++si) {
    std::vector<std::pair<double, int32_t>> scored;  // (cosine, survivor slot)
    const auto vi = table.vector_at(embed_index[si]);
    for (size_t sj = 0; sj < m; ++sj) {
      if (sj == si) continue;
      double cos;
      try {
        cos = cosine_similarity(vi, table.vector_at(embed_index[sj]));
      } catch (const Error& e) {
        if (e.code() == Errc::zero_vector) continue;
        throw;
      }
      scored.emplace_back(cos, static_cast<int32_t>(sj));
    }
    const size_t keep = std::min<size_t>(top_k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                      [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first > b.first;
                        return a.second < b.second;
                      });
    scored.resize(keep);
    for (const auto& [cos, sj] : scored) {
      if (cos < cos_threshold) break;
      unite(survivors[si], survivors[sj], MergeMap::Source::cosine);
    }
  }

  MergeMap merges;
  for (int32_t i = 0; i < n; ++i) {
    const int32_t r = find(i);
    if (r == i) continue;
    merges.add(vocab.token_of(i), vocab.token_of(r),
               merged_by[i].value_or(MergeMap::Source::cosine));
  }
  return merges;
}

void MergeMap::add(const std::string& from, const std::string& to, Source source) {
  if (from == to) raise(Errc::invalid_argument, "token cannot merge into itself");
  if (entries_.count(to)) raise(Errc::invalid_argument, "canonical target is itself merged");
  auto [it, inserted] = entries_.emplace(from, std::make_pair(to, source));
  if (!inserted) raise(Errc::invalid_argument, "token already merged: " + from);
}

const std::string& MergeMap::canonical(const std::string& token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? token : it->second.first;
}

bool MergeMap::is_merged(const std::string& token) const {
  return entries_.count(token) != 0;
}

std::string MergeMap::to_tsv() const {
  std::string out;
  for (const auto& [from, target] : entries_) {
    out += from;
    out += '\t';
    out += target.first;
    out += '\n';
  }
  return out;
}

MergeMap MergeMap::from_tsv(std::string_view tsv) {
  MergeMap mm;
  size_t start = 0;
  while (start < tsv.size()) {
    size_t end = tsv.find('\n', start);
    if (end == std::string_view::npos) end = tsv.size();
    const std::string_view line = tsv.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      raise(Errc::invalid_argument, "merge map line lacks a tab separator");
    }
    mm.add(std::string(line.substr(0, tab)), std::string(line.substr(tab + 1)),
           Source::jaccard);
  }
  return mm;
}

Vocabulary apply_merge_map(const Vocabulary& vocab, const MergeMap& merges) {
  std::vector<std::string> tokens;
  std::vector<int64_t> freqs;
  std::unordered_map<std::string, int32_t> new_id;
  for (int32_t i = 0; i < vocab.size(); ++i) {
    const std::string& tok = vocab.token_of(i);
    if (merges.is_merged(tok)) continue;
    new_id.emplace(tok, static_cast<int32_t>(tokens.size()));
    tokens.push_back(tok);
    freqs.push_back(vocab.doc_freq(i));
  }
  std::vector<std::pair<std::string, int32_t>> aliases;
  for (const auto& [from, target] : merges.entries()) {
    auto it = new_id.find(target.first);
    if (it == new_id.end()) {
      raise(Errc::invalid_argument, "merge target missing from vocabulary: " + target.first);
    }
    if (vocab.id_of(from) >= 0) aliases.emplace_back(from, it->second);
  }
  return Vocabulary::from_parts(std::move(tokens), std::move(freqs), std::move(aliases));
}

void save_embeddings(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(Errc::file_not_found, "cannot open for writing: " + path);
  out << table.size() << ' ' << table.dim() << '\n';
  char buf[64];
  for (int32_t i = 0; i < table.size(); ++i) {
    out << table.token_at(i);
    for (float v : table.vector_at(i)) {
      std::snprintf(buf, sizeof(buf), " %.9g", static_cast<double>(v));
      out << buf;
    }
    out << '\n';
  }
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::file_not_found, "cannot open embeddings: " + path);

  EmbeddingTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    if (first) {
      first = false;
      // Optional "<count> <dim>" header: exactly two numeric fields.
      std::istringstream probe(line);
      long long a, b;
      std::string extra;
      if (probe >> a >> b && !(probe >> extra) && a >= 0 && b > 0) continue;
    }
    std::string token;
    if (!(ss >> token)) continue;
    std::vector<float> values;
    double v;
    while (ss >> v) values.push_back(static_cast<float>(v));
    if (values.empty()) {
      raise(Errc::invalid_argument, "embedding line has no values: " + token);
    }
    table.add(std::move(token), std::move(values));
  }
  if (table.size() == 0) raise(Errc::empty_corpus, "embedding file has no vectors");
  return table;
}

}  // namespace geoinfer
