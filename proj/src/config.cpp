#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace geoinfer {

namespace {

int64_t parse_int(const std::string& key, const std::string& value) {
  int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    raise(Errc::invalid_argument, "expected an integer for " + key + ": " + value);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double out = std::stod(value, &used);
    if (used == value.size()) return out;
  } catch (...) {
  }
  raise(Errc::invalid_argument, "expected a number for " + key + ": " + value);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  raise(Errc::invalid_argument, "expected a boolean for " + key + ": " + value);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(value);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string trim(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

}  // namespace

uint64_t fnv1a_64(std::string_view bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string to_hex(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return std::string(buf);
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key == "corpus") corpus_path = value;
  else if (key == "columns") {
    // e.g. "user=0,lat=1,lon=2,text=3"
    for (const std::string& part : split_list(value)) {
      const size_t eq = part.find('=');
      if (eq == std::string::npos) {
        raise(Errc::invalid_argument, "bad column mapping entry: " + part);
      }
      const std::string name = trim(part.substr(0, eq));
      const int idx = static_cast<int>(parse_int("columns", trim(part.substr(eq + 1))));
      if (idx < 0) raise(Errc::invalid_argument, "column index must be >= 0");
      if (name == "user") col_user = idx;
      else if (name == "lat") col_lat = idx;
      else if (name == "lon") col_lon = idx;
      else if (name == "text") col_text = idx;
      else raise(Errc::invalid_argument, "unknown column name: " + name);
    }
  } else if (key == "capacity") capacity = static_cast<int32_t>(parse_int(key, value));
  else if (key == "capacities") {
    capacities.clear();
    for (const std::string& item : split_list(value)) {
      capacities.push_back(static_cast<int32_t>(parse_int(key, trim(item))));
    }
  } else if (key == "max_depth") max_depth = static_cast<int32_t>(parse_int(key, value));
  else if (key == "global_partition") global_partition = parse_bool(key, value);
  else if (key == "tokenizer.min_len") tokenizer.min_len = static_cast<int>(parse_int(key, value));
  else if (key == "tokenizer.remove_urls") tokenizer.remove_urls = parse_bool(key, value);
  else if (key == "tokenizer.remove_mentions") tokenizer.remove_mentions = parse_bool(key, value);
  else if (key == "tokenizer.stopwords") tokenizer.remove_stopwords = parse_bool(key, value);
  else if (key == "min_df") min_df = parse_int(key, value);
  else if (key == "embedding") {
    if (value == "train") embedding = EmbeddingSource::train;
    else if (value == "off") embedding = EmbeddingSource::off;
    else if (value == "load") embedding = EmbeddingSource::load;
    else if (value.rfind("load:", 0) == 0) {
      embedding = EmbeddingSource::load;
      embedding_path = value.substr(5);
    } else raise(Errc::invalid_argument, "embedding must be train, off, load or load:PATH");
  } else if (key == "embedding_path") embedding_path = value;
  else if (key == "cos_threshold") cos_threshold = parse_double(key, value);
  else if (key == "jac_threshold") jac_threshold = parse_double(key, value);
  else if (key == "ngram_n") ngram_n = static_cast<int>(parse_int(key, value));
  else if (key == "cbow.dim") cbow.dim = static_cast<int>(parse_int(key, value));
  else if (key == "cbow.window") cbow.window = static_cast<int>(parse_int(key, value));
  else if (key == "cbow.epochs") cbow.epochs = static_cast<int>(parse_int(key, value));
  else if (key == "cbow.negatives") cbow.negatives = static_cast<int>(parse_int(key, value));
  else if (key == "cbow.learning_rate") cbow.learning_rate = parse_double(key, value);
  else if (key == "classifier" || key == "classifiers") {
    classifiers.clear();
    for (const std::string& item : split_list(value)) classifiers.push_back(trim(item));
    if (classifiers.empty()) raise(Errc::invalid_argument, "classifier list is empty");
  } else if (key == "alpha") alpha = parse_double(key, value);
  else if (key == "l2") logit.l2 = parse_double(key, value);
  else if (key == "max_iter") logit.max_iter = static_cast<int>(parse_int(key, value));
  else if (key == "tol") logit.tol = parse_double(key, value);
  else if (key == "balanced") logit.balanced = parse_bool(key, value);
  else if (key == "k") k_folds = static_cast<int>(parse_int(key, value));
  else if (key == "seed") seed = static_cast<uint64_t>(parse_int(key, value));
  else if (key == "bias_train") bias_train = parse_bool(key, value);
  else if (key == "bias_report") bias_report = parse_bool(key, value);
  else if (key == "timing") record_timing = parse_bool(key, value);
  else if (key == "out_dir") output_dir = value;
  else raise(Errc::invalid_argument, "unknown config key: " + key);
}

void PipelineConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::file_not_found, "cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      raise(Errc::invalid_argument,
            path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
}

void PipelineConfig::validate() const {
  if (capacity < 1) raise(Errc::invalid_argument, "capacity must be >= 1");
  for (int32_t c : capacities) {
    if (c < 1) raise(Errc::invalid_argument, "capacities must be >= 1");
  }
  if (max_depth < 0) raise(Errc::invalid_argument, "max_depth must be >= 0");
  if (min_df < 1) raise(Errc::invalid_argument, "min_df must be >= 1");
  if (tokenizer.min_len < 1) raise(Errc::invalid_argument, "tokenizer.min_len must be >= 1");
  if (!(cos_threshold > 0.0) || cos_threshold > 1.0 || !(jac_threshold > 0.0) ||
      jac_threshold > 1.0) {
    raise(Errc::invalid_threshold, "similarity thresholds must lie in (0, 1]");
  }
  if (ngram_n < 1) raise(Errc::invalid_argument, "ngram_n must be >= 1");
  if (!(alpha > 0.0)) raise(Errc::invalid_argument, "alpha must be > 0");
  if (logit.max_iter < 1 || !(logit.tol > 0.0) || !(logit.l2 >= 0.0)) {
    raise(Errc::invalid_argument, "bad logit settings");
  }
  if (k_folds < 2) raise(Errc::invalid_argument, "k must be >= 2");
  if (embedding == EmbeddingSource::load && embedding_path.empty()) {
    raise(Errc::invalid_argument, "embedding=load requires embedding_path");
  }
  for (const std::string& c : classifiers) {
    if (c != "mnb" && c != "logit") {
      raise(Errc::invalid_argument, "unknown classifier: " + c);
    }
  }
  if (classifiers.empty()) raise(Errc::invalid_argument, "no classifier configured");
}

std::string PipelineConfig::canonical_string() const {
  std::vector<std::pair<std::string, std::string>> kv;
  const auto add = [&kv](const std::string& k, const std::string& v) {
    kv.emplace_back(k, v);
  };
  char buf[64];
  const auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };

  add("corpus", corpus_path);
  add("columns", "user=" + std::to_string(col_user) + ",lat=" + std::to_string(col_lat) +
                     ",lon=" + std::to_string(col_lon) + ",text=" + std::to_string(col_text));
  add("capacity", std::to_string(capacity));
  {
    std::string list;
    for (int32_t c : capacity_list()) {
      if (!list.empty()) list += ',';
      list += std::to_string(c);
    }
    add("capacities", list);
  }
  add("max_depth", std::to_string(max_depth));
  add("global_partition", global_partition ? "true" : "false");
  add("tokenizer.min_len", std::to_string(tokenizer.min_len));
  add("tokenizer.remove_urls", tokenizer.remove_urls ? "true" : "false");
  add("tokenizer.remove_mentions", tokenizer.remove_mentions ? "true" : "false");
  add("tokenizer.stopwords", tokenizer.remove_stopwords ? "true" : "false");
  add("min_df", std::to_string(min_df));
  add("embedding", embedding == EmbeddingSource::train
                       ? "train"
                       : (embedding == EmbeddingSource::off ? "off" : "load"));
  add("embedding_path", embedding_path);
  add("cos_threshold", num(cos_threshold));
  add("jac_threshold", num(jac_threshold));
  add("ngram_n", std::to_string(ngram_n));
  add("cbow.dim", std::to_string(cbow.dim));
  add("cbow.window", std::to_string(cbow.window));
  add("cbow.epochs", std::to_string(cbow.epochs));
  add("cbow.negatives", std::to_string(cbow.negatives));
  add("cbow.learning_rate", num(cbow.learning_rate));
  {
    std::string list;
    for (const std::string& c : classifiers) {
      if (!list.empty()) list += ',';
      list += c;
    }
    add("classifiers", list);
  }
  add("alpha", num(alpha));
  add("l2", num(logit.l2));
  add("max_iter", std::to_string(logit.max_iter));
  add("tol", num(logit.tol));
  add("balanced", logit.balanced ? "true" : "false");
  add("k", std::to_string(k_folds));
  add("seed", std::to_string(seed));
  add("bias_train", bias_train ? "true" : "false");
  add("bias_report", bias_report ? "true" : "false");
  add("timing", record_timing ? "true" : "false");

  std::sort(kv.begin(), kv.end());
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::string PipelineConfig::fingerprint() const {
  return to_hex(fnv1a_64(canonical_string()));
}

}  // namespace geoinfer
