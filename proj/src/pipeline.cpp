#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "featurize.hpp"
#include "json.hpp"

namespace geoinfer {

namespace {

using nlohmann::json;

std::string fmt(const char* format, double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return std::string(buf);
}

json number_or_null(double value) {
  if (std::isnan(value)) return nullptr;
  return value;
}

// Splits a TSV line. When the text column sits at the highest configured
// index, everything from that field onward is treated as the text, so tabs
// inside message bodies survive.
bool parse_tsv_line(const std::string& line, const PipelineConfig& cfg, Record* out) {
  const int max_col = std::max({cfg.col_user, cfg.col_lat, cfg.col_lon, cfg.col_text});
  const bool text_is_last = cfg.col_text == max_col;

  std::vector<std::string> fields;
  size_t start = 0;
  while (static_cast<int>(fields.size()) < max_col + 1) {
    if (text_is_last && static_cast<int>(fields.size()) == max_col) {
      fields.push_back(line.substr(start));
      break;
    }
    const size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  if (static_cast<int>(fields.size()) < max_col + 1) return false;

  const auto parse_coord = [](const std::string& s, double* value) {
    try {
      size_t used = 0;
      *value = std::stod(s, &used);
      return used == s.size() && !s.empty();
    } catch (...) {
      return false;
    }
  };

  double lat = 0.0, lon = 0.0;
  if (!parse_coord(fields[cfg.col_lat], &lat) || !parse_coord(fields[cfg.col_lon], &lon)) {
    return false;
  }
  const GeoPoint p{lat, lon};
  if (!point_valid(p)) return false;

  out->user_id = fields[cfg.col_user];
  out->point = p;
  out->text = fields[cfg.col_text];
  return true;
}

std::vector<std::vector<std::string>> tokenize_all(const std::vector<Record>& records,
                                                   const TokenizerConfig& tok) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(records.size());
  for (const Record& r : records) docs.push_back(normalize_tokenize(r.text, tok));
  return docs;
}

BoundingBox tight_bounds(const std::vector<Record>& records) {
  BoundingBox b{90.0, -90.0, 180.0, -180.0};
  for (const Record& r : records) {
    b.min_lat = std::min(b.min_lat, r.point.lat);
    b.max_lat = std::max(b.max_lat, r.point.lat);
    b.min_lon = std::min(b.min_lon, r.point.lon);
    b.max_lon = std::max(b.max_lon, r.point.lon);
  }
  return b;
}

json leaf_to_json(const QuadtreeLeaf& leaf) {
  return json{
      {"id", leaf.leaf_id},
      {"box", {leaf.box.min_lat, leaf.box.max_lat, leaf.box.min_lon, leaf.box.max_lon}},
      {"depth", leaf.depth},
      {"count", leaf.point_ids.size()},
      {"centroid", {leaf.centroid.lat, leaf.centroid.lon}},
  };
}

QuadtreeLeaf leaf_from_json(const json& j) {
  QuadtreeLeaf leaf;
  leaf.leaf_id = j.at("id").get<int32_t>();
  const auto& box = j.at("box");
  leaf.box = BoundingBox{box.at(0), box.at(1), box.at(2), box.at(3)};
  leaf.depth = j.at("depth").get<int32_t>();
  leaf.point_ids.resize(j.at("count").get<size_t>());  // counts only; ids are not persisted
  const auto& c = j.at("centroid");
  leaf.centroid = GeoPoint{c.at(0), c.at(1)};
  return leaf;
}

void ensure_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) raise(Errc::internal, "cannot create output directory: " + dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

std::pair<std::vector<Record>, IngestReport> load_corpus(const std::string& path,
                                                         const PipelineConfig& cfg) {
  std::ifstream in(path);
  if (!in) raise(Errc::file_not_found, "cannot open corpus: " + path);

  IngestReport report;
  std::vector<Record> parsed;
  std::string line;
  while (std::getline(in, line)) {
    ++report.read;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Record r;
    if (line.empty() || !parse_tsv_line(line, cfg, &r)) {
      ++report.malformed;
      continue;
    }
    r.record_id = static_cast<uint32_t>(parsed.size());
    parsed.push_back(std::move(r));
  }
  report.parsed = static_cast<int64_t>(parsed.size());
  if (parsed.empty()) raise(Errc::no_valid_records, "no valid records in " + path);

  std::vector<Record> kept = dedup_corpus(parsed);
  report.kept = static_cast<int64_t>(kept.size());
  report.deduped = report.parsed - report.kept;
  return {std::move(kept), report};
}

ModelBundle train_bundle(const std::vector<Record>& records, const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.classifiers.size() != 1) {
    raise(Errc::invalid_argument, "training persists exactly one classifier");
  }
  if (records.empty()) raise(Errc::empty_training, "no records to train on");

  ModelBundle bundle;
  bundle.config_fingerprint = cfg.fingerprint();
  bundle.tokenizer = cfg.tokenizer;
  bundle.capacity = cfg.capacity;
  bundle.max_depth = cfg.max_depth;
  bundle.classifier = cfg.classifiers.front();

  std::vector<IndexedPoint> points;
  points.reserve(records.size());
  for (const Record& r : records) points.push_back(IndexedPoint{r.record_id, r.point});
  const QuadtreePartition partition =
      QuadtreePartition::build(points, tight_bounds(records), cfg.capacity, cfg.max_depth);
  bundle.leaves = partition.leaves();

  const auto docs = tokenize_all(records, cfg.tokenizer);
  FeatureSpace fs = build_feature_space(docs, cfg);
  bundle.vocab = std::move(fs.vocab);
  bundle.merges = std::move(fs.merges);

  std::vector<int32_t> labels(records.size());
  std::map<int32_t, int64_t> leaf_counts;
  for (size_t i = 0; i < records.size(); ++i) {
    labels[i] = partition.locate(records[i].point);
    ++leaf_counts[labels[i]];
  }
  std::vector<FeatureVector> X;
  X.reserve(records.size());
  for (const auto& doc : docs) X.push_back(vectorize(doc, bundle.vocab));

  std::vector<double> sample_weights;
  if (cfg.bias_train) {
    const auto weights = bias_weights(leaf_counts);
    sample_weights.reserve(labels.size());
    for (int32_t label : labels) sample_weights.push_back(weights.at(label));
  }

  const uint64_t vocab_hash = bundle.vocab.hash();
  if (bundle.classifier == "mnb") {
    bundle.mnb = mnb_fit(X, labels, cfg.alpha, sample_weights, bundle.vocab.size());
    bundle.mnb.vocabulary_hash = vocab_hash;
  } else {
    LogitOptions opt = cfg.logit;
    opt.seed = cfg.seed;
    bundle.logit = logit_fit(X, labels, opt, sample_weights, bundle.vocab.size());
    bundle.logit.vocabulary_hash = vocab_hash;
  }
  return bundle;
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
  json doc;
  doc["format"] = "geoinfer-bundle";
  doc["format_version"] = 1;
  doc["config_fingerprint"] = bundle.config_fingerprint;
  doc["tokenizer"] = {
      {"min_len", bundle.tokenizer.min_len},
      {"remove_urls", bundle.tokenizer.remove_urls},
      {"remove_mentions", bundle.tokenizer.remove_mentions},
      {"remove_stopwords", bundle.tokenizer.remove_stopwords},
  };

  json leaves = json::array();
  for (const QuadtreeLeaf& leaf : bundle.leaves) leaves.push_back(leaf_to_json(leaf));
  doc["partition"] = {
      {"capacity", bundle.capacity},
      {"max_depth", bundle.max_depth},
      {"leaves", leaves},
  };

  json aliases = json::object();
  for (const auto& [tok, id] : bundle.vocab.aliases_sorted()) aliases[tok] = id;
  doc["vocabulary"] = {
      {"tokens", bundle.vocab.tokens()},
      {"doc_freq", bundle.vocab.doc_freqs()},
      {"aliases", aliases},
  };

  json merges = json::object();
  for (const auto& [from, target] : bundle.merges.entries()) {
    merges[from] = {target.first,
                    target.second == MergeMap::Source::jaccard ? "jaccard" : "cosine"};
  }
  doc["merge_map"] = merges;

  json clf;
  clf["kind"] = bundle.classifier;
  if (bundle.classifier == "mnb") {
    // null marks an empty class; finite values round-trip exactly.
    json log_prior = json::array();
    for (double lp : bundle.mnb.log_prior) {
      log_prior.push_back(std::isinf(lp) ? json(nullptr) : json(lp));
    }
    clf["vocabulary_hash"] = to_hex(bundle.mnb.vocabulary_hash);
    clf["n_classes"] = bundle.mnb.n_classes;
    clf["n_features"] = bundle.mnb.n_features;
    clf["alpha"] = bundle.mnb.alpha;
    clf["log_prior"] = log_prior;
    clf["feature_log_prob"] = bundle.mnb.feature_log_prob;
  } else {
    clf["vocabulary_hash"] = to_hex(bundle.logit.vocabulary_hash);
    clf["n_classes"] = bundle.logit.n_classes;
    clf["n_features"] = bundle.logit.n_features;
    clf["l2"] = bundle.logit.l2;
    clf["iterations"] = bundle.logit.iterations;
    clf["converged"] = bundle.logit.converged;
    clf["weights"] = bundle.logit.weights;
    clf["bias"] = bundle.logit.bias;
  }
  doc["classifier"] = clf;

  write_text_file(path, doc.dump(2) + "\n");
}

ModelBundle load_bundle(const std::string& path) {
  const std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    raise(Errc::invalid_argument, "bundle is not valid JSON: " + std::string(e.what()));
  }

  try {
    if (doc.at("format").get<std::string>() != "geoinfer-bundle" ||
        doc.at("format_version").get<int>() != 1) {
      raise(Errc::invalid_argument, "unsupported bundle format");
    }

    ModelBundle bundle;
    bundle.config_fingerprint = doc.at("config_fingerprint").get<std::string>();
    const json& tok = doc.at("tokenizer");
    bundle.tokenizer.min_len = tok.at("min_len").get<int>();
    bundle.tokenizer.remove_urls = tok.at("remove_urls").get<bool>();
    bundle.tokenizer.remove_mentions = tok.at("remove_mentions").get<bool>();
    bundle.tokenizer.remove_stopwords = tok.at("remove_stopwords").get<bool>();

    const json& part = doc.at("partition");
    bundle.capacity = part.at("capacity").get<int32_t>();
    bundle.max_depth = part.at("max_depth").get<int32_t>();
    for (const json& j : part.at("leaves")) bundle.leaves.push_back(leaf_from_json(j));

    const json& voc = doc.at("vocabulary");
    std::vector<std::pair<std::string, int32_t>> aliases;
    for (const auto& [tok_name, id] : voc.at("aliases").items()) {
      aliases.emplace_back(tok_name, id.get<int32_t>());
    }
    bundle.vocab = Vocabulary::from_parts(voc.at("tokens").get<std::vector<std::string>>(),
                                          voc.at("doc_freq").get<std::vector<int64_t>>(),
                                          std::move(aliases));

    for (const auto& [from, target] : doc.at("merge_map").items()) {
      bundle.merges.add(from, target.at(0).get<std::string>(),
                        target.at(1).get<std::string>() == "jaccard"
                            ? MergeMap::Source::jaccard
                            : MergeMap::Source::cosine);
    }

    const json& clf = doc.at("classifier");
    bundle.classifier = clf.at("kind").get<std::string>();
    uint64_t stored_hash = 0;
    if (bundle.classifier == "mnb") {
      bundle.mnb.n_classes = clf.at("n_classes").get<int32_t>();
      bundle.mnb.n_features = clf.at("n_features").get<int32_t>();
      bundle.mnb.alpha = clf.at("alpha").get<double>();
      for (const json& lp : clf.at("log_prior")) {
        bundle.mnb.log_prior.push_back(lp.is_null()
                                           ? -std::numeric_limits<double>::infinity()
                                           : lp.get<double>());
      }
      bundle.mnb.feature_log_prob = clf.at("feature_log_prob").get<std::vector<double>>();
      bundle.mnb.vocabulary_hash = std::stoull(clf.at("vocabulary_hash").get<std::string>(),
                                               nullptr, 16);
      stored_hash = bundle.mnb.vocabulary_hash;
    } else if (bundle.classifier == "logit") {
      bundle.logit.n_classes = clf.at("n_classes").get<int32_t>();
      bundle.logit.n_features = clf.at("n_features").get<int32_t>();
      bundle.logit.l2 = clf.at("l2").get<double>();
      bundle.logit.iterations = clf.at("iterations").get<int>();
      bundle.logit.converged = clf.at("converged").get<bool>();
      bundle.logit.weights = clf.at("weights").get<std::vector<double>>();
      bundle.logit.bias = clf.at("bias").get<std::vector<double>>();
      bundle.logit.vocabulary_hash = std::stoull(clf.at("vocabulary_hash").get<std::string>(),
                                                 nullptr, 16);
      stored_hash = bundle.logit.vocabulary_hash;
    } else {
      raise(Errc::invalid_argument, "unknown classifier kind: " + bundle.classifier);
    }

    if (stored_hash != bundle.vocab.hash()) {
      raise(Errc::vocabulary_mismatch,
            "classifier was trained against a different vocabulary");
    }
    return bundle;
  } catch (const json::exception& e) {
    raise(Errc::invalid_argument, "malformed bundle: " + std::string(e.what()));
  }
}

PredictOutput bundle_predict(const ModelBundle& bundle, std::string_view text) {
  if (bundle.classifier == "mnb") {
    if (bundle.mnb.vocabulary_hash != bundle.vocab.hash()) {
      raise(Errc::vocabulary_mismatch, "model is bound to a different vocabulary");
    }
  } else if (bundle.logit.vocabulary_hash != bundle.vocab.hash()) {
    raise(Errc::vocabulary_mismatch, "model is bound to a different vocabulary");
  }

  const auto tokens = normalize_tokenize(text, bundle.tokenizer);
  const FeatureVector x = vectorize(tokens, bundle.vocab);

  const ClassPrediction pred = bundle.classifier == "mnb" ? mnb_predict(bundle.mnb, x)
                                                          : logit_predict(bundle.logit, x);
  PredictOutput out;
  out.leaf_id = pred.label;
  out.confidence = pred.posterior[pred.label];
  out.low_evidence = x.empty();
  if (pred.label < 0 || static_cast<size_t>(pred.label) >= bundle.leaves.size()) {
    raise(Errc::internal, "predicted label has no leaf");
  }
  out.point = bundle.leaves[pred.label].centroid;
  return out;
}

std::string bundle_predict_json(const ModelBundle& bundle, std::string_view text) {
  const PredictOutput out = bundle_predict(bundle, text);
  json j = {
      {"leaf_id", out.leaf_id},
      {"lat", out.point.lat},
      {"lon", out.point.lon},
      {"confidence", out.confidence},
      {"low_evidence", out.low_evidence},
      {"fingerprint", bundle.config_fingerprint},
  };
  return j.dump();
}

std::string leaf_stats_csv(const QuadtreePartition& partition, const std::string& fingerprint) {
  std::string out = "# fingerprint=" + fingerprint + "\n";
  out += "leaf_id,count,depth,min_lat,min_lon,max_lat,max_lon,centroid_lat,centroid_lon\n";
  for (const LeafStats& s : partition.leaf_stats()) {
    out += std::to_string(s.leaf_id) + "," + std::to_string(s.count) + "," +
           std::to_string(s.depth) + "," + fmt("%.6f", s.box.min_lat) + "," +
           fmt("%.6f", s.box.min_lon) + "," + fmt("%.6f", s.box.max_lat) + "," +
           fmt("%.6f", s.box.max_lon) + "," + fmt("%.6f", s.centroid.lat) + "," +
           fmt("%.6f", s.centroid.lon) + "\n";
  }
  return out;
}

std::string metrics_csv(const std::vector<EvalReport>& reports) {
  std::string out;
  if (!reports.empty()) out += "# fingerprint=" + reports.front().config_fingerprint + "\n";
  out += "capacity,classifier,med_km,aed_km,acc_at_161,time_mins\n";
  for (const EvalReport& r : reports) {
    out += std::to_string(r.capacity) + "," + r.classifier + "," + fmt("%.6f", r.med_km) +
           "," + fmt("%.6f", r.aed_km) + "," + fmt("%.6f", r.acc_at_161) + "," +
           fmt("%.2f", r.total_fit_seconds / 60.0) + "\n";
  }
  return out;
}

std::string diagnostics_csv(const EvalReport& report) {
  std::string out = "# fingerprint=" + report.config_fingerprint + "\n";
  out += "fold,leaf_id,count,log_count,predicted,correct,support,precision,recall\n";
  for (const LeafDiagnostic& row : report.per_leaf) {
    out += std::to_string(row.fold) + "," + std::to_string(row.leaf_id) + "," +
           std::to_string(row.count) + "," + fmt("%.6f", row.log_count) + "," +
           std::to_string(row.predicted) + "," + std::to_string(row.correct) + "," +
           std::to_string(row.support) + "," + fmt("%.6f", row.precision) + "," +
           fmt("%.6f", row.recall) + "\n";
  }
  return out;
}

std::string report_json(const std::vector<EvalReport>& reports) {
  json runs = json::array();
  for (const EvalReport& r : reports) {
    json metrics = {
        {"aed_km", r.aed_km},
        {"med_km", r.med_km},
        {"acc_at_161", r.acc_at_161},
        {"err_at_acc90_km", r.err_at_acc90_km},
    };
    if (r.weighted_aed_km) {
      metrics["weighted_aed_km"] = *r.weighted_aed_km;
      metrics["weighted_med_km"] = *r.weighted_med_km;
      metrics["weighted_acc_at_161"] = *r.weighted_acc_at_161;
    }
    json per_fold = json::array();
    for (const FoldMetrics& fm : r.per_fold) {
      per_fold.push_back({
          {"fold", fm.fold},
          {"n_test", fm.n_test},
          {"aed_km", fm.aed_km},
          {"med_km", fm.med_km},
          {"acc_at_161", fm.acc_at_161},
          {"fit_seconds", fm.fit_seconds},
      });
    }
    json per_leaf = json::array();
    for (const LeafDiagnostic& row : r.per_leaf) {
      per_leaf.push_back({
          {"fold", row.fold},
          {"leaf_id", row.leaf_id},
          {"count", row.count},
          {"log_count", row.log_count},
          {"predicted", row.predicted},
          {"correct", row.correct},
          {"support", row.support},
          {"precision", number_or_null(row.precision)},
          {"recall", number_or_null(row.recall)},
      });
    }
    runs.push_back({
        {"classifier", r.classifier},
        {"capacity", r.capacity},
        {"k_folds", r.k_folds},
        {"seed", r.seed},
        {"n_records", r.n_records},
        {"config_fingerprint", r.config_fingerprint},
        {"metrics", metrics},
        {"per_fold", per_fold},
        {"per_leaf", per_leaf},
        {"pearson_log_count_precision", number_or_null(r.pearson_r)},
        {"total_fit_seconds", r.total_fit_seconds},
    });
  }
  json doc = {
      {"format_version", 1},
      {"runs", runs},
  };
  return doc.dump(2) + "\n";
}

IngestReport cmd_partition(const PipelineConfig& cfg) {
  cfg.validate();
  auto [records, report] = load_corpus(cfg.corpus_path, cfg);
  std::vector<IndexedPoint> points;
  points.reserve(records.size());
  for (const Record& r : records) points.push_back(IndexedPoint{r.record_id, r.point});
  const QuadtreePartition partition =
      QuadtreePartition::build(points, tight_bounds(records), cfg.capacity, cfg.max_depth);

  ensure_output_dir(cfg.output_dir);
  const std::string fp = cfg.fingerprint();
  write_text_file(join_path(cfg.output_dir, "partition.geojson"), partition.to_geojson(fp));
  write_text_file(join_path(cfg.output_dir, "leaf_stats.csv"), leaf_stats_csv(partition, fp));
  return report;
}

IngestReport cmd_train(const PipelineConfig& cfg) {
  cfg.validate();
  auto [records, report] = load_corpus(cfg.corpus_path, cfg);
  const ModelBundle bundle = train_bundle(records, cfg);
  ensure_output_dir(cfg.output_dir);
  save_bundle(bundle, join_path(cfg.output_dir, "bundle.json"));
  write_text_file(join_path(cfg.output_dir, "merge_map.tsv"), bundle.merges.to_tsv());
  return report;
}

IngestReport cmd_evaluate(const PipelineConfig& cfg, const TestHook* hook) {
  cfg.validate();
  auto [records, report] = load_corpus(cfg.corpus_path, cfg);

  std::vector<EvalReport> runs;
  std::string timing = "wall-clock training time per run (seconds)\n";
  for (int32_t capacity : cfg.capacity_list()) {
    for (const std::string& classifier : cfg.classifiers) {
      EvalReport run = cross_validate(records, cfg, classifier, capacity, hook);
      timing += "classifier=" + classifier + " capacity=" + std::to_string(capacity) +
                " fit_seconds=" + fmt("%.6f", run.measured_fit_seconds) + "\n";
      runs.push_back(std::move(run));
    }
  }

  ensure_output_dir(cfg.output_dir);
  write_text_file(join_path(cfg.output_dir, "metrics.csv"), metrics_csv(runs));
  write_text_file(join_path(cfg.output_dir, "report.json"), report_json(runs));
  for (const EvalReport& run : runs) {
    write_text_file(join_path(cfg.output_dir, "diagnostics_" + run.classifier + "_" +
                                                  std::to_string(run.capacity) + ".csv"),
                    diagnostics_csv(run));
  }
  write_text_file(join_path(cfg.output_dir, "timing.log"), timing);
  return report;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::internal, "cannot open for writing: " + path);
  out << content;
  if (!out) raise(Errc::internal, "failed writing: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::file_not_found, "cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace geoinfer
